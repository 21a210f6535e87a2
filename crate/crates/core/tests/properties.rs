// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cas_core::device::{
    build_drive_operator, build_rotating_hamiltonian, build_static_hamiltonian, DeviceParams, DriveParams,
};
use cas_core::dynamics::{
    collapse_operators, evolve_lindblad, evolve_schrodinger, fit_oscillation, CoherenceParams, Frame, PulseShape,
    T2Choice,
};
use cas_core::gates::{virtual_z, ChannelAnalysis};
use cas_core::hilbert::{basis_state, total_number, BareLabel, ModeDims};
use cas_core::linalg::outer;
use cas_core::swt::SwDecomposition;

fn device(omega: [f64; 3], alpha: [f64; 3], g: [f64; 3], levels: usize) -> DeviceParams {
    DeviceParams {
        omega,
        alpha,
        g1c: g[0],
        g2c: g[1],
        g12: g[2],
        dims: ModeDims::uniform(levels).unwrap(),
    }
}

fn arb_device(levels: usize) -> impl Strategy<Value = DeviceParams> {
    (
        4.5..5.2f64,
        5.3..5.9f64,
        6.0..6.8f64,
        -0.35..-0.15f64,
        -0.35..-0.15f64,
        -0.45..-0.2f64,
        0.005..0.05f64,
        0.005..0.05f64,
        0.0..0.004f64,
    )
        .prop_map(move |(w1, w2, wc, a1, a2, ac, g1, g2, g12)| {
            device([w1, w2, wc], [a1, a2, ac], [g1, g2, g12], levels)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonians_are_hermitian(p in arb_device(3), wd in 5.5..7.0f64, amp in 0.0..0.1f64) {
        prop_assert!(build_static_hamiltonian(&p, true).hermiticity_residual() < 1e-10);
        prop_assert!(build_drive_operator(&p).hermiticity_residual() < 1e-10);
        prop_assert!(build_rotating_hamiltonian(&p, &DriveParams::continuous(wd, amp)).hermiticity_residual() < 1e-10);
    }

    #[test]
    fn exchange_conserves_excitations(p in arb_device(3)) {
        let h = build_static_hamiltonian(&p, true);
        prop_assert!(h.commutator(&total_number(p.dims)).frobenius() < 1e-10);
    }

    #[test]
    fn sw_generators_are_antihermitian(p in arb_device(3)) {
        let sw = SwDecomposition::from_device(&p, true).unwrap();
        prop_assert!(sw.s1.antihermiticity_residual() < 1e-10);
        prop_assert!(sw.s2.antihermiticity_residual() < 1e-10);
        prop_assert!(sw.d2.hermiticity_residual() < 1e-10);
    }

    #[test]
    fn sw_residual_is_third_order(p in arb_device(3)) {
        let scaled = |l: f64| {
            let mut q = p;
            q.g1c *= l;
            q.g2c *= l;
            q.g12 *= l;
            SwDecomposition::from_device(&q, true).unwrap().offdiagonal_residual()
        };
        let ratio = scaled(0.25) / scaled(0.5);
        prop_assert!((ratio - 0.125).abs() < 0.01, "ratio {}", ratio);
    }

    #[test]
    fn envelope_stays_within_amplitude(amp in 0.0..0.1f64, flat in 0.0..200.0f64, t in -10.0..300.0f64) {
        let s = PulseShape::flat_top(amp, flat);
        let v = s.envelope(t);
        prop_assert!((0.0..=amp).contains(&v));
        if t < 0.0 || t >= s.duration() {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn fit_recovers_random_sinusoid(f in 1e-3..8e-3f64, phase in -3.0..3.0f64, amp in 0.1..0.5f64, off in 0.2..0.8f64) {
        let t: Vec<f64> = (0..241).map(|k| 10.0 * k as f64).collect();
        let y: Vec<f64> = t.iter().map(|&x| amp * (TAU * f * x + phase).cos() + off).collect();
        let fit = fit_oscillation(&t, &y).unwrap();
        prop_assert!((fit.frequency - f).abs() / f < 1e-4);
        prop_assert!((fit.amplitude - amp).abs() < 1e-4);
        prop_assert!((fit.offset - off).abs() < 1e-4);
    }

    #[test]
    fn virtual_z_round_trip_leaves_fidelity(t1 in -3.0..3.0f64, t2 in -3.0..3.0f64, seed in 0u64..1000) {
        let p = DeviceParams::reference_device().with_dims(ModeDims::new([2, 2, 2]).unwrap());
        let comp: Vec<usize> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .iter()
            .map(|&(i, j)| p.dims.index_of(BareLabel::new(i, j, 0)).unwrap())
            .collect();
        // Random mixture of two unitaries as the test channel.
        let mut rng = StdRng::seed_from_u64(seed);
        let mut next = || rng.gen::<f64>() - 0.5;
        let g1 = DMatrix::from_fn(8, 8, |_, _| C64::new(next(), next()));
        let g2 = DMatrix::from_fn(8, 8, |_, _| C64::new(next(), next()));
        let (u1, u2) = (g1.qr().q(), g2.qr().q());
        let w = 0.3 + 0.4 * (next() + 0.5);
        let channel = |x: &DMatrix<C64>| (&u1 * x * u1.adjoint()) * C64::from(w) + (&u2 * x * u2.adjoint()) * C64::from(1.0 - w);
        let z = virtual_z(&p, (t1, t2));
        let unit = |a: usize, b: usize| {
            let mut x = DMatrix::<C64>::zeros(8, 8);
            x[(comp[a], comp[b])] = C64::new(1.0, 0.0);
            x
        };
        let plain: Vec<_> = (0..16).map(|k| channel(&unit(k % 4, k / 4))).collect();
        let wrapped: Vec<_> = (0..16)
            .map(|k| {
                let y = channel(&unit(k % 4, k / 4));
                let y = &z * y * z.adjoint();
                z.adjoint() * y * &z
            })
            .collect();
        let f0 = ChannelAnalysis::from_images(8, comp.clone(), plain).unwrap().avg_fidelity;
        let f1 = ChannelAnalysis::from_images(8, comp, wrapped).unwrap().avg_fidelity;
        prop_assert!((f0 - f1).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn schrodinger_preserves_norm(wd in 6.35..6.5f64, amp in 0.0..0.1f64, flat in 0.0..120.0f64) {
        let p = DeviceParams::reference_device().with_dims(ModeDims::uniform(3).unwrap());
        let shape = PulseShape::flat_top(amp, flat);
        let psi = basis_state(p.dims, BareLabel::new(0, 1, 0)).unwrap();
        let n = 12;
        let times: Vec<f64> = (0..=n).map(|k| shape.duration() * k as f64 / n as f64).collect();
        let tr = evolve_schrodinger(&p, &DriveParams::pulsed(wd, shape), &psi, &times, Frame::Rotating).unwrap();
        prop_assert!(tr.norm_error < 1e-8, "norm drift {}", tr.norm_error);
    }

    #[test]
    fn lindblad_preserves_trace_and_hermiticity(wd in 6.35..6.5f64, amp in 0.0..0.1f64, scale in 0.02..1.0f64) {
        let p = DeviceParams::reference_device().with_dims(ModeDims::new([2, 2, 3]).unwrap());
        let c = CoherenceParams::reference_device().with_coupler_scaled(scale);
        let ops = collapse_operators(&p, &c, T2Choice::Ramsey).unwrap();
        let a = basis_state(p.dims, BareLabel::new(0, 1, 0)).unwrap();
        let b = basis_state(p.dims, BareLabel::new(1, 1, 0)).unwrap();
        let psi = (a + b) / C64::from(2f64.sqrt());
        let shape = PulseShape::flat_top(amp, 60.0);
        let times: Vec<f64> = (0..=10).map(|k| shape.duration() * k as f64 / 10.0).collect();
        let tr = evolve_lindblad(&p, &DriveParams::pulsed(wd, shape), &outer(&psi, &psi), &times, &ops).unwrap();
        prop_assert!(tr.norm_error < 1e-8, "trace drift {}", tr.norm_error);
        prop_assert!(tr.hermiticity_error < 1e-10, "hermiticity {}", tr.hermiticity_error);
    }
}
