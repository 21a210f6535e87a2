// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use cas_core::device::DeviceParams;
use cas_core::dynamics::ode::OdeOptions;
use cas_core::dynamics::{CoherenceParams, PulseShape, T2Choice};
use cas_core::gates::{
    calibrate_cz, calibrated_unitary, channel_superoperator, choi_matrix, computational_phases, cz_pulse,
    round_trip_plateau, simulate_jazz, unitary_block_fidelity, virtual_z, wrap_symmetric, ChannelAnalysis,
    CzCalibration, NoiseModel,
};
use cas_core::hilbert::ModeDims;
use cas_core::linalg::eigh;
use cas_core::spectrum::cas_rate_numeric;
use cas_core::swt::Transition;

fn haar_state(rng: &mut StdRng, n: usize) -> DVector<C64> {
    let v = DVector::from_fn(n, |_, _| {
        let (u1, u2): (f64, f64) = (rng.gen::<f64>().max(1e-300), rng.gen());
        let r = (-2.0 * u1.ln()).sqrt();
        C64::from_polar(r, TAU * u2)
    });
    let n = v.norm();
    v / C64::from(n)
}

fn matrix_unit(n: usize, a: usize, b: usize) -> DMatrix<C64> {
    let mut x = DMatrix::zeros(n, n);
    x[(a, b)] = C64::new(1.0, 0.0);
    x
}

fn monte_carlo_fidelity(rng: &mut StdRng, channel: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> f64 {
    let n = 10_000;
    (0..n)
        .map(|_| {
            let s = haar_state(rng, 4);
            let out = channel(&(&s * s.adjoint()));
            (s.adjoint() * out * &s)[(0, 0)].re
        })
        .sum::<f64>()
        / n as f64
}

#[test]
fn depolarizing_channel_matches_state_average() {
    let mixed = DMatrix::<C64>::identity(4, 4) * C64::from(0.25);
    let images: Vec<_> = (0..16)
        .map(|k| if k % 4 == k / 4 { mixed.clone() } else { DMatrix::zeros(4, 4) })
        .collect();
    let a = ChannelAnalysis::from_images(4, vec![0, 1, 2, 3], images).unwrap();
    let mc = monte_carlo_fidelity(&mut StdRng::seed_from_u64(11), |rho| &mixed * rho.trace());
    assert!((a.avg_fidelity - 0.25).abs() < 1e-12);
    assert!((a.avg_fidelity - mc).abs() / mc < 0.005);
}

#[test]
fn unitary_channel_matches_state_average() {
    let mut rng = StdRng::seed_from_u64(5);
    let g = DMatrix::from_fn(4, 4, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let v = g.qr().q();
    let images: Vec<_> = (0..16).map(|k| &v * matrix_unit(4, k % 4, k / 4) * v.adjoint()).collect();
    let a = ChannelAnalysis::from_images(4, vec![0, 1, 2, 3], images).unwrap();
    let mc = monte_carlo_fidelity(&mut rng, |rho| &v * rho * v.adjoint());
    assert!((a.avg_fidelity - mc).abs() / mc < 0.005, "{} vs {mc}", a.avg_fidelity);
    assert!((a.avg_fidelity - unitary_block_fidelity(&v)).abs() < 1e-8);
}

#[test]
fn no_swap_gives_no_controlled_phase() {
    let p = DeviceParams {
        omega: [5.2, 5.5, 6.3],
        alpha: [-0.3, -0.3, -0.35],
        g1c: 0.0,
        g2c: 0.0,
        g12: 0.0,
        dims: ModeDims::uniform(3).unwrap(),
    };
    let phi: Vec<f64> = (0..12).map(|k| TAU * k as f64 / 12.0).collect();
    let r = simulate_jazz(&p, 6.3, 0.0, 200.0, &phi).unwrap();
    assert!(wrap_symmetric(r.controlled_phase).abs() < 1e-3, "phase {}", r.controlled_phase);
}

/// Calibrated gate on a truncated device.
fn small_gate() -> (DeviceParams, CzCalibration) {
    let p = DeviceParams::reference_device().with_dims(ModeDims::new([2, 2, 3]).unwrap());
    let cal = calibrate_cz(&p, 0.075).unwrap();
    (p, cal)
}

fn trace_out_defect(s: &DMatrix<C64>, dim: usize) -> f64 {
    (0..dim * dim)
        .map(|col| {
            let t: C64 = (0..dim).map(|k| s[(k + dim * k, col)]).sum();
            let want = if col % dim == col / dim { 1.0 } else { 0.0 };
            (t - want).norm()
        })
        .fold(0.0, f64::max)
}

#[test]
fn coherent_superoperator_is_unitary() {
    let (p, cal) = small_gate();
    let a = channel_superoperator(&p, &cal, None, true).unwrap();
    let s = a.superoperator.unwrap();
    let n = s.nrows();
    let defect = (s.adjoint() * &s - DMatrix::<C64>::identity(n, n)).norm();
    assert!(defect < 1e-6, "defect {defect}");
}

#[test]
fn noisy_superoperator_is_cptp() {
    let (p, cal) = small_gate();
    let noise = NoiseModel::new(CoherenceParams::reference_device(), T2Choice::Ramsey);
    let a = channel_superoperator(&p, &cal, Some(&noise), true).unwrap();
    let dim = p.dims.total();
    let s = a.superoperator.as_ref().unwrap();
    assert!(trace_out_defect(s, dim) < 1e-6);
    assert!(a.trace_defect() < 1e-6);
    let choi = choi_matrix(s, dim);
    let herm = (&choi + choi.adjoint()) * C64::from(0.5);
    let lowest = eigh(&herm).values[0];
    assert!(lowest >= -1e-8, "lowest Choi eigenvalue {lowest}");
}

#[test]
fn fidelity_falls_as_coupler_lifetime_shrinks() {
    let (p, cal) = small_gate();
    let f: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|&s| {
            let c = CoherenceParams::reference_device().with_coupler_scaled(s);
            channel_superoperator(&p, &cal, Some(&NoiseModel::new(c, T2Choice::Ramsey)), false)
                .unwrap()
                .avg_fidelity
        })
        .collect();
    assert!(f[0] > f[1] && f[1] > f[2], "{f:?}");
}

mod reference_device {
    use super::*;

    fn calibrated() -> &'static (DeviceParams, CzCalibration) {
        static CAL: OnceLock<(DeviceParams, CzCalibration)> = OnceLock::new();
        CAL.get_or_init(|| {
            let p = DeviceParams::reference_device();
            let cal = calibrate_cz(&p, 0.075).unwrap();
            (p, cal)
        })
    }

    fn phase_grid() -> Vec<f64> {
        (0..16).map(|k| TAU * k as f64 / 16.0).collect()
    }

    #[test]
    fn calibration_lands_near_the_swap_resonance() {
        let (p, cal) = calibrated();
        assert!((400.0..=520.0).contains(&cal.plateau), "plateau {}", cal.plateau);
        let res = cas_rate_numeric(p, 0.075, Transition::Blue).unwrap().omega_resonance;
        assert!((cal.omega_d - res).abs() < 0.005, "{} vs {res}", cal.omega_d);
    }

    #[test]
    fn corrected_phases_are_cz() {
        let (p, cal) = calibrated();
        let u = virtual_z(p, cal.local_phases) * calibrated_unitary(p, cal, &OdeOptions::default()).unwrap();
        let ph = computational_phases(p, &u);
        let want = [0.0, 0.0, 0.0, PI];
        for (got, w) in ph.iter().zip(want) {
            let err = wrap_symmetric(got - ph[0] - w);
            assert!(err.abs() < 0.02, "phases {ph:?}");
        }
    }

    #[test]
    fn echo_reads_pi_at_the_optimum() {
        let (p, cal) = calibrated();
        let r = simulate_jazz(p, cal.omega_d, cal.amp, cal.plateau, &phase_grid()).unwrap();
        assert!(wrap_symmetric(r.controlled_phase - PI).abs() < 0.02, "phase {}", r.controlled_phase);
    }

    #[test]
    fn coherent_gate_fidelity() {
        let (p, cal) = calibrated();
        let a = channel_superoperator(p, cal, None, false).unwrap();
        assert!(a.avg_fidelity >= 0.999, "fidelity {}", a.avg_fidelity);
    }

    #[test]
    fn controlled_phase_crosses_pi_once_across_detuning() {
        let (p, cal) = calibrated();
        let rate = cas_rate_numeric(p, cal.amp, Transition::Blue).unwrap().rate;
        let shape: PulseShape = cz_pulse(cal.amp, 0.0);
        let phases: Vec<f64> = (-3..=3)
            .map(|k| {
                let delta = 0.0008 * k as f64;
                let plateau = round_trip_plateau(rate, delta, &shape);
                simulate_jazz(p, cal.omega_d + delta, cal.amp, plateau, &phase_grid())
                    .unwrap()
                    .controlled_phase
            })
            .collect();
        let steps: Vec<f64> = phases.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(
            steps.iter().all(|s| *s > 0.0) || steps.iter().all(|s| *s < 0.0),
            "not monotone: {phases:?}"
        );
        let crossings = phases.windows(2).filter(|w| (w[0] - PI) * (w[1] - PI) < 0.0).count();
        assert_eq!(crossings, 1, "{phases:?}");
    }
}
