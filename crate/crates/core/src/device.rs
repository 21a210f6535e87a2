// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Device parameters and Hamiltonian assembly.
//!
//! Parameters are stored as ordinary frequencies in GHz. Hamiltonians come out
//! in angular units (rad/ns), so `exp(-i H t)` takes `t` in nanoseconds.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::dynamics::pulse::PulseShape;
use crate::error::{Error, Result};
use crate::hilbert::{site_operator, BareLabel, Mode, ModeDims, OpKind, OperatorMatrix};

/// Frequencies, anharmonicities and couplings of a Q1 - coupler - Q2 chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Mode frequencies (Q1, Q2, coupler), GHz.
    pub omega: [f64; 3],
    /// Anharmonicities, GHz.
    pub alpha: [f64; 3],
    pub g1c: f64,
    pub g2c: f64,
    pub g12: f64,
    pub dims: ModeDims,
}

impl DeviceParams {
    /// Fixed-frequency pair with a tunable-free coupler, measured values.
    pub fn reference_device() -> Self {
        Self {
            omega: [5.641, 5.507, 6.317],
            alpha: [-0.300, -0.303, -0.381],
            g1c: 0.040,
            g2c: 0.031,
            g12: 0.0018,
            dims: ModeDims::default(),
        }
    }

    /// Background used for the design-space maps, before the swept values are set.
    pub fn map_background() -> Self {
        Self {
            omega: [5.4, 5.0, 6.0],
            alpha: [-0.20, -0.20, -0.45],
            g1c: 0.0,
            g2c: 0.0,
            g12: 0.0,
            dims: ModeDims::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self
            .omega
            .iter()
            .chain(self.alpha.iter())
            .chain([self.g1c, self.g2c, self.g12].iter())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite device parameter".into()));
        }
        if self.omega.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidParameter(
                "mode frequencies must be positive".into(),
            ));
        }
        for (n, a) in self.alpha.iter().enumerate() {
            if *a > 0.0 {
                log::warn!("mode {n} has positive anharmonicity {a} GHz");
            }
        }
        if self.omega[0] == self.omega[2] || self.omega[1] == self.omega[2] {
            return Err(Error::SingularDenominator("data-coupler detuning"));
        }
        Ok(())
    }

    pub fn detunings(&self, omega_d: f64) -> DetuningSet {
        let [w1, w2, wc] = self.omega;
        DetuningSet {
            delta_12: w1 - w2,
            delta_1c: w1 - wc,
            delta_2c: w2 - wc,
            delta_1: w1 - omega_d,
            delta_2: w2 - omega_d,
            delta_c: wc - omega_d,
        }
    }

    /// `|g_ic / Delta_ic|` for Q1 and Q2.
    pub fn dispersive_ratios(&self) -> [f64; 2] {
        let d = self.detunings(0.0);
        [(self.g1c / d.delta_1c).abs(), (self.g2c / d.delta_2c).abs()]
    }

    pub fn with_g12(mut self, g12: f64) -> Self {
        self.g12 = g12;
        self
    }

    pub fn with_dims(mut self, dims: ModeDims) -> Self {
        self.dims = dims;
        self
    }
}

/// Detunings in GHz. Data-coupler ones are `omega_i - omega_c`,
/// drive ones are `omega_i - omega_d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningSet {
    pub delta_12: f64,
    pub delta_1c: f64,
    pub delta_2c: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_c: f64,
}

/// Time profile of the coupler drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    /// Constant amplitude forever.
    Continuous,
    Pulse(PulseShape),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    /// Drive frequency, GHz.
    pub omega_d: f64,
    /// Peak amplitude, GHz.
    pub amp: f64,
    pub envelope: Envelope,
}

impl DriveParams {
    pub fn continuous(omega_d: f64, amp: f64) -> Self {
        Self {
            omega_d,
            amp,
            envelope: Envelope::Continuous,
        }
    }

    /// Peak amplitude taken from the pulse.
    pub fn pulsed(omega_d: f64, shape: PulseShape) -> Self {
        Self {
            omega_d,
            amp: shape.amplitude,
            envelope: Envelope::Pulse(shape),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amp >= 0.0) || !self.omega_d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "drive amplitude must be >= 0 (got {})",
                self.amp
            )));
        }
        if let Envelope::Pulse(shape) = &self.envelope {
            shape.validate()?;
        }
        Ok(())
    }

    /// Amplitude at time `t` (ns), GHz.
    pub fn amplitude_at(&self, t: f64) -> f64 {
        match &self.envelope {
            Envelope::Continuous => self.amp,
            Envelope::Pulse(shape) => shape.envelope(t),
        }
    }
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Diagonal `sum_i w_i n_i + (a_i/2) n_i (n_i - 1)` with per-mode `w`.
fn diagonal_part(dims: ModeDims, freq: [f64; 3], alpha: [f64; 3]) -> DMatrix<C64> {
    let d = dims.total();
    let mut h = DMatrix::zeros(d, d);
    for (n, label) in dims.labels().enumerate() {
        let mut e = 0.0;
        for m in 0..3 {
            let k = label.occ[m] as f64;
            e += freq[m] * k + 0.5 * alpha[m] * k * (k - 1.0);
        }
        h[(n, n)] = c(TAU * e);
    }
    h
}

/// Exchange couplings `g (a_i^dag a_j + h.c.)` in angular units.
pub fn coupling_part(p: &DeviceParams, include_g12: bool) -> OperatorMatrix {
    let dims = p.dims;
    let lower = |m| site_operator(dims, m, OpKind::Lower);
    let a1 = lower(Mode::Q1);
    let a2 = lower(Mode::Q2);
    let ac = lower(Mode::Coupler);
    let exchange = |x: &OperatorMatrix, y: &OperatorMatrix| {
        let xy = x.adjoint().mul(y);
        xy.add(&xy.adjoint())
    };
    let mut h = exchange(&a1, &ac).scale(TAU * p.g1c);
    h = h.add(&exchange(&a2, &ac).scale(TAU * p.g2c));
    if include_g12 {
        h = h.add(&exchange(&a1, &a2).scale(TAU * p.g12));
    }
    h
}

/// Lab-frame static Hamiltonian, rad/ns.
pub fn build_static_hamiltonian(p: &DeviceParams, include_g12: bool) -> OperatorMatrix {
    let diag = diagonal_part(p.dims, p.omega, p.alpha);
    let h0 = OperatorMatrix::new(p.dims, diag).expect("sized from dims");
    h0.add(&coupling_part(p, include_g12))
}

/// `a_c + a_c^dag` on the product space (dimensionless).
pub fn build_drive_operator(p: &DeviceParams) -> OperatorMatrix {
    let ac = site_operator(p.dims, Mode::Coupler, OpKind::Lower);
    ac.add(&ac.adjoint())
}

/// Static part of the Hamiltonian in the frame rotating at `omega_d` (GHz), rad/ns.
pub fn build_rotating_static(p: &DeviceParams, omega_d: f64) -> OperatorMatrix {
    let shifted = [
        p.omega[0] - omega_d,
        p.omega[1] - omega_d,
        p.omega[2] - omega_d,
    ];
    let diag = diagonal_part(p.dims, shifted, p.alpha);
    let h0 = OperatorMatrix::new(p.dims, diag).expect("sized from dims");
    h0.add(&coupling_part(p, true))
}

/// Drive term in the rotating frame per unit amplitude: `2 pi (a_c + a_c^dag) / 2`.
pub fn rotating_drive_unit(p: &DeviceParams) -> OperatorMatrix {
    build_drive_operator(p).scale(0.5 * TAU)
}

/// Time-independent rotating-frame Hamiltonian at the drive's peak amplitude.
pub fn build_rotating_hamiltonian(p: &DeviceParams, d: &DriveParams) -> OperatorMatrix {
    build_rotating_static(p, d.omega_d).add(&rotating_drive_unit(p).scale(d.amp))
}

/// Bare energy of a label under the diagonal part only, GHz.
pub fn bare_energy(p: &DeviceParams, label: BareLabel) -> f64 {
    (0..3)
        .map(|m| {
            let k = label.occ[m] as f64;
            p.omega[m] * k + 0.5 * p.alpha[m] * k * (k - 1.0)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::total_number;
    use nalgebra::SymmetricEigen;

    fn sorted_eigs(h: &OperatorMatrix) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(h.matrix().clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    }

    #[test]
    fn decoupled_two_level_spectrum_is_sum_of_modes() {
        let mut p = DeviceParams::reference_device();
        p.g1c = 0.0;
        p.g2c = 0.0;
        p.g12 = 0.0;
        p.dims = ModeDims::uniform(2).unwrap();
        let h = build_static_hamiltonian(&p, true);
        let got = sorted_eigs(&h);
        let mut expect = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let e = p.omega[0] * i as f64 + p.omega[1] * j as f64 + p.omega[2] * k as f64;
                    expect.push(TAU * e);
                }
            }
        }
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, e) in got.iter().zip(expect.iter()) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn static_hamiltonian_is_hermitian_and_conserves_excitations() {
        let p = DeviceParams::reference_device();
        let h = build_static_hamiltonian(&p, true);
        assert!(h.hermiticity_residual() < 1e-12);
        let n = total_number(p.dims);
        assert!(h.commutator(&n).frobenius() < 1e-10);
        assert_eq!(h.element(BareLabel::new(0, 0, 0), BareLabel::new(0, 0, 0)).unwrap(), c(0.0));
    }

    #[test]
    fn drive_operator_matches_pauli_x_on_coupler() {
        let mut p = DeviceParams::reference_device();
        p.dims = ModeDims::uniform(2).unwrap();
        let x = build_drive_operator(&p);
        let mut expect = DMatrix::<C64>::zeros(8, 8);
        for n in 0..4 {
            expect[(2 * n, 2 * n + 1)] = c(1.0);
            expect[(2 * n + 1, 2 * n)] = c(1.0);
        }
        assert_eq!(x.matrix(), &expect);
        let p4 = DeviceParams::reference_device();
        let x4 = build_drive_operator(&p4);
        assert!(x4.hermiticity_residual() == 0.0);
        assert_eq!(
            x4.element(BareLabel::new(0, 1, 0), BareLabel::new(0, 1, 1)).unwrap(),
            c(1.0)
        );
    }

    #[test]
    fn rotating_frame_identity_at_zero_drive() {
        let p = DeviceParams::reference_device();
        let d = DriveParams::continuous(0.0, 0.0);
        let hr = build_rotating_hamiltonian(&p, &d);
        let hs = build_static_hamiltonian(&p, true);
        assert!(hr.sub(&hs).frobenius() < 1e-12);
    }

    #[test]
    fn rotating_frame_shifts_by_drive_per_excitation() {
        let mut p = DeviceParams::reference_device();
        p.g1c = 0.0;
        p.g2c = 0.0;
        p.g12 = 0.0;
        let wd = 6.1;
        let hr = build_rotating_hamiltonian(&p, &DriveParams::continuous(wd, 0.0));
        for (n, label) in p.dims.labels().enumerate() {
            let expect = TAU * (bare_energy(&p, label) - wd * label.excitations() as f64);
            assert!((hr.matrix()[(n, n)].re - expect).abs() < 1e-9);
        }
        let n = total_number(p.dims);
        let full = DeviceParams::reference_device();
        let hr0 = build_rotating_hamiltonian(&full, &DriveParams::continuous(wd, 0.0));
        assert!(hr0.commutator(&n).frobenius() < 1e-10);
    }

    #[test]
    fn detunings_are_consistent() {
        let p = DeviceParams::reference_device();
        let d = p.detunings(6.42);
        assert!((d.delta_12 - 0.134).abs() < 1e-12);
        assert!((d.delta_1c - (5.641 - 6.317)).abs() < 1e-12);
        assert!((d.delta_c - (6.317 - 6.42)).abs() < 1e-12);
        let r = p.dispersive_ratios();
        assert!(r[0] < 0.07 && r[1] < 0.04);
    }

    #[test]
    fn negative_amplitude_rejected() {
        assert!(DriveParams::continuous(6.4, -0.01).validate().is_err());
    }
}
