// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Second-order Schrieffer-Wolff reduction of the static chain and the
//! closed-form coupler-assisted swap (CAS) rates.
//!
//! Generators satisfy `[H0, S] + O = 0`, so the frame change is
//! `H -> exp(-S) H exp(S)` and the static part becomes `H0 + D2` at second order.
//! The drive is mapped with the same frame change.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::device::{build_static_hamiltonian, rotating_drive_unit, DeviceParams};
use crate::error::{Error, Result};
use crate::hilbert::{BareLabel, OperatorMatrix};

/// Bare levels closer than this (rad/ns) cannot be connected by the perturbation.
pub const DEGENERACY_GAP: f64 = TAU * 1e-6;

const DIAGONAL_TOL: f64 = 1e-12;

/// Which drive-activated swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transition {
    /// `|010> <-> |101>`
    Blue,
    /// `|100> <-> |011>`
    Red,
}

impl Transition {
    /// (initial, partner) bare states of the swap.
    pub fn pair(self) -> (BareLabel, BareLabel) {
        match self {
            Transition::Blue => (BareLabel::new(0, 1, 0), BareLabel::new(1, 0, 1)),
            Transition::Red => (BareLabel::new(1, 0, 0), BareLabel::new(0, 1, 1)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Transition::Blue => "blue",
            Transition::Red => "red",
        }
    }
}

/// Pieces of the second-order reduction. All matrices in rad/ns.
#[derive(Debug, Clone)]
pub struct SwDecomposition {
    pub h0: OperatorMatrix,
    pub o1: OperatorMatrix,
    pub s1: OperatorMatrix,
    pub s2: OperatorMatrix,
    pub d2: OperatorMatrix,
    pub o2: OperatorMatrix,
}

impl SwDecomposition {
    /// Split `h` into its bare-basis diagonal and off-diagonal parts and solve both orders.
    pub fn from_hamiltonian(h: &OperatorMatrix) -> Result<Self> {
        let h0 = h.diagonal_part();
        let o1 = h.offdiagonal_part();
        let s1 = solve_generator_order1(&h0, &o1)?;
        let (d2, o2, s2) = solve_generator_order2(&h0, &s1, &o1)?;
        Ok(Self {
            h0,
            o1,
            s1,
            s2,
            d2,
            o2,
        })
    }

    pub fn from_device(p: &DeviceParams, include_g12: bool) -> Result<Self> {
        Self::from_hamiltonian(&build_static_hamiltonian(p, include_g12))
    }

    pub fn effective_static(&self) -> OperatorMatrix {
        effective_static_hamiltonian(&self.h0, &self.d2)
    }

    pub fn effective_drive(&self, hd: &OperatorMatrix) -> OperatorMatrix {
        effective_drive(hd, &self.s1, &self.s2)
    }

    /// `H - [S, H] + 1/2 [S, [S, H]]` with `S = S1 + S2`.
    pub fn transformed_hamiltonian(&self) -> OperatorMatrix {
        let h = self.h0.add(&self.o1);
        let s = self.s1.add(&self.s2);
        let sh = s.commutator(&h);
        h.sub(&sh).add(&s.commutator(&sh).scale(0.5))
    }

    /// Frobenius norm of what [`Self::transformed_hamiltonian`] leaves off the diagonal.
    pub fn offdiagonal_residual(&self) -> f64 {
        self.transformed_hamiltonian().offdiagonal_part().frobenius()
    }
}

fn check_diagonal(h0: &OperatorMatrix) -> Result<()> {
    let off = h0.max_offdiagonal();
    if off > DIAGONAL_TOL {
        return Err(Error::InvalidParameter(format!(
            "unperturbed Hamiltonian is not diagonal (largest off-diagonal {off:.3e})"
        )));
    }
    Ok(())
}

/// Resolvent solution of `[H0, S] + O = 0` for diagonal `H0`.
fn resolvent(h0: &OperatorMatrix, o: &OperatorMatrix) -> Result<OperatorMatrix> {
    check_diagonal(h0)?;
    let dims = h0.dims();
    let d = h0.dim();
    let e: Vec<f64> = (0..d).map(|n| h0.matrix()[(n, n)].re).collect();
    let scale = o.matrix().iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let cutoff = 1e-14 * scale;
    let mut s = DMatrix::<C64>::zeros(d, d);
    for n in 0..d {
        for m in 0..d {
            if m == n {
                continue;
            }
            let v = o.matrix()[(m, n)];
            if v.norm() <= cutoff {
                continue;
            }
            let gap = e[n] - e[m];
            if gap.abs() < DEGENERACY_GAP {
                return Err(Error::DegenerateConnectedLevels {
                    row: dims.label_of(m)?,
                    col: dims.label_of(n)?,
                    gap: gap.abs(),
                });
            }
            s[(m, n)] = v / gap;
        }
    }
    OperatorMatrix::new(dims, s)
}

/// First-order generator: `S1_mn = O1_mn / (E_n - E_m)`.
pub fn solve_generator_order1(h0: &OperatorMatrix, o1: &OperatorMatrix) -> Result<OperatorMatrix> {
    resolvent(h0, o1)
}

/// Returns `(D2, O2, S2)` from `C = 1/2 [O1, S1]`.
pub fn solve_generator_order2(
    h0: &OperatorMatrix,
    s1: &OperatorMatrix,
    o1: &OperatorMatrix,
) -> Result<(OperatorMatrix, OperatorMatrix, OperatorMatrix)> {
    let c = o1.commutator(s1).scale(0.5);
    let d2 = c.diagonal_part();
    let o2 = c.offdiagonal_part();
    let s2 = resolvent(h0, &o2)?;
    Ok((d2, o2, s2))
}

pub fn effective_static_hamiltonian(h0: &OperatorMatrix, d2: &OperatorMatrix) -> OperatorMatrix {
    h0.add(d2)
}

/// `Hd - [S1 + S2, Hd] + 1/2 [S1, [S1, Hd]]`.
pub fn effective_drive(hd: &OperatorMatrix, s1: &OperatorMatrix, s2: &OperatorMatrix) -> OperatorMatrix {
    let first = s1.add(s2).commutator(hd);
    let inner = s1.commutator(hd);
    let second = s1.commutator(&inner).scale(0.5);
    hd.sub(&first).add(&second)
}

/// Rate with its sign, GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedRate {
    pub signed: f64,
    pub magnitude: f64,
}

/// `2 <a|H'_d|b> / 2 pi` for the transition pair.
pub fn cas_rate_from_matrix_element(hd_eff: &OperatorMatrix, transition: Transition) -> Result<SignedRate> {
    let (a, b) = transition.pair();
    let z = hd_eff.element(a, b)?;
    Ok(SignedRate {
        signed: 2.0 * z.re / TAU,
        magnitude: 2.0 * z.norm() / TAU,
    })
}

/// Blue and red rates, GHz, sign included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CasRates {
    pub omega_b_rate: f64,
    pub omega_r_rate: f64,
}

/// Rates read from the transformed drive at amplitude `amp` (GHz).
pub fn matrix_element_rates(p: &DeviceParams, amp: f64, include_g12: bool) -> Result<CasRates> {
    let sw = SwDecomposition::from_device(p, include_g12)?;
    let hd = rotating_drive_unit(p).scale(amp);
    let eff = sw.effective_drive(&hd);
    Ok(CasRates {
        omega_b_rate: cas_rate_from_matrix_element(&eff, Transition::Blue)?.signed,
        omega_r_rate: cas_rate_from_matrix_element(&eff, Transition::Red)?.signed,
    })
}

fn nonzero(x: f64, what: &'static str) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        Err(Error::SingularDenominator(what))
    } else {
        Ok(x)
    }
}

/// Closed-form blue and red rates at drive amplitude `amp`, GHz.
pub fn analytic_cas_rates(p: &DeviceParams, amp: f64) -> Result<CasRates> {
    let [w1, w2, wc] = p.omega;
    let ac = p.alpha[2];
    let d12 = nonzero(w1 - w2, "delta_12")?;
    let b1 = nonzero(wc - w1 + ac, "omega_c - omega_1 + alpha_c")?;
    let b2 = nonzero(wc - w2, "omega_c - omega_2")?;
    let r1 = nonzero(wc - w2 + ac, "omega_c - omega_2 + alpha_c")?;
    let r2 = nonzero(wc - w1, "omega_c - omega_1")?;
    let num = 2.0 * p.g1c * p.g2c * ac * amp;
    Ok(CasRates {
        omega_b_rate: num / (d12 * b1 * b2),
        omega_r_rate: -num / (d12 * r1 * r2),
    })
}

/// Swap frequencies in the weak-drive limit, GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakDriveFrequencies {
    pub omega_b_prime: f64,
    pub omega_r_prime: f64,
}

pub fn analytic_weak_drive_frequencies(p: &DeviceParams) -> Result<WeakDriveFrequencies> {
    let [w1, w2, wc] = p.omega;
    let [a1, a2, ac] = p.alpha;
    let d12 = w1 - w2;
    let d1c = nonzero(w1 - wc, "delta_1c")?;
    let d2c = nonzero(w2 - wc, "delta_2c")?;
    let g1 = p.g1c * p.g1c;
    let g2 = p.g2c * p.g2c;
    let blue = wc + d12
        + 2.0 * g1 * (a1 + ac)
            / (nonzero(d1c - ac, "delta_1c - alpha_c")? * nonzero(d1c + a1, "delta_1c + alpha_1")?)
        - 2.0 * g2 / d2c;
    let red = wc - d12
        + 2.0 * g2 * (a2 + ac)
            / (nonzero(d2c - ac, "delta_2c - alpha_c")? * nonzero(d2c + a2, "delta_2c + alpha_2")?)
        - 2.0 * g1 / d1c;
    Ok(WeakDriveFrequencies {
        omega_b_prime: blue,
        omega_r_prime: red,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::ModeDims;

    /// Two coupled two-level modes packed into the Q1/coupler slots with Q2 frozen.
    fn toy() -> (OperatorMatrix, OperatorMatrix) {
        let dims = ModeDims::uniform(2).unwrap();
        let p = DeviceParams {
            omega: [5.0, 7.5, 6.0],
            alpha: [0.0; 3],
            g1c: 0.05,
            g2c: 0.0,
            g12: 0.0,
            dims,
        };
        let h = build_static_hamiltonian(&p, false);
        (h.diagonal_part(), h.offdiagonal_part())
    }

    #[test]
    fn zero_perturbation_gives_zero_generators() {
        let (h0, o1) = toy();
        let zero = o1.scale(0.0);
        let s1 = solve_generator_order1(&h0, &zero).unwrap();
        assert_eq!(s1.frobenius(), 0.0);
        let (d2, o2, s2) = solve_generator_order2(&h0, &s1, &zero).unwrap();
        assert_eq!(d2.frobenius() + o2.frobenius() + s2.frobenius(), 0.0);
    }

    #[test]
    fn toy_generator_and_dispersive_shift() {
        let (h0, o1) = toy();
        let s1 = solve_generator_order1(&h0, &o1).unwrap();
        let q = BareLabel::new(1, 0, 0);
        let cpl = BareLabel::new(0, 0, 1);
        // Hand value: g / (E_coupler - E_q) with g = 0.05, gap = 1 GHz.
        let s = s1.element(q, cpl).unwrap();
        assert!((s.re - 0.05).abs() < 1e-14 && s.im == 0.0);
        assert!(s1.antihermiticity_residual() < 1e-14);
        let (d2, _, _) = solve_generator_order2(&h0, &s1, &o1).unwrap();
        // Level repulsion: g^2 / (omega_q - omega_c) = -2.5 MHz, in rad/ns.
        let shift = d2.element(q, q).unwrap().re / TAU;
        assert!((shift - 0.05 * 0.05 / (5.0 - 6.0)).abs() < 1e-14);
        assert!(d2.max_offdiagonal() == 0.0 && d2.hermiticity_residual() < 1e-12);
    }

    #[test]
    fn degenerate_connected_levels_are_rejected() {
        let dims = ModeDims::uniform(2).unwrap();
        let p = DeviceParams {
            omega: [6.0, 5.0, 6.0],
            alpha: [0.0; 3],
            g1c: 0.05,
            g2c: 0.0,
            g12: 0.0,
            dims,
        };
        let err = SwDecomposition::from_device(&p, false).unwrap_err();
        assert!(matches!(err, Error::DegenerateConnectedLevels { .. }));
    }

    #[test]
    fn device_generators_solve_their_equations() {
        let p = DeviceParams::reference_device();
        let sw = SwDecomposition::from_device(&p, false).unwrap();
        let r1 = sw.h0.commutator(&sw.s1).add(&sw.o1).frobenius() / sw.o1.frobenius();
        assert!(r1 < 1e-9, "{r1}");
        let r2 = sw.h0.commutator(&sw.s2).add(&sw.o2).frobenius() / sw.o2.frobenius().max(1e-300);
        assert!(r2 < 1e-9, "{r2}");
        assert!(sw.s1.antihermiticity_residual() < 1e-10);
        assert!(sw.s2.antihermiticity_residual() < 1e-10);
    }

    #[test]
    fn effective_static_matches_weak_drive_blue_frequency() {
        let p = DeviceParams::reference_device();
        let sw = SwDecomposition::from_device(&p, false).unwrap();
        let h = sw.effective_static();
        let e = |l| h.element(l, l).unwrap().re / TAU;
        let blue = e(BareLabel::new(1, 0, 1)) - e(BareLabel::new(0, 1, 0));
        let red = e(BareLabel::new(0, 1, 1)) - e(BareLabel::new(1, 0, 0));
        let w = analytic_weak_drive_frequencies(&p).unwrap();
        assert!((blue - w.omega_b_prime).abs() < 1e-9, "{blue} {}", w.omega_b_prime);
        assert!((red - w.omega_r_prime).abs() < 1e-9, "{red} {}", w.omega_r_prime);
    }

    #[test]
    fn weak_drive_frequencies_without_coupling() {
        let mut p = DeviceParams::reference_device();
        p.g1c = 0.0;
        p.g2c = 0.0;
        let w = analytic_weak_drive_frequencies(&p).unwrap();
        assert_eq!(w.omega_b_prime, 6.317 + (5.641 - 5.507));
        assert_eq!(w.omega_r_prime, 6.317 - (5.641 - 5.507));
    }

    #[test]
    fn matrix_element_path_matches_closed_form() {
        let p = DeviceParams::reference_device();
        let m = matrix_element_rates(&p, 0.020, false).unwrap();
        let a = analytic_cas_rates(&p, 0.020).unwrap();
        assert!(((m.omega_b_rate - a.omega_b_rate) / a.omega_b_rate).abs() < 0.02);
        assert!(((m.omega_r_rate - a.omega_r_rate) / a.omega_r_rate).abs() < 0.02);
    }

    #[test]
    fn closed_form_rates_vanish_without_coupler_nonlinearity() {
        let mut p = DeviceParams::reference_device();
        p.alpha[2] = 0.0;
        let r = analytic_cas_rates(&p, 0.075).unwrap();
        assert_eq!(r.omega_b_rate, 0.0);
        assert_eq!(r.omega_r_rate, 0.0);
    }

    #[test]
    fn singular_denominator_is_named() {
        let mut p = DeviceParams::reference_device();
        p.omega[1] = p.omega[0];
        assert_eq!(
            analytic_cas_rates(&p, 0.01).unwrap_err(),
            Error::SingularDenominator("delta_12")
        );
    }

    #[test]
    fn zero_drive_gives_zero_matrix_element_rate() {
        let p = DeviceParams::reference_device();
        let sw = SwDecomposition::from_device(&p, false).unwrap();
        let eff = sw.effective_drive(&rotating_drive_unit(&p).scale(0.0));
        assert_eq!(eff.frobenius(), 0.0);
        let r = cas_rate_from_matrix_element(&eff, Transition::Blue).unwrap();
        assert_eq!(r.magnitude, 0.0);
    }
}
