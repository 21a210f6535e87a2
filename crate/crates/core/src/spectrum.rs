// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact diagonalization: labeled spectra, ZZ strength, anticrossings,
//! ac Stark shifts and design-space maps.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::device::{
    build_rotating_hamiltonian, build_rotating_static, build_static_hamiltonian, rotating_drive_unit,
    DeviceParams, DriveParams,
};
use crate::error::{Error, Result};
use crate::hilbert::{BareLabel, ModeDims, OperatorMatrix};
use crate::linalg::eigh;
use crate::swt::{analytic_cas_rates, analytic_weak_drive_frequencies, Transition};

const TIE_TOL: f64 = 1e-9;

pub const L000: BareLabel = BareLabel::new(0, 0, 0);
pub const L100: BareLabel = BareLabel::new(1, 0, 0);
pub const L010: BareLabel = BareLabel::new(0, 1, 0);
pub const L110: BareLabel = BareLabel::new(1, 1, 0);

/// Computational states with the coupler in its ground state.
pub const COMPUTATIONAL: [BareLabel; 4] = [L000, L010, L100, L110];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelAssignment {
    pub label: BareLabel,
    pub index: usize,
    /// `|<label|v>|^2`
    pub overlap: f64,
}

/// Eigenpairs (rad/ns, ascending) with the requested bare labels attached.
#[derive(Debug, Clone)]
pub struct LabeledSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
    pub assignments: Vec<LabelAssignment>,
}

impl LabeledSpectrum {
    pub fn index_of(&self, label: BareLabel) -> Option<usize> {
        self.assignments
            .iter()
            .find(|a| a.label == label)
            .map(|a| a.index)
    }

    /// Eigenvalue attached to `label`, rad/ns.
    pub fn energy(&self, label: BareLabel) -> Option<f64> {
        self.index_of(label).map(|k| self.eigenvalues[k])
    }
}

/// Diagonalize `h` and attach each label to the eigenvector it overlaps most.
pub fn diagonalize_and_label(h: &OperatorMatrix, labels: &[BareLabel]) -> Result<LabeledSpectrum> {
    let dims = h.dims();
    let e = eigh(h.matrix());
    let d = h.dim();
    let mut assignments = Vec::with_capacity(labels.len());
    for &label in labels {
        let row = dims.index_of(label)?;
        let mut best = (0usize, -1.0f64);
        let mut second = (0usize, -1.0f64);
        for k in 0..d {
            let w = e.vectors[(row, k)].norm_sqr();
            if w > best.1 {
                second = best;
                best = (k, w);
            } else if w > second.1 {
                second = (k, w);
            }
        }
        if best.1 < 0.5 || best.1 - second.1 < TIE_TOL {
            return Err(Error::LabelAmbiguous {
                label,
                first: best.0,
                second: second.0,
                overlap: best.1,
            });
        }
        if let Some(prev) = assignments.iter().find(|a: &&LabelAssignment| a.index == best.0) {
            return Err(Error::LabelAmbiguous {
                label,
                first: prev.index,
                second: second.0,
                overlap: best.1,
            });
        }
        assignments.push(LabelAssignment {
            label,
            index: best.0,
            overlap: best.1,
        });
    }
    Ok(LabeledSpectrum {
        eigenvalues: e.values,
        eigenvectors: e.vectors,
        assignments,
    })
}

/// Eigenbasis of `h` reordered so column `n` is the state continuously connected to bare
/// state `n`, with the phase fixed so its `n`-th component is real and positive.
///
/// Every bare state gets a column; assignment is greedy on descending overlap.
pub fn dressed_basis(h: &OperatorMatrix) -> DMatrix<C64> {
    let e = eigh(h.matrix());
    let d = h.dim();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d);
    for k in 0..d {
        for n in 0..d {
            pairs.push((e.vectors[(n, k)].norm_sqr(), n, k));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut bare_used = vec![false; d];
    let mut eig_used = vec![false; d];
    let mut w = DMatrix::zeros(d, d);
    let mut left = d;
    for (_, n, k) in pairs {
        if left == 0 {
            break;
        }
        if bare_used[n] || eig_used[k] {
            continue;
        }
        bare_used[n] = true;
        eig_used[k] = true;
        left -= 1;
        let z = e.vectors[(n, k)];
        let phase = if z.norm() > 0.0 { z.conj() / z.norm() } else { C64::new(1.0, 0.0) };
        w.set_column(n, &(e.vectors.column(k) * phase));
    }
    w
}

/// Which ZZ estimate a report carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZzMethod {
    Diagonalization,
    Analytic,
    Driven,
}

/// ZZ values in GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZzReport {
    pub xi_zz: f64,
    pub xi_0_analytic: f64,
    pub g_eff: f64,
    pub method: ZzMethod,
}

fn zz_combination(levels: &LabeledSpectrum) -> f64 {
    let e = |l| levels.energy(l).expect("label requested");
    (e(L110) - e(L100) - e(L010) + e(L000)) / TAU
}

/// `E(110) - E(100) - E(010) + E(000)` of the static chain, coupler in ground.
pub fn zz_strength(p: &DeviceParams, include_g12: bool) -> Result<ZzReport> {
    let h = build_static_hamiltonian(p, include_g12);
    let levels = diagonalize_and_label(&h, &[L000, L100, L010, L110])?;
    let q = if include_g12 { *p } else { p.with_g12(0.0) };
    let (xi0, g_eff) = static_zz_analytic(&q)?;
    Ok(ZzReport {
        xi_zz: zz_combination(&levels),
        xi_0_analytic: xi0,
        g_eff,
        method: ZzMethod::Diagonalization,
    })
}

fn nonzero(x: f64, what: &'static str) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        Err(Error::SingularDenominator(what))
    } else {
        Ok(x)
    }
}

/// Second-order static ZZ and the effective data-data coupling, GHz.
pub fn static_zz_analytic(p: &DeviceParams) -> Result<(f64, f64)> {
    let d = p.detunings(0.0);
    let [a1, a2, _] = p.alpha;
    let g_eff = 0.5 * p.g1c * p.g2c
        * (1.0 / nonzero(d.delta_1c, "delta_1c")? + 1.0 / nonzero(d.delta_2c, "delta_2c")?)
        + p.g12;
    let den = nonzero(d.delta_12 + a1, "delta_12 + alpha_1")? * nonzero(a2 - d.delta_12, "alpha_2 - delta_12")?;
    Ok((2.0 * g_eff * g_eff * (a1 + a2) / den, g_eff))
}

/// Coarse scan and refinement settings for the anticrossing search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnticrossingScan {
    /// Half width of the drive-frequency window, GHz.
    pub half_window: f64,
    pub points: usize,
    /// Final bracket width, GHz.
    pub tolerance: f64,
    /// Window center, GHz. `None` uses the Stark-shifted closed-form estimate.
    pub center: Option<f64>,
}

impl Default for AnticrossingScan {
    fn default() -> Self {
        Self {
            half_window: 0.030,
            points: 201,
            tolerance: 1e-6,
            center: None,
        }
    }
}

/// Minimum splitting (GHz) and where it sits (GHz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anticrossing {
    pub rate: f64,
    pub omega_resonance: f64,
}

/// Gap between the two quasi-energy branches carrying the transition pair, GHz.
pub fn pair_splitting(p: &DeviceParams, amp: f64, omega_d: f64, transition: Transition) -> Result<f64> {
    let h = build_rotating_static(p, omega_d).add(&rotating_drive_unit(p).scale(amp));
    let (a, b) = transition.pair();
    let ia = p.dims.index_of(a)?;
    let ib = p.dims.index_of(b)?;
    let e = eigh(h.matrix());
    let mut top = [(0usize, -1.0f64), (0usize, -1.0f64)];
    for k in 0..h.dim() {
        let w = e.vectors[(ia, k)].norm_sqr() + e.vectors[(ib, k)].norm_sqr();
        if w > top[0].1 {
            top[1] = top[0];
            top[0] = (k, w);
        } else if w > top[1].1 {
            top[1] = (k, w);
        }
    }
    Ok((e.values[top[0].0] - e.values[top[1].0]).abs() / TAU)
}

/// Closed-form estimate of the Stark-shifted transition frequency, GHz.
pub fn shifted_transition_estimate(p: &DeviceParams, amp: f64, transition: Transition) -> Result<f64> {
    let w = analytic_weak_drive_frequencies(p)?;
    let bare = match transition {
        Transition::Blue => w.omega_b_prime,
        Transition::Red => w.omega_r_prime,
    };
    let mut guess = bare;
    for _ in 0..4 {
        match ac_stark_shift(p, &DriveParams::continuous(guess, amp)) {
            Ok(s) => guess = bare + s.delta_c_ac,
            Err(_) => return Ok(bare),
        }
    }
    Ok(guess)
}

pub fn cas_rate_numeric(p: &DeviceParams, amp: f64, transition: Transition) -> Result<Anticrossing> {
    cas_rate_numeric_with(p, amp, transition, &AnticrossingScan::default())
}

/// Scan the drive frequency and return the minimum splitting of the pair's branches.
pub fn cas_rate_numeric_with(
    p: &DeviceParams,
    amp: f64,
    transition: Transition,
    scan: &AnticrossingScan,
) -> Result<Anticrossing> {
    if !(amp > 0.0) {
        return Err(Error::InvalidParameter("anticrossing search needs amp > 0".into()));
    }
    if scan.points < 3 || !(scan.half_window > 0.0) || !(scan.tolerance > 0.0) {
        return Err(Error::InvalidParameter("degenerate anticrossing scan".into()));
    }
    let center = match scan.center {
        Some(c) => c,
        None => shifted_transition_estimate(p, amp, transition)?,
    };
    let start = center - scan.half_window;
    let end = center + scan.half_window;
    let step = (end - start) / (scan.points - 1) as f64;
    let grid: Vec<f64> = (0..scan.points).map(|k| start + step * k as f64).collect();
    let gaps: Vec<f64> = grid
        .par_iter()
        .map(|&w| pair_splitting(p, amp, w, transition))
        .collect::<Result<_>>()?;
    let kmin = gaps
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty scan");
    let (lower, upper) = transition.pair();
    if kmin == 0 || kmin == scan.points - 1 {
        return Err(Error::NoAnticrossing {
            lower,
            upper,
            start,
            end,
        });
    }
    let f = |w: f64| pair_splitting(p, amp, w, transition);
    let (w, gap) = golden_min(f, grid[kmin - 1], grid[kmin + 1], scan.tolerance)?;
    Ok(Anticrossing {
        rate: gap,
        omega_resonance: w,
    })
}

fn golden_min<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Coupler ac Stark shift and the shifted swap frequencies, GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkShift {
    pub delta_c_ac: f64,
    pub omega_b_tilde: f64,
    pub omega_r_tilde: f64,
}

pub fn ac_stark_shift(p: &DeviceParams, d: &DriveParams) -> Result<StarkShift> {
    let ac = p.alpha[2];
    let dc = nonzero(p.omega[2] - d.omega_d, "delta_c")?;
    let dca = nonzero(dc + ac, "delta_c + alpha_c")?;
    let shift = ac * d.amp * d.amp / (2.0 * dc * dca);
    let w = analytic_weak_drive_frequencies(p)?;
    Ok(StarkShift {
        delta_c_ac: shift,
        omega_b_tilde: w.omega_b_prime + shift,
        omega_r_tilde: w.omega_r_prime + shift,
    })
}

/// Drive-tunable ZZ near the blue transition.
pub fn tunable_zz(p: &DeviceParams, d: &DriveParams, method: ZzMethod) -> Result<ZzReport> {
    let (xi0, g_eff) = static_zz_analytic(p)?;
    let xi = match method {
        ZzMethod::Analytic => {
            if d.amp == 0.0 {
                xi0
            } else {
                let wb = ac_stark_shift(p, d)?.omega_b_tilde;
                let delta = nonzero(d.omega_d - wb, "omega_d - omega_b")?;
                let ob = analytic_cas_rates(p, d.amp)?.omega_b_rate;
                xi0 - ob * ob / (8.0 * delta)
            }
        }
        ZzMethod::Driven => {
            let h = build_rotating_hamiltonian(p, d);
            let levels = diagonalize_and_label(&h, &[L000, L100, L010, L110])?;
            zz_combination(&levels)
        }
        ZzMethod::Diagonalization => zz_strength(p, true)?.xi_zz,
    };
    Ok(ZzReport {
        xi_zz: xi,
        xi_0_analytic: xi0,
        g_eff,
        method,
    })
}

/// What the efficiency axis of a design map measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapMode {
    /// `|Omega_b / Omega_d|` from the closed-form blue rate.
    CasBlue,
    /// Cross-resonance efficiency with a linear coupler.
    CrossResonance,
}

/// Grid definition for [`design_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    /// `|Delta_12 / alpha_mean|` values.
    pub x_axis: Vec<f64>,
    /// `|g_ic / Delta_ic|` values, shared by both data qubits.
    pub y_axis: Vec<f64>,
    pub mode: MapMode,
    pub include_g12: bool,
    /// Direct coupling used when `include_g12` is set, GHz.
    pub g12: f64,
    /// `omega_c - omega_1`, GHz.
    pub coupler_offset: f64,
    /// `omega_2`, GHz.
    pub omega_2: f64,
    /// Anharmonicities for [`MapMode::CasBlue`], GHz. Cross-resonance overrides them.
    pub alpha: [f64; 3],
    pub dims: ModeDims,
}

impl SweepPlan {
    pub fn map_background(x_axis: Vec<f64>, y_axis: Vec<f64>, mode: MapMode, include_g12: bool) -> Self {
        Self {
            x_axis,
            y_axis,
            mode,
            include_g12,
            g12: DeviceParams::reference_device().g12,
            coupler_offset: 0.6,
            omega_2: 5.0,
            alpha: [-0.20, -0.20, -0.45],
            dims: ModeDims::default(),
        }
    }

    fn alphas(&self) -> [f64; 3] {
        match self.mode {
            MapMode::CasBlue => self.alpha,
            MapMode::CrossResonance => [-0.3, -0.3, 0.0],
        }
    }

    /// Device at grid point (x, y).
    pub fn device_at(&self, x: f64, y: f64) -> DeviceParams {
        let alpha = self.alphas();
        let a_mean = 0.5 * (alpha[0] + alpha[1]);
        let w1 = self.omega_2 + x * a_mean.abs();
        let wc = w1 + self.coupler_offset;
        DeviceParams {
            omega: [w1, self.omega_2, wc],
            alpha,
            g1c: y * (wc - w1).abs(),
            g2c: y * (wc - self.omega_2).abs(),
            g12: if self.include_g12 { self.g12 } else { 0.0 },
            dims: self.dims,
        }
    }
}

/// Beyond this `|g/Delta|` the perturbative efficiency is not trusted.
pub const SW_VALIDITY_LIMIT: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct MapCell {
    /// GHz, `None` when the point failed.
    pub xi_zz: Option<f64>,
    pub eta: Option<f64>,
    pub sw_invalid: bool,
    pub error: Option<String>,
}

/// Map values indexed `[x][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub x_axis: Vec<f64>,
    pub y_axis: Vec<f64>,
    pub cells: Vec<Vec<MapCell>>,
    pub mode: MapMode,
    pub include_g12: bool,
}

impl SweepGrid {
    pub fn xi_zz(&self) -> Vec<Vec<Option<f64>>> {
        self.cells.iter().map(|r| r.iter().map(|c| c.xi_zz).collect()).collect()
    }

    pub fn eta(&self) -> Vec<Vec<Option<f64>>> {
        self.cells.iter().map(|r| r.iter().map(|c| c.eta).collect()).collect()
    }

    /// Cells whose |xi_zz| (GHz) is below `bound`.
    pub fn count_below(&self, bound: f64) -> usize {
        self.cells
            .iter()
            .flatten()
            .filter(|c| c.xi_zz.is_some_and(|x| x.abs() < bound))
            .count()
    }
}

fn map_cell(plan: &SweepPlan, x: f64, y: f64) -> MapCell {
    let p = plan.device_at(x, y);
    let sw_invalid = y.abs() > SW_VALIDITY_LIMIT;
    let mut error = None;
    let xi_zz = match zz_strength(&p, plan.include_g12) {
        Ok(r) => Some(r.xi_zz),
        Err(e) => {
            error = Some(e.to_string());
            None
        }
    };
    let eta = match plan.mode {
        MapMode::CasBlue => analytic_cas_rates(&p, 1.0).map(|r| r.omega_b_rate.abs()),
        MapMode::CrossResonance => {
            // The efficiency is defined with the coupler-mediated exchange only when
            // g12 is excluded, so it tracks the same switch as the ZZ value.
            static_zz_analytic(&p).and_then(|(_, g_eff)| {
                let d12 = p.omega[0] - p.omega[1];
                let a1 = p.alpha[0];
                let den = d12 * (d12 + a1);
                if den == 0.0 {
                    Err(Error::SingularDenominator("delta_12 (delta_12 + alpha_1)"))
                } else {
                    Ok((2.0 * 2.0 * g_eff * a1 / den).abs())
                }
            })
        }
    };
    let eta = match eta {
        Ok(v) => Some(v),
        Err(e) => {
            error.get_or_insert(e.to_string());
            None
        }
    };
    MapCell {
        xi_zz,
        eta,
        sw_invalid,
        error,
    }
}

/// Static ZZ and drive efficiency over a (detuning, coupling) grid.
pub fn design_map(plan: &SweepPlan) -> SweepGrid {
    let ny = plan.y_axis.len();
    let flat: Vec<MapCell> = (0..plan.x_axis.len() * ny)
        .into_par_iter()
        .map(|n| map_cell(plan, plan.x_axis[n / ny], plan.y_axis[n % ny]))
        .collect();
    let cells = if ny == 0 {
        vec![Vec::new(); plan.x_axis.len()]
    } else {
        flat.chunks(ny).map(|c| c.to_vec()).collect()
    };
    SweepGrid {
        x_axis: plan.x_axis.clone(),
        y_axis: plan.y_axis.clone(),
        cells,
        mode: plan.mode,
        include_g12: plan.include_g12,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_hamiltonian_labels_itself() {
        let p = DeviceParams::reference_device().with_dims(ModeDims::uniform(2).unwrap());
        let mut q = p;
        q.g1c = 0.0;
        q.g2c = 0.0;
        q.g12 = 0.0;
        let h = build_static_hamiltonian(&q, true);
        let labels: Vec<BareLabel> = q.dims.labels().collect();
        let levels = diagonalize_and_label(&h, &labels).unwrap();
        for a in &levels.assignments {
            assert_eq!(a.overlap, 1.0);
            let e = levels.energy(a.label).unwrap();
            let n = q.dims.index_of(a.label).unwrap();
            assert!((e - h.matrix()[(n, n)].re).abs() < 1e-12);
        }
    }

    #[test]
    fn resonant_toy_is_ambiguous() {
        let dims = ModeDims::uniform(2).unwrap();
        let p = DeviceParams {
            omega: [5.0, 7.0, 5.0],
            alpha: [0.0; 3],
            g1c: 0.05,
            g2c: 0.0,
            g12: 0.0,
            dims,
        };
        let h = build_static_hamiltonian(&p, false);
        let err = diagonalize_and_label(&h, &[BareLabel::new(1, 0, 0)]).unwrap_err();
        assert!(matches!(err, Error::LabelAmbiguous { .. }));
    }

    #[test]
    fn coupler_level_near_bare_frequency() {
        let p = DeviceParams::reference_device();
        let h = build_static_hamiltonian(&p, true);
        let c = BareLabel::new(0, 0, 1);
        let levels = diagonalize_and_label(&h, &[L000, c]).unwrap();
        let e = (levels.energy(c).unwrap() - levels.energy(L000).unwrap()) / TAU;
        assert!((e - 6.317).abs() < 0.005, "{e}");
    }

    #[test]
    fn q1_level_matches_dispersive_estimate() {
        let p = DeviceParams::reference_device();
        let h = build_static_hamiltonian(&p, true);
        let levels = diagonalize_and_label(&h, &[L000, L100]).unwrap();
        let e = (levels.energy(L100).unwrap() - levels.energy(L000).unwrap()) / TAU;
        let estimate = p.omega[0] + p.g1c * p.g1c / (p.omega[0] - p.omega[2]);
        assert!((e - estimate).abs() < 0.003, "{e} vs {estimate}");
    }

    #[test]
    fn zz_vanishes_without_any_path() {
        let mut p = DeviceParams::reference_device();
        p.g2c = 0.0;
        p.g12 = 0.0;
        let r = zz_strength(&p, true).unwrap();
        assert!(r.xi_zz.abs() < 1e-10, "{}", r.xi_zz);
        p.g1c = 0.0;
        let r = zz_strength(&p, true).unwrap();
        assert!(r.xi_zz.abs() < 1e-12);
        assert_eq!(r.xi_0_analytic, 0.0);
    }

    #[test]
    fn analytic_zz_zero_cases() {
        let mut p = DeviceParams::reference_device();
        let (_, g) = static_zz_analytic(&p.with_g12(0.0)).unwrap();
        p.g12 = -g;
        let (xi, g_eff) = static_zz_analytic(&p).unwrap();
        assert!(g_eff.abs() < 1e-18 && xi.abs() < 1e-30);
        let mut q = DeviceParams::reference_device();
        q.alpha[0] = 0.0;
        q.alpha[1] = 0.0;
        assert_eq!(static_zz_analytic(&q).unwrap().0, 0.0);
    }

    #[test]
    fn stark_shift_is_quadratic_and_vanishes_at_zero_drive() {
        let p = DeviceParams::reference_device();
        let s0 = ac_stark_shift(&p, &DriveParams::continuous(6.43, 0.0)).unwrap();
        assert_eq!(s0.delta_c_ac, 0.0);
        let w = analytic_weak_drive_frequencies(&p).unwrap();
        assert_eq!(s0.omega_b_tilde, w.omega_b_prime);
        let s1 = ac_stark_shift(&p, &DriveParams::continuous(6.43, 0.03)).unwrap();
        let s2 = ac_stark_shift(&p, &DriveParams::continuous(6.43, 0.06)).unwrap();
        assert!((s2.delta_c_ac - 4.0 * s1.delta_c_ac).abs() < 1e-15);
    }

    #[test]
    fn tunable_zz_reduces_to_static_without_drive() {
        let p = DeviceParams::reference_device();
        let r = tunable_zz(&p, &DriveParams::continuous(6.44, 0.0), ZzMethod::Analytic).unwrap();
        assert_eq!(r.xi_zz, r.xi_0_analytic);
    }

    #[test]
    fn blue_anticrossing_at_moderate_drive() {
        let p = DeviceParams::reference_device();
        let a = cas_rate_numeric(&p, 0.02, Transition::Blue).unwrap();
        let analytic = analytic_cas_rates(&p, 0.02).unwrap().omega_b_rate.abs();
        assert!(((a.rate - analytic) / analytic).abs() < 0.05);
        let est = shifted_transition_estimate(&p, 0.02, Transition::Blue).unwrap();
        assert!((a.omega_resonance - est).abs() < 0.005);
    }

    #[test]
    fn anticrossing_outside_window_is_reported() {
        let p = DeviceParams::reference_device();
        let scan = AnticrossingScan {
            center: Some(6.30),
            ..AnticrossingScan::default()
        };
        let err = cas_rate_numeric_with(&p, 0.02, Transition::Blue, &scan).unwrap_err();
        assert!(matches!(err, Error::NoAnticrossing { .. }));
    }

    #[test]
    fn zero_coupling_column_has_zero_efficiency() {
        let plan = SweepPlan::map_background(vec![2.0, 3.0], vec![0.0], MapMode::CasBlue, false);
        let g = design_map(&plan);
        for row in &g.cells {
            assert_eq!(row[0].eta, Some(0.0));
            assert!(row[0].xi_zz.unwrap().abs() < 1e-12);
        }
    }
}
