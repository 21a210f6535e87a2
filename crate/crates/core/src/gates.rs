// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! CZ gate from a resonant 2π swap round trip: controlled-phase echo
//! measurement, calibration, virtual-Z correction and average gate fidelity.
//!
//! All gate-level quantities live in the dressed basis of the rotating-frame
//! static Hamiltonian; bare label `n` names dressed column `n`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use log::{debug, info};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::device::{build_rotating_static, DeviceParams};
use crate::dynamics::fit::linear_fit;
use crate::dynamics::ode::OdeOptions;
use crate::dynamics::schrodinger::PulsePropagators;
use crate::dynamics::{CoherenceParams, EdgeStyle, PulseShape, SplitLindblad, T2Choice};
use crate::error::{Error, Result};
use crate::hilbert::{BareLabel, Mode};
use crate::spectrum::{cas_rate_numeric, dressed_basis, COMPUTATIONAL, L000, L110};
use crate::swt::Transition;

/// Coupler population above which a swap pulse counts as leaking.
pub const LEAKAGE_LIMIT: f64 = 0.05;
/// Default splitting step for the master equation, ns.
pub const DEFAULT_LINDBLAD_STEP: f64 = 0.5;

/// Wrap into `[0, 2 pi)`.
pub fn wrap_phase(x: f64) -> f64 {
    x.rem_euclid(TAU)
}

/// Wrap into `(-pi, pi]`.
pub fn wrap_symmetric(x: f64) -> f64 {
    let w = wrap_phase(x);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Swap pulse used for the gate: flat top with edges that start from zero.
pub fn cz_pulse(amp: f64, plateau: f64) -> PulseShape {
    PulseShape::flat_top(amp, plateau).with_edge(EdgeStyle::Lifted)
}

/// Integral of the envelope over one edge divided by the peak amplitude, ns.
pub fn edge_area(shape: &PulseShape) -> f64 {
    let e = shape.edge_duration();
    if e == 0.0 || shape.amplitude == 0.0 {
        return 0.0;
    }
    let n = 4000;
    let h = e / n as f64;
    // Simpson on the rising edge.
    let f = |t: f64| shape.envelope(t) / shape.amplitude;
    let mut s = f(0.0) + f(e - 1e-12);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    s * h / 3.0
}

/// Full generalized Rabi cycle at detuning `delta` (GHz) less the edge contributions, ns.
pub fn round_trip_plateau(rate: f64, delta: f64, shape: &PulseShape) -> f64 {
    let cycle = 1.0 / (delta * delta + rate * rate).sqrt();
    (cycle - 2.0 * edge_area(shape)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzCalibration {
    /// GHz
    pub omega_d: f64,
    /// ns
    pub plateau: f64,
    /// GHz
    pub amp: f64,
    /// Single-qubit phases `(theta_1, theta_2)` removed by virtual Z, rad.
    pub local_phases: (f64, f64),
    /// `phi_110 - phi_100 - phi_010 + phi_000` of one pulse, in `[0, 2 pi)`.
    pub predicted_controlled_phase: f64,
    /// Objective at the optimum: `|110>` population after the echo sequence.
    pub population_110: f64,
    pub iterations: usize,
}

impl CzCalibration {
    pub fn shape(&self) -> PulseShape {
        cz_pulse(self.amp, self.plateau)
    }
}

/// Dressed-basis transform and propagators for one drive frequency.
struct DressedPulse {
    w: DMatrix<C64>,
    props: PulsePropagators,
}

impl DressedPulse {
    fn new(p: &DeviceParams, omega_d: f64, amp: f64, opts: &OdeOptions) -> Result<Self> {
        let w = dressed_basis(&build_rotating_static(p, omega_d));
        let props = PulsePropagators::new(p, omega_d, &cz_pulse(amp, 0.0), opts)?;
        Ok(Self { w, props })
    }

    /// `W^dag U W` for a plateau of `flat` ns.
    fn unitary(&self, flat: f64) -> DMatrix<C64> {
        self.w.adjoint() * self.props.total(flat) * &self.w
    }
}

fn index(p: &DeviceParams, label: BareLabel) -> usize {
    p.dims.index_of(label).expect("computational labels fit any valid dims")
}

/// Single-qubit unitary on one data qubit, acting on the dressed computational block.
fn embed_local(p: &DeviceParams, mode: Mode, g: [[C64; 2]; 2]) -> DMatrix<C64> {
    let dim = p.dims.total();
    let mut out = DMatrix::<C64>::identity(dim, dim);
    let m = mode.index();
    for a in COMPUTATIONAL {
        for b in COMPUTATIONAL {
            let other = 1 - m;
            if a.occ[other] != b.occ[other] {
                continue;
            }
            out[(index(p, a), index(p, b))] = g[a.occ[m]][b.occ[m]];
        }
    }
    out
}

fn ry(theta: f64) -> [[C64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [[C64::new(c, 0.0), C64::new(-s, 0.0)], [C64::new(s, 0.0), C64::new(c, 0.0)]]
}

fn rx(theta: f64) -> [[C64; 2]; 2] {
    let (s, c) = (0.5 * theta).sin_cos();
    [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
}

fn rz(theta: f64) -> [[C64; 2]; 2] {
    let z = C64::new(0.0, 0.0);
    [[C64::from_polar(1.0, -0.5 * theta), z], [z, C64::from_polar(1.0, 0.5 * theta)]]
}

/// Echo sequence up to, but excluding, the analysis rotation.
fn jazz_state(p: &DeviceParams, u: &DMatrix<C64>) -> DVector<C64> {
    let dim = p.dims.total();
    let mut psi = DVector::<C64>::zeros(dim);
    psi[index(p, L000)] = C64::new(1.0, 0.0);
    let psi = embed_local(p, Mode::Q2, ry(FRAC_PI_2)) * psi;
    let psi = u * psi;
    let flip = embed_local(p, Mode::Q1, rx(PI)) * embed_local(p, Mode::Q2, rx(PI));
    let psi = flip * psi;
    u * psi
}

fn analyse(p: &DeviceParams, psi: &DVector<C64>, phi: f64) -> DVector<C64> {
    embed_local(p, Mode::Q2, ry(-FRAC_PI_2)) * (embed_local(p, Mode::Q2, rz(-phi)) * psi)
}

fn q2_excited(p: &DeviceParams, psi: &DVector<C64>) -> f64 {
    p.dims
        .labels()
        .enumerate()
        .filter(|(_, l)| l.occ[1] == 1)
        .map(|(k, _)| psi[k].norm_sqr())
        .sum()
}

fn coupler_population(p: &DeviceParams, psi: &DVector<C64>) -> f64 {
    p.dims
        .labels()
        .enumerate()
        .filter(|(_, l)| l.occ[2] > 0)
        .map(|(k, _)| psi[k].norm_sqr())
        .sum()
}

/// Outcome of one echo measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct JazzResult {
    /// Phase of the fitted cosine, in `[0, 2 pi)`.
    pub controlled_phase: f64,
    /// `P(Q2 = 1)` per entry of the phase grid.
    pub signal: Vec<f64>,
    /// Fitted `(offset, cos, sin)` coefficients.
    pub coefficients: [f64; 3],
    /// Largest coupler population after either swap pulse.
    pub coupler_population: f64,
}

/// Controlled phase from the echo sequence with ideal instantaneous rotations.
pub fn simulate_jazz(p: &DeviceParams, omega_d: f64, amp: f64, plateau: f64, phi_grid: &[f64]) -> Result<JazzResult> {
    simulate_jazz_with(p, omega_d, amp, plateau, phi_grid, &OdeOptions::default())
}

pub fn simulate_jazz_with(
    p: &DeviceParams,
    omega_d: f64,
    amp: f64,
    plateau: f64,
    phi_grid: &[f64],
    opts: &OdeOptions,
) -> Result<JazzResult> {
    p.validate()?;
    let pulse = DressedPulse::new(p, omega_d, amp, opts)?;
    jazz_from_unitary(p, &pulse.unitary(plateau), phi_grid)
}

/// Echo measurement given the dressed-basis swap unitary.
pub fn jazz_from_unitary(p: &DeviceParams, u: &DMatrix<C64>, phi_grid: &[f64]) -> Result<JazzResult> {
    if phi_grid.len() < 3 {
        return Err(Error::FitDiverged("phase grid needs at least 3 points".into()));
    }
    let dim = p.dims.total();
    let mut start = DVector::<C64>::zeros(dim);
    start[index(p, L000)] = C64::new(1.0, 0.0);
    let first = u * (embed_local(p, Mode::Q2, ry(FRAC_PI_2)) * start);
    let before = jazz_state(p, u);
    let coupler = coupler_population(p, &first).max(coupler_population(p, &before));
    if coupler > LEAKAGE_LIMIT {
        return Err(Error::LeakageExceeded {
            population: coupler,
            limit: LEAKAGE_LIMIT,
        });
    }
    let signal: Vec<f64> = phi_grid.iter().map(|&phi| q2_excited(p, &analyse(p, &before, phi))).collect();
    let (c, _) = linear_fit(phi_grid, &signal, 1.0).ok_or_else(|| Error::FitDiverged("phase grid is degenerate".into()))?;
    let (a, b) = (c[0], c[1]);
    if a.hypot(b) < 1e-9 {
        return Err(Error::FitDiverged("no phase contrast in the echo signal".into()));
    }
    Ok(JazzResult {
        controlled_phase: wrap_phase((-b).atan2(-a)),
        signal,
        coefficients: [c[2], a, b],
        coupler_population: coupler,
    })
}

/// Diagonal phases `(phi_000, phi_010, phi_100, phi_110)` of a dressed unitary.
pub fn computational_phases(p: &DeviceParams, u: &DMatrix<C64>) -> [f64; 4] {
    COMPUTATIONAL.map(|l| {
        let k = index(p, l);
        u[(k, k)].arg()
    })
}

/// `(theta_1, theta_2, controlled_phase)` of a dressed unitary.
pub fn local_and_controlled_phases(p: &DeviceParams, u: &DMatrix<C64>) -> (f64, f64, f64) {
    let [f00, f01, f10, f11] = computational_phases(p, u);
    (
        wrap_symmetric(f10 - f00),
        wrap_symmetric(f01 - f00),
        wrap_phase(f11 - f10 - f01 + f00),
    )
}

/// Virtual Z correction `exp(-i theta_1 n_1 - i theta_2 n_2)` in the dressed basis.
pub fn virtual_z(p: &DeviceParams, theta: (f64, f64)) -> DMatrix<C64> {
    let d: Vec<C64> = p
        .dims
        .labels()
        .map(|l| C64::from_polar(1.0, -(theta.0 * l.occ[0] as f64 + theta.1 * l.occ[1] as f64)))
        .collect();
    DMatrix::from_diagonal(&DVector::from_vec(d))
}

/// Ideal CZ on the computational block, identity elsewhere.
pub fn ideal_cz(p: &DeviceParams) -> DMatrix<C64> {
    let dim = p.dims.total();
    let mut u = DMatrix::<C64>::identity(dim, dim);
    let k = index(p, L110);
    u[(k, k)] = C64::new(-1.0, 0.0);
    u
}

/// Settings for [`calibrate_cz_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Initial pattern steps: drive frequency (GHz) and plateau (ns).
    pub initial_step: (f64, f64),
    /// Smallest steps before stopping.
    pub min_step: (f64, f64),
    /// Improvements below this count as no progress.
    pub tolerance: f64,
    /// Consecutive iterations without progress before giving up.
    pub patience: usize,
    pub max_iterations: usize,
    pub ode: OdeOptions,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            initial_step: (5e-4, 8.0),
            min_step: (1e-7, 1e-3),
            tolerance: 1e-6,
            patience: 50,
            max_iterations: 400,
            ode: OdeOptions::default(),
        }
    }
}

pub fn calibrate_cz(p: &DeviceParams, amp: f64) -> Result<CzCalibration> {
    calibrate_cz_with(p, amp, &CalibrationOptions::default())
}

/// `|110>` population after the echo sequence with no analysis rotation.
fn objective(p: &DeviceParams, pulse: &DressedPulse, plateau: f64) -> f64 {
    let psi = analyse(p, &jazz_state(p, &pulse.unitary(plateau)), 0.0);
    psi[index(p, L110)].norm_sqr()
}

/// Pattern search over drive frequency and plateau, started from the numeric
/// anticrossing and one full swap cycle.
pub fn calibrate_cz_with(p: &DeviceParams, amp: f64, opts: &CalibrationOptions) -> Result<CzCalibration> {
    p.validate()?;
    let res = cas_rate_numeric(p, amp, Transition::Blue)?;
    let shape = cz_pulse(amp, 0.0);
    let mut wd = res.omega_resonance;
    let mut tau = round_trip_plateau(res.rate, 0.0, &shape);
    info!("calibration start: omega_d = {wd:.8} GHz, plateau = {tau:.3} ns, rate = {:.6} MHz", res.rate * 1e3);

    let mut cache: Vec<(f64, DressedPulse)> = Vec::new();
    let mut eval = |wd: f64, tau: f64| -> Result<f64> {
        if tau < 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        let pos = match cache.iter().position(|(w, _)| *w == wd) {
            Some(k) => k,
            None => {
                if cache.len() > 8 {
                    cache.remove(0);
                }
                cache.push((wd, DressedPulse::new(p, wd, amp, &opts.ode)?));
                cache.len() - 1
            }
        };
        Ok(objective(p, &cache[pos].1, tau))
    };

    // A coarse line search in the plateau alone first; it is cheap.
    let mut best = eval(wd, tau)?;
    for k in -20..=20 {
        let t = tau + 2.0 * k as f64;
        let v = eval(wd, t)?;
        if v > best {
            best = v;
            tau = t;
        }
    }

    let (mut sw, mut st) = opts.initial_step;
    let mut stale = 0;
    let mut iterations = 0;
    while sw > opts.min_step.0 || st > opts.min_step.1 {
        iterations += 1;
        if iterations > opts.max_iterations || stale >= opts.patience {
            return Err(Error::OptimizationStalled { iterations, best });
        }
        let mut moved = false;
        for (dw, dt) in [(sw, 0.0), (-sw, 0.0), (0.0, st), (0.0, -st)] {
            if (dw != 0.0 && sw <= opts.min_step.0) || (dt != 0.0 && st <= opts.min_step.1) {
                continue;
            }
            let v = eval(wd + dw, tau + dt)?;
            if v > best {
                let gain = v - best;
                best = v;
                wd += dw;
                tau += dt;
                moved = true;
                stale = if gain < opts.tolerance { stale + 1 } else { 0 };
                break;
            }
        }
        if !moved {
            sw *= 0.5;
            st *= 0.5;
        }
        debug!("pattern {iterations}: omega_d = {wd:.9}, plateau = {tau:.4}, p110 = {best:.9}");
    }

    let pulse = DressedPulse::new(p, wd, amp, &opts.ode)?;
    let u = pulse.unitary(tau);
    let (t1, t2, cp) = local_and_controlled_phases(p, &u);
    info!("calibrated: omega_d = {wd:.8} GHz, plateau = {tau:.3} ns, p110 = {best:.6}, cp = {cp:.5}");
    Ok(CzCalibration {
        omega_d: wd,
        plateau: tau,
        amp,
        local_phases: (t1, t2),
        predicted_controlled_phase: cp,
        population_110: best,
        iterations,
    })
}

/// Dressed-basis unitary of a calibrated pulse.
pub fn calibrated_unitary(p: &DeviceParams, cal: &CzCalibration, opts: &OdeOptions) -> Result<DMatrix<C64>> {
    Ok(DressedPulse::new(p, cal.omega_d, cal.amp, opts)?.unitary(cal.plateau))
}

/// Channel restricted to computational inputs, composed with the virtual Z
/// correction and the inverse ideal CZ so that a perfect gate is the identity.
#[derive(Debug, Clone)]
pub struct ChannelAnalysis {
    /// Full space dimension.
    pub dim: usize,
    /// Indices of the computational states.
    pub computational: Vec<usize>,
    /// Rank-4 projector onto the computational states.
    pub computational_projector: DMatrix<C64>,
    /// Computational dimension.
    pub d: usize,
    /// `images[a + d b]` is the output for input `|c_a><c_b|`.
    pub images: Vec<DMatrix<C64>>,
    /// Column-stacked `D^2 x D^2` superoperator, when it was assembled.
    pub superoperator: Option<DMatrix<C64>>,
    pub avg_fidelity: f64,
    pub leakage: f64,
}

impl ChannelAnalysis {
    pub fn from_images(dim: usize, computational: Vec<usize>, images: Vec<DMatrix<C64>>) -> Result<Self> {
        let d = computational.len();
        if images.len() != d * d || images.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: images.len(),
            });
        }
        let mut proj = DMatrix::<C64>::zeros(dim, dim);
        for &k in &computational {
            proj[(k, k)] = C64::new(1.0, 0.0);
        }
        let mut out = Self {
            dim,
            computational,
            computational_projector: proj,
            d,
            images,
            superoperator: None,
            avg_fidelity: 0.0,
            leakage: 0.0,
        };
        let (f, l) = average_gate_fidelity(&out);
        out.avg_fidelity = f;
        out.leakage = l;
        Ok(out)
    }

    pub fn image(&self, a: usize, b: usize) -> &DMatrix<C64> {
        &self.images[a + self.d * b]
    }

    /// Output for a `d x d` operator on the computational block.
    pub fn apply(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::<C64>::zeros(self.dim, self.dim);
        for b in 0..self.d {
            for a in 0..self.d {
                if x[(a, b)].norm() > 0.0 {
                    out += self.image(a, b) * x[(a, b)];
                }
            }
        }
        out
    }

    /// Largest `|Tr E(|a><b|) - delta_ab|`.
    pub fn trace_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for b in 0..self.d {
            for a in 0..self.d {
                let t: C64 = (0..self.dim).map(|k| self.image(a, b)[(k, k)]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((t - want).norm());
            }
        }
        worst
    }
}

/// Average gate fidelity with leakage and the leakage itself.
///
/// `F = (sum_ab <a|E(|a><b|)|b> + sum_a Tr[P E(|a><a|)]) / (d (d + 1))`,
/// `L = 1 - Tr[P E(P / d)]`.
pub fn average_gate_fidelity(a: &ChannelAnalysis) -> (f64, f64) {
    let d = a.d;
    let mut overlap = C64::new(0.0, 0.0);
    let mut kept = 0.0;
    for (ib, &kb) in a.computational.iter().enumerate() {
        for (ia, &ka) in a.computational.iter().enumerate() {
            overlap += a.image(ia, ib)[(ka, kb)];
        }
        let img = a.image(ib, ib);
        kept += a.computational.iter().map(|&k| img[(k, k)].re).sum::<f64>();
    }
    let f = (overlap.re + kept) / (d * (d + 1)) as f64;
    (f, 1.0 - kept / d as f64)
}

/// Standard unitary formula on the computational block: `(Tr(M M^dag) + |Tr M|^2) / (d (d + 1))`.
pub fn unitary_block_fidelity(m: &DMatrix<C64>) -> f64 {
    let d = m.nrows() as f64;
    let tr: C64 = (0..m.nrows()).map(|k| m[(k, k)]).sum();
    ((m * m.adjoint()).trace().re + tr.norm_sqr()) / (d * (d + 1.0))
}

/// Noise model for [`channel_superoperator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub coherence: CoherenceParams,
    pub t2: T2Choice,
    /// Operator-splitting step, ns.
    pub step: f64,
}

impl NoiseModel {
    pub fn new(coherence: CoherenceParams, t2: T2Choice) -> Self {
        Self {
            coherence,
            t2,
            step: DEFAULT_LINDBLAD_STEP,
        }
    }
}

/// Gate channel composed with the virtual Z and the inverse ideal CZ.
///
/// Only the `d^2` computational matrix units are propagated. With
/// `full_superoperator` all `D^2` units are propagated as well and the
/// column-stacked superoperator of the uncorrected pulse is stored.
pub fn channel_superoperator(
    p: &DeviceParams,
    cal: &CzCalibration,
    noise: Option<&NoiseModel>,
    full_superoperator: bool,
) -> Result<ChannelAnalysis> {
    let opts = OdeOptions::default();
    let dim = p.dims.total();
    let w = dressed_basis(&build_rotating_static(p, cal.omega_d));
    let correction = ideal_cz(p) * virtual_z(p, cal.local_phases);
    let shape = cal.shape();

    // Pulse map on dressed operators.
    let pulse: Box<dyn Fn(&[DMatrix<C64>]) -> Vec<DMatrix<C64>> + Sync> = match noise {
        None => {
            let u = w.adjoint() * crate::dynamics::pulse_propagator(p, cal.omega_d, &shape, &opts)? * &w;
            Box::new(move |xs: &[DMatrix<C64>]| xs.iter().map(|x| &u * x * u.adjoint()).collect())
        }
        Some(n) => {
            let split = SplitLindblad::new(p, cal.omega_d, &shape, Some((&n.coherence, n.t2)), n.step, &opts)?;
            let w = w.clone();
            Box::new(move |xs: &[DMatrix<C64>]| {
                let bare: Vec<_> = xs.iter().map(|x| &w * x * w.adjoint()).collect();
                split
                    .apply_many(&bare)
                    .into_iter()
                    .map(|r| w.adjoint() * r * &w)
                    .collect()
            })
        }
    };

    let computational: Vec<usize> = COMPUTATIONAL.iter().map(|&l| index(p, l)).collect();
    let d = computational.len();
    let unit = |r: usize, c: usize| {
        let mut m = DMatrix::<C64>::zeros(dim, dim);
        m[(r, c)] = C64::new(1.0, 0.0);
        m
    };
    let inputs: Vec<_> = (0..d * d)
        .map(|k| unit(computational[k % d], computational[k / d]))
        .collect();
    let images: Vec<_> = pulse(&inputs)
        .into_iter()
        .map(|r| &correction * r * correction.adjoint())
        .collect();
    let mut analysis = ChannelAnalysis::from_images(dim, computational, images)?;

    if full_superoperator {
        let all: Vec<_> = (0..dim * dim).map(|k| unit(k % dim, k / dim)).collect();
        let outs = pulse(&all);
        let mut s = DMatrix::<C64>::zeros(dim * dim, dim * dim);
        for (k, o) in outs.iter().enumerate() {
            s.set_column(k, &DVector::from_column_slice(o.as_slice()));
        }
        analysis.superoperator = Some(s);
    }
    Ok(analysis)
}

/// Choi matrix `sum_ab |a><b| (x) E(|a><b|)` of a column-stacked superoperator.
pub fn choi_matrix(s: &DMatrix<C64>, dim: usize) -> DMatrix<C64> {
    let mut c = DMatrix::<C64>::zeros(dim * dim, dim * dim);
    for b in 0..dim {
        for a in 0..dim {
            let col = s.column(a + dim * b);
            for j in 0..dim {
                for i in 0..dim {
                    c[(a * dim + i, b * dim + j)] = col[i + dim * j];
                }
            }
        }
    }
    c
}

/// Fidelities of a calibrated gate without noise and under both T2 choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    pub coherent: f64,
    pub coherent_leakage: f64,
    pub ramsey: f64,
    pub ramsey_leakage: f64,
    pub echo: f64,
    pub echo_leakage: f64,
}

pub fn fidelity_report(p: &DeviceParams, cal: &CzCalibration, coherence: &CoherenceParams) -> Result<FidelityReport> {
    let c = channel_superoperator(p, cal, None, false)?;
    let r = channel_superoperator(p, cal, Some(&NoiseModel::new(*coherence, T2Choice::Ramsey)), false)?;
    let e = channel_superoperator(p, cal, Some(&NoiseModel::new(*coherence, T2Choice::Echo)), false)?;
    Ok(FidelityReport {
        coherent: c.avg_fidelity,
        coherent_leakage: c.leakage,
        ramsey: r.avg_fidelity,
        ramsey_leakage: r.leakage,
        echo: e.avg_fidelity,
        echo_leakage: e.leakage,
    })
}
