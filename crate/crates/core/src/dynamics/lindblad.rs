// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Lindblad master equation.
//!
//! [`evolve_lindblad`] integrates the full generator with the adaptive
//! integrator. [`SplitLindblad`] is a symmetric operator splitting for a fixed
//! pulse: exact unitary steps alternate with exact per-mode dissipator steps,
//! which is much cheaper when many inputs go through the same pulse.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::ode::{solve, OdeOptions};
use super::pulse::{PulseKind, PulseShape};
use super::schrodinger::{Frame, Generator};
use super::{CoherenceParams, CollapseOperator, StateSample, T2Choice, Trajectory};
use crate::device::{build_rotating_static, rotating_drive_unit, DeviceParams, DriveParams};
use crate::error::{Error, Result};
use crate::hilbert::{Mode, ModeDims};
use crate::linalg::{eigh, nearest_unitary, trace};

type Entries = Vec<(usize, usize, C64)>;

fn sparse(m: &DMatrix<C64>) -> Entries {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if m[(r, c)].norm() > 0.0 {
                out.push((r, c, m[(r, c)]));
            }
        }
    }
    out
}

/// `d rho / dt = K rho + rho K^dag + sum L rho L^dag`, `K = -i H - 1/2 sum L^dag L`.
struct LindbladRhs {
    gen: Generator,
    k0: Entries,
    k1: Entries,
    jumps: Vec<Entries>,
    dim: usize,
}

impl LindbladRhs {
    fn new(p: &DeviceParams, d: &DriveParams, frame: Frame, collapse: &[CollapseOperator]) -> Self {
        let gen = Generator::new(p, d, frame);
        let dim = gen.dim();
        let minus_i = C64::new(0.0, -1.0);
        let (h0, h1) = gen.hamiltonians();
        let mut k0 = h0 * minus_i;
        let k1 = h1 * minus_i;
        for l in collapse {
            let m = l.op.matrix();
            k0 -= (m.adjoint() * m).scale(0.5);
        }
        Self {
            gen,
            k0: sparse(&k0),
            k1: sparse(&k1),
            jumps: collapse.iter().map(|l| sparse(l.op.matrix())).collect(),
            dim,
        }
    }

    fn apply(&self, t: f64, rho: &[C64], out: &mut [C64], scratch: &mut [C64]) {
        let d = self.dim;
        let coef = self.gen.coefficient(t);
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        let mut add_k = |r: usize, c: usize, v: C64| {
            let vc = v.conj();
            for j in 0..d {
                out[r + d * j] += v * rho[c + d * j];
            }
            for i in 0..d {
                out[i + d * r] += rho[i + d * c] * vc;
            }
        };
        for &(r, c, v) in &self.k0 {
            add_k(r, c, v);
        }
        if coef != 0.0 {
            for &(r, c, v) in &self.k1 {
                add_k(r, c, v * coef);
            }
        }
        for jump in &self.jumps {
            scratch.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for &(r, c, l) in jump {
                for j in 0..d {
                    scratch[r + d * j] += l * rho[c + d * j];
                }
            }
            for &(r, c, l) in jump {
                let lc = l.conj();
                for i in 0..d {
                    out[i + d * r] += scratch[i + d * c] * lc;
                }
            }
        }
    }
}

pub fn evolve_lindblad(
    p: &DeviceParams,
    d: &DriveParams,
    rho0: &DMatrix<C64>,
    t_grid: &[f64],
    collapse: &[CollapseOperator],
) -> Result<Trajectory> {
    evolve_lindblad_with(p, d, rho0, t_grid, collapse, Frame::Rotating, &OdeOptions::default())
}

/// Integrate the master equation from `t_grid[0]`, recording `rho` at each grid time.
pub fn evolve_lindblad_with(
    p: &DeviceParams,
    d: &DriveParams,
    rho0: &DMatrix<C64>,
    t_grid: &[f64],
    collapse: &[CollapseOperator],
    frame: Frame,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    d.validate()?;
    let dim = p.dims.total();
    if rho0.nrows() != dim || rho0.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho0.nrows(),
        });
    }
    if (trace(rho0) - 1.0).norm() > 1e-10 || (rho0 - rho0.adjoint()).norm() > 1e-10 {
        return Err(Error::InvalidParameter("initial density matrix must be Hermitian with unit trace".into()));
    }
    let Some((&t0, _)) = t_grid.split_first() else {
        return Ok(Trajectory::from_states(p, Vec::new(), Vec::new()));
    };
    let t1 = *t_grid.last().expect("non-empty");
    let rhs = LindbladRhs::new(p, d, frame, collapse);
    let mut scratch = vec![C64::new(0.0, 0.0); dim * dim];
    let mut samples = Vec::with_capacity(t_grid.len());
    let mut y = rho0.as_slice().to_vec();
    let mut next = 0;
    while next < t_grid.len() && t_grid[next] <= t0 {
        samples.push(y.clone());
        next += 1;
    }
    for (a, b) in rhs.gen.segments(t0, t1) {
        let end = t_grid[next..].iter().take_while(|&&t| t <= b).count();
        let local = &t_grid[next..next + end];
        let sol = solve(|t, y, dy| rhs.apply(t, y, dy, &mut scratch), a, b, &y, local, opts)?;
        samples.extend(sol.samples);
        next += end;
        y = sol.y_final;
    }
    let states = samples
        .into_iter()
        .map(|s| StateSample::Mixed(DMatrix::from_vec(dim, dim, s)))
        .collect();
    Ok(Trajectory::from_states(p, t_grid.to_vec(), states))
}

/// Column-stacked generator of one mode's dissipator.
fn local_dissipator(n: usize, gamma1: f64, gamma_phi: f64) -> DMatrix<C64> {
    let mut a = DMatrix::<C64>::zeros(n, n);
    let mut num = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        num[(k, k)] = C64::new(k as f64, 0.0);
        if k > 0 {
            a[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
        }
    }
    let id = DMatrix::<C64>::identity(n, n);
    let term = |l: &DMatrix<C64>, rate: f64| {
        let ll = l.adjoint() * l;
        (l.conjugate().kronecker(l) - id.kronecker(&ll).scale(0.5) - ll.transpose().kronecker(&id).scale(0.5))
            .scale(rate)
    };
    term(&a, gamma1) + term(&num, 2.0 * gamma_phi)
}

fn mode_stride(dims: &ModeDims, mode: Mode) -> usize {
    let [_, d2, dc] = dims.levels();
    match mode {
        Mode::Q1 => d2 * dc,
        Mode::Q2 => dc,
        Mode::Coupler => 1,
    }
}

/// Apply a column-stacked single-mode superoperator `e` to `rho` in place.
fn apply_local(rho: &mut DMatrix<C64>, dims: &ModeDims, mode: Mode, e: &DMatrix<C64>) {
    let n = dims.level(mode);
    let s = mode_stride(dims, mode);
    let total = dims.total();
    let bases: Vec<usize> = (0..total).filter(|&k| (k / s).is_multiple_of(n)).collect();
    let mut block = vec![C64::new(0.0, 0.0); n * n];
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for &cb in &bases {
        for &rb in &bases {
            for b in 0..n {
                for a in 0..n {
                    block[a + n * b] = rho[(rb + a * s, cb + b * s)];
                }
            }
            for (o, row) in out.iter_mut().zip(0..n * n) {
                let mut acc = C64::new(0.0, 0.0);
                for (k, v) in block.iter().enumerate() {
                    acc += e[(row, k)] * v;
                }
                *o = acc;
            }
            for b in 0..n {
                for a in 0..n {
                    rho[(rb + a * s, cb + b * s)] = out[a + n * b];
                }
            }
        }
    }
}

/// One symmetric step: half dissipator, unitary, half dissipator.
#[derive(Debug, Clone)]
struct SplitStep {
    unitary: usize,
    half_diss: usize,
}

/// Operator-split master-equation propagator for one rotating-frame pulse.
#[derive(Debug, Clone)]
pub struct SplitLindblad {
    dims: ModeDims,
    unitaries: Vec<DMatrix<C64>>,
    /// Per entry: one half-step map per mode.
    dissipators: Vec<[DMatrix<C64>; 3]>,
    steps: Vec<SplitStep>,
}

impl SplitLindblad {
    /// Build the step sequence for `shape` at `omega_d` with target step `step` (ns).
    pub fn new(
        p: &DeviceParams,
        omega_d: f64,
        shape: &PulseShape,
        coherence: Option<(&CoherenceParams, T2Choice)>,
        step: f64,
        opts: &OdeOptions,
    ) -> Result<Self> {
        shape.validate()?;
        if !(step > 0.0) {
            return Err(Error::InvalidParameter("split step must be > 0".into()));
        }
        let dims = p.dims;
        let rates = match coherence {
            Some((c, choice)) => c.rates(choice)?,
            None => [(0.0, 0.0); 3],
        };
        let half_maps = |h: f64| -> [DMatrix<C64>; 3] {
            let m = |mode: Mode| {
                let (g1, gp) = rates[mode.index()];
                (local_dissipator(dims.level(mode), g1, gp) * C64::new(0.5 * h, 0.0)).exp()
            };
            [m(Mode::Q1), m(Mode::Q2), m(Mode::Coupler)]
        };

        let mut unitaries = Vec::new();
        let mut dissipators = Vec::new();
        let mut steps = Vec::new();

        let edge = shape.edge_duration();
        let plateau = match shape.kind {
            PulseKind::Gaussian => 0.0,
            _ => shape.flat_duration,
        };
        let edge_steps = (edge / step).ceil() as usize;
        // Rise and fall, sampled at substep boundaries of one dense-output solve each.
        let edge_units = |t_start: f64| -> Result<Vec<DMatrix<C64>>> {
            if edge_steps == 0 {
                return Ok(Vec::new());
            }
            let h = edge / edge_steps as f64;
            let edge_shape = PulseShape {
                kind: PulseKind::FlatTopGaussian,
                flat_duration: 0.0,
                ..*shape
            };
            let d = DriveParams::pulsed(omega_d, edge_shape);
            let gen = Generator::new(p, &d, Frame::Rotating);
            let dim = gen.dim();
            let times: Vec<f64> = (1..=edge_steps).map(|k| t_start + h * k as f64).collect();
            let id = DMatrix::<C64>::identity(dim, dim);
            let (samples, _) =
                super::schrodinger::integrate_columns(&gen, id.as_slice(), t_start, t_start + edge, &times, opts)?;
            let mut prev = id;
            let mut out = Vec::with_capacity(edge_steps);
            for s in samples {
                let u = DMatrix::from_vec(dim, dim, s);
                // Remove the integrator's small non-unitary drift so the products stay trace preserving.
                out.push(nearest_unitary(&(&u * prev.adjoint())));
                prev = u;
            }
            Ok(out)
        };
        let rise = edge_units(0.0)?;
        let fall = edge_units(edge)?;

        if !rise.is_empty() {
            dissipators.push(half_maps(edge / edge_steps as f64));
        }
        let edge_diss = dissipators.len().saturating_sub(1);
        for u in rise {
            unitaries.push(u);
            steps.push(SplitStep {
                unitary: unitaries.len() - 1,
                half_diss: edge_diss,
            });
        }
        if plateau > 0.0 {
            let n = (plateau / step).ceil().max(1.0) as usize;
            let h = plateau / n as f64;
            let hp = build_rotating_static(p, omega_d).add(&rotating_drive_unit(p).scale(shape.amplitude));
            unitaries.push(eigh(hp.matrix()).propagator(h));
            dissipators.push(half_maps(h));
            let (u, dd) = (unitaries.len() - 1, dissipators.len() - 1);
            for _ in 0..n {
                steps.push(SplitStep {
                    unitary: u,
                    half_diss: dd,
                });
            }
        }
        for u in fall {
            unitaries.push(u);
            steps.push(SplitStep {
                unitary: unitaries.len() - 1,
                half_diss: edge_diss,
            });
        }
        Ok(Self {
            dims,
            unitaries,
            dissipators,
            steps,
        })
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    fn dissipate(&self, rho: &mut DMatrix<C64>, which: usize) {
        for (k, mode) in Mode::ALL.into_iter().enumerate() {
            apply_local(rho, &self.dims, mode, &self.dissipators[which][k]);
        }
    }

    /// Push one operator (not necessarily a state) through the pulse.
    pub fn apply(&self, rho0: &DMatrix<C64>) -> DMatrix<C64> {
        let mut rho = rho0.clone();
        let mut pending: Option<usize> = None;
        for st in &self.steps {
            // Adjacent half steps with the same map merge into a full one only
            // when the maps commute, which they do (same generator).
            match pending {
                Some(prev) if prev == st.half_diss => {
                    self.dissipate(&mut rho, prev);
                    self.dissipate(&mut rho, prev);
                }
                Some(prev) => {
                    self.dissipate(&mut rho, prev);
                    self.dissipate(&mut rho, st.half_diss);
                }
                None => self.dissipate(&mut rho, st.half_diss),
            }
            let u = &self.unitaries[st.unitary];
            rho = u * rho * u.adjoint();
            pending = Some(st.half_diss);
        }
        if let Some(prev) = pending {
            self.dissipate(&mut rho, prev);
        }
        rho
    }

    /// [`Self::apply`] over many inputs, results in input order.
    pub fn apply_many(&self, inputs: &[DMatrix<C64>]) -> Vec<DMatrix<C64>> {
        inputs.par_iter().map(|r| self.apply(r)).collect()
    }
}
