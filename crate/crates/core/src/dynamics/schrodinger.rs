// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-system propagation of states and propagators.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::ode::{solve, OdeOptions};
use super::pulse::{PulseKind, PulseShape};
use super::{StateSample, Trajectory};
use crate::device::{
    build_drive_operator, build_rotating_static, build_static_hamiltonian, rotating_drive_unit, DeviceParams,
    DriveParams, Envelope,
};
use crate::error::{Error, Result};
use crate::linalg::{eigh, Eigh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    /// Full `Omega(t) cos(omega_d t)` drive on the static Hamiltonian.
    Lab,
    /// Frame rotating at the drive frequency, drive in the rotating-wave approximation.
    Rotating,
}

/// `H(t) = H0 + c(t) H1`, integrated in the interaction picture of the
/// diagonal of `H0`: `z = exp(i D t) psi`.
pub(crate) struct Generator {
    h0: DMatrix<C64>,
    h1: DMatrix<C64>,
    diag: Vec<f64>,
    /// `(row, col, -i (H0 - D), -i H1)`
    entries: Vec<(usize, usize, C64, C64)>,
    drive: DriveParams,
    frame: Frame,
}

impl Generator {
    pub fn new(p: &DeviceParams, d: &DriveParams, frame: Frame) -> Self {
        let (h0, h1) = match frame {
            Frame::Rotating => (build_rotating_static(p, d.omega_d), rotating_drive_unit(p)),
            Frame::Lab => (build_static_hamiltonian(p, true), build_drive_operator(p)),
        };
        let (h0, h1) = (h0.into_matrix(), h1.into_matrix());
        let dim = h0.nrows();
        let diag: Vec<f64> = (0..dim).map(|k| h0[(k, k)].re).collect();
        let minus_i = C64::new(0.0, -1.0);
        let mut entries = Vec::new();
        for c in 0..dim {
            for r in 0..dim {
                let a = if r == c { C64::new(0.0, h0[(r, c)].im) } else { h0[(r, c)] };
                let b = h1[(r, c)];
                if a.norm() > 0.0 || b.norm() > 0.0 {
                    entries.push((r, c, minus_i * a, minus_i * b));
                }
            }
        }
        Self {
            h0,
            h1,
            diag,
            entries,
            drive: *d,
            frame,
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Static and unit-drive Hamiltonians, rad/ns.
    pub fn hamiltonians(&self) -> (&DMatrix<C64>, &DMatrix<C64>) {
        (&self.h0, &self.h1)
    }

    pub fn coefficient(&self, t: f64) -> f64 {
        let a = self.drive.amplitude_at(t);
        match self.frame {
            Frame::Rotating => a,
            Frame::Lab => TAU * a * (TAU * self.drive.omega_d * t).cos(),
        }
    }

    /// Interaction-picture derivative for stacked columns.
    pub fn rhs(&self, t: f64, z: &[C64], dz: &mut [C64]) {
        let d = self.dim();
        let coef = self.coefficient(t);
        let ph: Vec<C64> = self.diag.iter().map(|e| C64::from_polar(1.0, e * t)).collect();
        dz.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for &(r, c, a, b) in &self.entries {
            let f = (a + b * coef) * ph[r] * ph[c].conj();
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for (zc, dc) in z.chunks_exact(d).zip(dz.chunks_exact_mut(d)) {
                dc[r] += f * zc[c];
            }
        }
    }

    /// `exp(sign * i D t)` applied to each stacked column.
    fn rotate(&self, t: f64, sign: f64, y: &mut [C64]) {
        let d = self.dim();
        let ph: Vec<C64> = self.diag.iter().map(|e| C64::from_polar(1.0, sign * e * t)).collect();
        for col in y.chunks_exact_mut(d) {
            for (v, p) in col.iter_mut().zip(&ph) {
                *v *= p;
            }
        }
    }

    /// Drive coefficient when it is constant over `[a, b]` in the rotating frame.
    fn constant_coefficient(&self, a: f64, b: f64) -> Option<f64> {
        if self.frame != Frame::Rotating {
            return None;
        }
        match &self.drive.envelope {
            Envelope::Continuous => Some(self.drive.amp),
            Envelope::Pulse(shape) => {
                let (lo, hi) = shape.plateau_window();
                if b <= 0.0 || a >= shape.duration() {
                    Some(0.0)
                } else if a >= lo && b <= hi {
                    Some(shape.amplitude)
                } else {
                    None
                }
            }
        }
    }

    /// Smooth pieces of `[t0, t1]`.
    pub fn segments(&self, t0: f64, t1: f64) -> Vec<(f64, f64)> {
        let mut cuts = vec![t0];
        if let Envelope::Pulse(shape) = &self.drive.envelope {
            for b in shape.breakpoints() {
                if b > t0 && b < t1 {
                    cuts.push(b);
                }
            }
        }
        cuts.push(t1);
        cuts.dedup();
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Integrate stacked columns `y` (length `k * dim`) from `t0` to `t1`, sampling at `t_eval`.
///
/// Segments with a constant rotating-frame Hamiltonian are propagated exactly.
pub(crate) fn integrate_columns(
    gen: &Generator,
    y0: &[C64],
    t0: f64,
    t1: f64,
    t_eval: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<Vec<C64>>, Vec<C64>)> {
    let mut samples = Vec::with_capacity(t_eval.len());
    let mut y = y0.to_vec();
    let mut next = 0;
    while next < t_eval.len() && t_eval[next] <= t0 {
        samples.push(y0.to_vec());
        next += 1;
    }
    for (a, b) in gen.segments(t0, t1) {
        let end = t_eval[next..].iter().take_while(|&&t| t <= b).count();
        let local = &t_eval[next..next + end];
        if let Some(coef) = gen.constant_coefficient(a, b) {
            let h = gen.h0.clone() + gen.h1.clone() * C64::new(coef, 0.0);
            let e = eigh(&h);
            let rot = e.vectors.adjoint();
            let d = gen.dim();
            let start: Vec<DVector<C64>> = y
                .chunks_exact(d)
                .map(|c| &rot * DVector::from_column_slice(c))
                .collect();
            let at = |t: f64| -> Vec<C64> {
                let ph: Vec<C64> = e.values.iter().map(|v| C64::from_polar(1.0, -v * (t - a))).collect();
                let mut out = Vec::with_capacity(y.len());
                for c in &start {
                    let w = DVector::from_iterator(d, c.iter().zip(&ph).map(|(x, p)| x * p));
                    out.extend((&e.vectors * w).iter());
                }
                out
            };
            samples.extend(local.iter().map(|&t| at(t)));
            y = at(b);
        } else {
            let mut z = y;
            gen.rotate(a, 1.0, &mut z);
            let sol = solve(|t, z, dz| gen.rhs(t, z, dz), a, b, &z, local, opts)?;
            for (t, mut s) in local.iter().zip(sol.samples) {
                gen.rotate(*t, -1.0, &mut s);
                samples.push(s);
            }
            y = sol.y_final;
            gen.rotate(b, -1.0, &mut y);
        }
        next += end;
    }
    Ok((samples, y))
}

pub fn evolve_schrodinger(
    p: &DeviceParams,
    d: &DriveParams,
    psi0: &DVector<C64>,
    t_grid: &[f64],
    frame: Frame,
) -> Result<Trajectory> {
    evolve_schrodinger_with(p, d, psi0, t_grid, frame, &OdeOptions::default())
}

/// Propagate `psi0` from `t_grid[0]` and record it at every grid time.
pub fn evolve_schrodinger_with(
    p: &DeviceParams,
    d: &DriveParams,
    psi0: &DVector<C64>,
    t_grid: &[f64],
    frame: Frame,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    d.validate()?;
    let dim = p.dims.total();
    if psi0.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: psi0.len(),
        });
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter("initial state must be normalized".into()));
    }
    let Some((&t0, _)) = t_grid.split_first() else {
        return Ok(Trajectory::from_states(p, Vec::new(), Vec::new()));
    };
    let t1 = *t_grid.last().expect("non-empty");
    let gen = Generator::new(p, d, frame);
    let (samples, _) = integrate_columns(&gen, psi0.as_slice(), t0, t1, t_grid, opts)?;
    let states = samples
        .into_iter()
        .map(|s| StateSample::Pure(DVector::from_vec(s)))
        .collect();
    Ok(Trajectory::from_states(p, t_grid.to_vec(), states))
}

/// Full propagator `U(t1, t0)`.
pub fn propagator(
    p: &DeviceParams,
    d: &DriveParams,
    t0: f64,
    t1: f64,
    frame: Frame,
    opts: &OdeOptions,
) -> Result<DMatrix<C64>> {
    let gen = Generator::new(p, d, frame);
    let dim = gen.dim();
    let id = DMatrix::<C64>::identity(dim, dim);
    let (_, y) = integrate_columns(&gen, id.as_slice(), t0, t1, &[], opts)?;
    Ok(DMatrix::from_vec(dim, dim, y))
}

/// Rotating-frame propagators of a pulse split into rise, plateau and fall.
///
/// The edges only depend on the drive frequency and the edge shape, so one
/// instance serves any plateau length.
#[derive(Debug, Clone)]
pub struct PulsePropagators {
    pub rise: DMatrix<C64>,
    pub fall: DMatrix<C64>,
    plateau: Eigh,
    pub shape: PulseShape,
    pub omega_d: f64,
}

impl PulsePropagators {
    pub fn new(p: &DeviceParams, omega_d: f64, shape: &PulseShape, opts: &OdeOptions) -> Result<Self> {
        shape.validate()?;
        let dim = p.dims.total();
        let edge_shape = PulseShape {
            kind: PulseKind::FlatTopGaussian,
            flat_duration: 0.0,
            ..*shape
        };
        let e = shape.edge_duration();
        let (rise, fall) = if e > 0.0 {
            let d = DriveParams::pulsed(omega_d, edge_shape);
            (
                propagator(p, &d, 0.0, e, Frame::Rotating, opts)?,
                propagator(p, &d, e, 2.0 * e, Frame::Rotating, opts)?,
            )
        } else {
            (DMatrix::identity(dim, dim), DMatrix::identity(dim, dim))
        };
        let h = build_rotating_static(p, omega_d).add(&rotating_drive_unit(p).scale(shape.amplitude));
        Ok(Self {
            rise,
            fall,
            plateau: eigh(h.matrix()),
            shape: *shape,
            omega_d,
        })
    }

    /// Whole-pulse propagator for plateau length `flat` (ns).
    pub fn total(&self, flat: f64) -> DMatrix<C64> {
        let plateau = self.plateau.propagator(flat);
        &self.fall * plateau * &self.rise
    }

    /// Plateau propagator alone.
    pub fn plateau(&self, flat: f64) -> DMatrix<C64> {
        self.plateau.propagator(flat)
    }
}

/// Rotating-frame propagator of a complete pulse.
pub fn pulse_propagator(p: &DeviceParams, omega_d: f64, shape: &PulseShape, opts: &OdeOptions) -> Result<DMatrix<C64>> {
    let flat = match shape.kind {
        PulseKind::Gaussian => 0.0,
        _ => shape.flat_duration,
    };
    Ok(PulsePropagators::new(p, omega_d, shape, opts)?.total(flat))
}
