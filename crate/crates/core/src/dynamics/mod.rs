// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Time-domain engine: envelopes, Schrodinger and Lindblad propagation,
//! chevron scans and oscillation fits.

pub mod chevron;
mod dop853_tableau;
pub mod fit;
pub mod lindblad;
pub mod ode;
pub mod pulse;
pub mod schrodinger;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::hilbert::{site_operator, Mode, OpKind, OperatorMatrix};

pub use chevron::{chevron_scan, ChevronGrid};
pub use fit::{fit_oscillation, OscillationFit};
pub use lindblad::{evolve_lindblad, SplitLindblad};
pub use pulse::{EdgeStyle, PulseKind, PulseShape};
pub use schrodinger::{evolve_schrodinger, pulse_propagator, Frame};

/// Coherence times per transmon (Q1, Q2, coupler), microseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceParams {
    pub t1: [f64; 3],
    pub t2_ramsey: [f64; 3],
    pub t2_echo: [f64; 3],
}

impl CoherenceParams {
    /// Measured values for the reference device.
    pub fn reference_device() -> Self {
        Self {
            t1: [95.0, 108.0, 15.0],
            t2_ramsey: [76.0, 81.0, 15.0],
            t2_echo: [88.0, 166.0, 18.0],
        }
    }

    pub fn t2(&self, choice: T2Choice) -> [f64; 3] {
        match choice {
            T2Choice::Ramsey => self.t2_ramsey,
            T2Choice::Echo => self.t2_echo,
        }
    }

    /// Scale the coupler's T1 and both T2 values.
    pub fn with_coupler_scaled(mut self, factor: f64) -> Self {
        self.t1[2] *= factor;
        self.t2_ramsey[2] *= factor;
        self.t2_echo[2] *= factor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.t1.iter().chain(&self.t2_ramsey).chain(&self.t2_echo);
        if all.into_iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidParameter("coherence times must be positive".into()));
        }
        Ok(())
    }

    /// Relaxation and pure-dephasing rates per mode, 1/ns.
    pub fn rates(&self, choice: T2Choice) -> Result<[(f64, f64); 3]> {
        self.validate()?;
        let t2 = self.t2(choice);
        let mut out = [(0.0, 0.0); 3];
        for m in 0..3 {
            let gamma1 = 1.0 / self.t1[m];
            let gphi = 1.0 / t2[m] - 0.5 * gamma1;
            // Exact T2 = 2 T1 can land a few ulps below zero.
            let gphi = if gphi.abs() < 1e-12 * gamma1 { 0.0 } else { gphi };
            if gphi < 0.0 {
                return Err(Error::NegativeDephasing { mode: m, rate: gphi });
            }
            out[m] = (gamma1 * 1e-3, gphi * 1e-3);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T2Choice {
    Ramsey,
    Echo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseKind {
    Relaxation,
    Dephasing,
}

/// Jump operator with its rate folded in: `sqrt(rate) * op`.
#[derive(Debug, Clone)]
pub struct CollapseOperator {
    pub mode: Mode,
    pub kind: CollapseKind,
    /// 1/ns
    pub rate: f64,
    pub op: OperatorMatrix,
}

/// `sqrt(1/T1) a_i` and `sqrt(2 Gamma_phi) n_i` for each transmon.
pub fn collapse_operators(p: &DeviceParams, c: &CoherenceParams, choice: T2Choice) -> Result<Vec<CollapseOperator>> {
    let rates = c.rates(choice)?;
    let mut out = Vec::new();
    for mode in Mode::ALL {
        let (g1, gphi) = rates[mode.index()];
        if g1 > 0.0 {
            out.push(CollapseOperator {
                mode,
                kind: CollapseKind::Relaxation,
                rate: g1,
                op: site_operator(p.dims, mode, OpKind::Lower).scale(g1.sqrt()),
            });
        }
        if gphi > 0.0 {
            out.push(CollapseOperator {
                mode,
                kind: CollapseKind::Dephasing,
                rate: 2.0 * gphi,
                op: site_operator(p.dims, mode, OpKind::Number).scale((2.0 * gphi).sqrt()),
            });
        }
    }
    Ok(out)
}

/// Stored state at one sample time.
#[derive(Debug, Clone)]
pub enum StateSample {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

impl StateSample {
    /// Diagonal in the bare basis.
    pub fn populations(&self) -> Vec<f64> {
        match self {
            StateSample::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            StateSample::Mixed(r) => (0..r.nrows()).map(|k| r[(k, k)].re).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// ns
    pub times: Vec<f64>,
    pub states: Vec<StateSample>,
    /// Bare-state population series, keyed by ket label.
    pub observables: Vec<(String, Vec<f64>)>,
    /// Largest `| ||psi|| - 1 |` or `| Tr rho - 1 |` seen.
    pub norm_error: f64,
    /// Largest Hermiticity defect of a density matrix (0 for pure states).
    pub hermiticity_error: f64,
}

impl Trajectory {
    pub(crate) fn from_states(p: &DeviceParams, times: Vec<f64>, states: Vec<StateSample>) -> Self {
        let d = p.dims.total();
        let mut series = vec![Vec::with_capacity(states.len()); d];
        let mut norm_error = 0.0f64;
        let mut herm = 0.0f64;
        for s in &states {
            let pops = s.populations();
            let total: f64 = pops.iter().sum();
            norm_error = norm_error.max((total - 1.0).abs());
            if let StateSample::Mixed(r) = s {
                herm = herm.max((r - r.adjoint()).norm());
                let tr: C64 = (0..r.nrows()).map(|k| r[(k, k)]).sum();
                norm_error = norm_error.max((tr - 1.0).norm());
            }
            for (k, v) in pops.into_iter().enumerate() {
                series[k].push(v);
            }
        }
        let observables = p
            .dims
            .labels()
            .zip(series)
            .map(|(l, s)| (l.to_string(), s))
            .collect();
        Self {
            times,
            states,
            observables,
            norm_error,
            hermiticity_error: herm,
        }
    }

    pub fn population(&self, key: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_slice())
    }
}
