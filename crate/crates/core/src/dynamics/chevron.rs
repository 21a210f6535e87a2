// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Drive-detuning by pulse-length population maps.

use rayon::prelude::*;

use super::fit::{fit_oscillation, OscillationFit};
use super::ode::OdeOptions;
use super::pulse::{EdgeStyle, PulseShape};
use super::schrodinger::PulsePropagators;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::hilbert::{basis_state, BareLabel, Mode};
use crate::swt::Transition;

#[derive(Debug, Clone)]
pub struct ChevronGrid {
    pub transition: Transition,
    /// Drive frequency at zero detuning, GHz.
    pub center: f64,
    /// Drive detunings from `center`, GHz (rows).
    pub deltas: Vec<f64>,
    /// Plateau lengths, ns (columns).
    pub taus: Vec<f64>,
    /// `populations[row][col]`; NaN where the cell failed.
    pub populations: Vec<Vec<f64>>,
    /// `(row, col, error)` for every failed cell.
    pub errors: Vec<(usize, usize, Error)>,
}

impl ChevronGrid {
    /// Row whose detuning is closest to zero.
    pub fn resonant_row(&self) -> Option<usize> {
        (0..self.deltas.len()).min_by(|&a, &b| self.deltas[a].abs().total_cmp(&self.deltas[b].abs()))
    }

    pub fn fit_row(&self, row: usize) -> Result<OscillationFit> {
        let y = self
            .populations
            .get(row)
            .ok_or_else(|| Error::InvalidParameter(format!("row {row} out of range")))?;
        fit_oscillation(&self.taus, y)
    }
}

/// Initial state and read-out mode for each transition.
pub fn chevron_setup(transition: Transition) -> (BareLabel, Mode) {
    match transition {
        Transition::Blue => (BareLabel::new(0, 1, 0), Mode::Q2),
        Transition::Red => (BareLabel::new(1, 0, 0), Mode::Q1),
    }
}

pub fn chevron_scan(
    p: &DeviceParams,
    amp: f64,
    center: f64,
    deltas: &[f64],
    taus: &[f64],
    transition: Transition,
) -> Result<ChevronGrid> {
    chevron_scan_with(p, amp, center, deltas, taus, transition, EdgeStyle::Truncated, &OdeOptions::default())
}

/// Flat-top pulse of plateau `tau` at `center + delta`, starting from the
/// transition's initial data-qubit excitation; records the bare-basis
/// probability that the same data qubit is in its first excited level.
#[allow(clippy::too_many_arguments)]
pub fn chevron_scan_with(
    p: &DeviceParams,
    amp: f64,
    center: f64,
    deltas: &[f64],
    taus: &[f64],
    transition: Transition,
    edge: EdgeStyle,
    opts: &OdeOptions,
) -> Result<ChevronGrid> {
    p.validate()?;
    if deltas.is_empty() || taus.is_empty() {
        return Err(Error::InvalidParameter("chevron axes must be non-empty".into()));
    }
    if taus.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParameter("plateau lengths must be >= 0".into()));
    }
    let (start, mode) = chevron_setup(transition);
    let psi0 = basis_state(p.dims, start)?;
    let readout: Vec<usize> = p
        .dims
        .labels()
        .enumerate()
        .filter(|(_, l)| l.occ[mode.index()] == 1)
        .map(|(k, _)| k)
        .collect();
    let shape = PulseShape::flat_top(amp, 0.0).with_edge(edge);

    let rows: Vec<Vec<std::result::Result<f64, Error>>> = deltas
        .par_iter()
        .map(|&delta| match PulsePropagators::new(p, center + delta, &shape, opts) {
            Err(e) => vec![Err(e); taus.len()],
            Ok(props) => {
                let after_rise = &props.rise * &psi0;
                taus.iter()
                    .map(|&tau| {
                        let psi = &props.fall * (props.plateau(tau) * &after_rise);
                        let pop: f64 = readout.iter().map(|&k| psi[k].norm_sqr()).sum();
                        if pop.is_finite() {
                            Ok(pop)
                        } else {
                            Err(Error::ToleranceNotMet { time: tau, step: 0.0 })
                        }
                    })
                    .collect()
            }
        })
        .collect();

    let mut populations = Vec::with_capacity(rows.len());
    let mut errors = Vec::new();
    for (r, row) in rows.into_iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (c, cell) in row.into_iter().enumerate() {
            match cell {
                Ok(v) => out.push(v),
                Err(e) => {
                    out.push(f64::NAN);
                    errors.push((r, c, e));
                }
            }
        }
        populations.push(out);
    }
    Ok(ChevronGrid {
        transition,
        center,
        deltas: deltas.to_vec(),
        taus: taus.to_vec(),
        populations,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::ModeDims;

    #[test]
    fn far_detuned_rows_keep_population() {
        let p = DeviceParams::reference_device().with_dims(ModeDims::uniform(3).unwrap());
        let taus: Vec<f64> = (0..6).map(|k| 100.0 * k as f64).collect();
        let g = chevron_scan(&p, 0.05, 6.43, &[-0.2, 0.2], &taus, Transition::Blue).unwrap();
        assert!(g.errors.is_empty());
        for row in &g.populations {
            for v in row {
                assert!(*v > 0.95 && *v <= 1.0 + 1e-9, "{v}");
            }
        }
    }
}
