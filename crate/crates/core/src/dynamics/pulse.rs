// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Drive envelopes.

use crate::error::{Error, Result};

/// Default Gaussian edge width, ns.
pub const DEFAULT_SIGMA: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    /// Gaussian rise over `2 sigma`, plateau, Gaussian fall over `2 sigma`.
    FlatTopGaussian,
    /// Flat-top with a zero-length plateau.
    Gaussian,
    /// Constant amplitude over the plateau only.
    Square,
}

/// How the Gaussian edges meet zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeStyle {
    /// Plain Gaussian cut at `2 sigma` from its center: jumps from `A exp(-2)` to 0.
    Truncated,
    /// Gaussian with the cut value subtracted and rescaled, so it starts at 0.
    Lifted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    pub kind: PulseKind,
    /// ns
    pub sigma: f64,
    /// Plateau length, ns.
    pub flat_duration: f64,
    /// Peak amplitude, GHz.
    pub amplitude: f64,
    pub edge: EdgeStyle,
}

impl PulseShape {
    pub fn flat_top(amplitude: f64, flat_duration: f64) -> Self {
        Self {
            kind: PulseKind::FlatTopGaussian,
            sigma: DEFAULT_SIGMA,
            flat_duration,
            amplitude,
            edge: EdgeStyle::Truncated,
        }
    }

    pub fn with_edge(mut self, edge: EdgeStyle) -> Self {
        self.edge = edge;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) {
            return Err(Error::InvalidParameter("pulse amplitude must be >= 0".into()));
        }
        if !(self.flat_duration >= 0.0) {
            return Err(Error::InvalidParameter("plateau length must be >= 0".into()));
        }
        if self.kind != PulseKind::Square && !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter("Gaussian sigma must be > 0".into()));
        }
        Ok(())
    }

    /// Length of one edge, ns.
    pub fn edge_duration(&self) -> f64 {
        match self.kind {
            PulseKind::Square => 0.0,
            _ => 2.0 * self.sigma,
        }
    }

    fn plateau(&self) -> f64 {
        match self.kind {
            PulseKind::Gaussian => 0.0,
            _ => self.flat_duration,
        }
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.edge_duration() + self.plateau()
    }

    /// Start and end of the plateau, ns.
    pub fn plateau_window(&self) -> (f64, f64) {
        let e = self.edge_duration();
        (e, e + self.plateau())
    }

    /// Times where the envelope stops being smooth (inside `[0, duration]`).
    pub fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.plateau_window();
        let mut out = vec![0.0, a, b, self.duration()];
        out.dedup();
        out
    }

    fn edge_value(&self, offset: f64) -> f64 {
        let g = (-offset * offset / (2.0 * self.sigma * self.sigma)).exp();
        match self.edge {
            EdgeStyle::Truncated => self.amplitude * g,
            EdgeStyle::Lifted => {
                let floor = (-2.0f64).exp();
                self.amplitude * ((g - floor) / (1.0 - floor)).max(0.0)
            }
        }
    }

    /// Amplitude at time `t` (ns), GHz. Zero outside `[0, duration)`.
    pub fn envelope(&self, t: f64) -> f64 {
        let total = self.duration();
        if t < 0.0 || t >= total || total == 0.0 {
            return 0.0;
        }
        let (a, b) = self.plateau_window();
        if t < a {
            self.edge_value(t - a)
        } else if t <= b {
            self.amplitude
        } else {
            self.edge_value(t - b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_midpoint_is_full_amplitude() {
        let p = PulseShape::flat_top(0.075, 400.0);
        assert_eq!(p.envelope(20.0 + 200.0), 0.075);
        assert_eq!(p.duration(), 440.0);
    }

    #[test]
    fn truncated_edge_starts_at_exp_minus_two() {
        let p = PulseShape::flat_top(0.075, 400.0);
        assert!((p.envelope(0.0) - 0.075 * (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(p.envelope(-1e-9), 0.0);
        assert_eq!(p.envelope(440.0), 0.0);
    }

    #[test]
    fn lifted_edge_is_continuous() {
        let p = PulseShape::flat_top(0.075, 100.0).with_edge(EdgeStyle::Lifted);
        assert!(p.envelope(0.0).abs() < 1e-15);
        assert!(p.envelope(p.duration() - 1e-9) < 1e-10);
        assert!((p.envelope(20.0) - 0.075).abs() < 1e-15);
    }

    #[test]
    fn envelope_area_below_rectangle() {
        let p = PulseShape::flat_top(0.05, 200.0);
        let n = 24_000;
        let dt = p.duration() / n as f64;
        let area: f64 = (0..n).map(|k| p.envelope((k as f64 + 0.5) * dt) * dt).sum();
        assert!(area < p.amplitude * p.duration());
        for k in 0..n {
            let v = p.envelope(k as f64 * dt);
            assert!((0.0..=p.amplitude).contains(&v));
        }
    }

    #[test]
    fn gaussian_and_square_durations() {
        let mut p = PulseShape::flat_top(0.01, 50.0);
        p.kind = PulseKind::Gaussian;
        assert_eq!(p.duration(), 40.0);
        assert_eq!(p.envelope(20.0), 0.01);
        p.kind = PulseKind::Square;
        assert_eq!(p.duration(), 50.0);
        assert_eq!(p.envelope(0.0), 0.01);
    }
}
