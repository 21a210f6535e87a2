// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Sinusoid fits to population series.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// `amplitude * cos(2 pi frequency t + phase) + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationFit {
    /// GHz when `t` is in ns.
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    /// Fewer than three periods inside the series.
    pub low_confidence: bool,
}

/// Linear least squares for `a cos + b sin + c` at fixed angular frequency.
pub(crate) fn linear_fit(t: &[f64], y: &[f64], w: f64) -> Option<([f64; 3], f64)> {
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let f = [(w * ti).cos(), (w * ti).sin(), 1.0];
        for i in 0..3 {
            r[i] += f[i] * yi;
            for j in 0..3 {
                m[i][j] += f[i] * f[j];
            }
        }
    }
    let coef = solve3(m, r)?;
    let sse: f64 = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| {
            let e = coef[0] * (w * ti).cos() + coef[1] * (w * ti).sin() + coef[2] - yi;
            e * e
        })
        .sum();
    Some((coef, sse))
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Option<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|k| m[i][k] * x[k]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    Some(x)
}

/// Least-squares fit of a single sinusoid plus offset.
///
/// The frequency is located on a fine grid up to the sampling limit and then
/// polished by golden-section search; amplitude, phase and offset are linear
/// at each trial frequency.
pub fn fit_oscillation(times: &[f64], series: &[f64]) -> Result<OscillationFit> {
    if times.len() != series.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            found: series.len(),
        });
    }
    if times.len() < 5 {
        return Err(Error::FitDiverged(format!("need at least 5 samples, got {}", times.len())));
    }
    if times.iter().chain(series).any(|v| !v.is_finite()) {
        return Err(Error::FitDiverged("non-finite input".into()));
    }
    let (lo, hi) = times
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(Error::FitDiverged("zero time span".into()));
    }
    let n = times.len();
    let f_max = 0.5 * (n - 1) as f64 / span;
    let df = 0.1 / span;
    let sse_at = |f: f64| linear_fit(times, series, TAU * f).map(|(_, s)| s).unwrap_or(f64::INFINITY);

    let steps = (f_max / df).ceil() as usize;
    let (mut best_f, mut best) = (f64::NAN, f64::INFINITY);
    for k in 1..=steps {
        let f = k as f64 * df;
        let s = sse_at(f);
        if s < best {
            best = s;
            best_f = f;
        }
    }
    if !best.is_finite() {
        return Err(Error::FitDiverged("no frequency gives a solvable fit".into()));
    }

    let (mut a, mut b) = ((best_f - df).max(0.5 * df), best_f + df);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut s1, mut s2) = (sse_at(x1), sse_at(x2));
    for _ in 0..200 {
        if b - a < 1e-12 * best_f.max(1e-300) {
            break;
        }
        if s1 < s2 {
            b = x2;
            x2 = x1;
            s2 = s1;
            x1 = b - g * (b - a);
            s1 = sse_at(x1);
        } else {
            a = x1;
            x1 = x2;
            s1 = s2;
            x2 = a + g * (b - a);
            s2 = sse_at(x2);
        }
    }
    let frequency = 0.5 * (a + b);
    let (coef, sse) = linear_fit(times, series, TAU * frequency)
        .ok_or_else(|| Error::FitDiverged("singular normal equations at optimum".into()))?;
    if !sse.is_finite() {
        return Err(Error::FitDiverged("non-finite residual".into()));
    }
    let amplitude = coef[0].hypot(coef[1]);
    Ok(OscillationFit {
        frequency,
        amplitude,
        phase: (-coef[1]).atan2(coef[0]),
        offset: coef[2],
        rms: (sse / n as f64).sqrt(),
        low_confidence: frequency * span < 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t_end: f64) -> Vec<f64> {
        (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn recovers_noiseless_cosine() {
        let t = grid(301, 2000.0);
        let f0 = 2.2e-3;
        let y: Vec<f64> = t.iter().map(|&x| 0.4 * (TAU * f0 * x + 0.3).cos() + 0.5).collect();
        let fit = fit_oscillation(&t, &y).unwrap();
        assert!((fit.frequency - f0).abs() / f0 < 1e-3);
        assert!((fit.amplitude - 0.4).abs() < 1e-6);
        assert!((fit.phase - 0.3).abs() < 1e-6);
        assert!(!fit.low_confidence);
    }

    #[test]
    fn generalized_rabi_frequency() {
        let (delta, omega): (f64, f64) = (3e-3, 2.2e-3);
        let w = (delta * delta + omega * omega).sqrt();
        let t = grid(401, 2000.0);
        let amp = omega * omega / (w * w);
        let y: Vec<f64> = t.iter().map(|&x| amp * (std::f64::consts::PI * w * x).sin().powi(2)).collect();
        let fit = fit_oscillation(&t, &y).unwrap();
        assert!((fit.frequency - 3.72e-3).abs() / 3.72e-3 < 0.01);
    }

    #[test]
    fn decaying_cosine() {
        let t = grid(401, 2000.0);
        let f0 = 2.2e-3;
        let y: Vec<f64> = t
            .iter()
            .map(|&x| 0.5 + 0.5 * (-x / 20_000.0).exp() * (TAU * f0 * x).cos())
            .collect();
        let fit = fit_oscillation(&t, &y).unwrap();
        assert!((fit.frequency - f0).abs() / f0 < 0.02);
    }

    #[test]
    fn short_series_is_flagged_or_rejected() {
        assert!(matches!(fit_oscillation(&[0.0, 1.0], &[0.0, 1.0]), Err(Error::FitDiverged(_))));
        let t = grid(50, 100.0);
        let y: Vec<f64> = t.iter().map(|&x| (TAU * 0.01 * x).cos()).collect();
        assert!(fit_oscillation(&t, &y).unwrap().low_confidence);
    }
}
