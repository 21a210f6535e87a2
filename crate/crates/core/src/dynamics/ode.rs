// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive explicit Runge-Kutta 8(5,3) integrator with 7th-order dense output
//! for complex-valued systems `y' = f(t, y)`.

use num_complex::Complex64 as C64;

use super::dop853_tableau::{A, B, C, D, E3, E5, N_STAGES, N_STAGES_EXTENDED};
use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub first_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            max_step: f64::INFINITY,
            first_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub nfev: usize,
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    /// States at the requested sample times, in order.
    pub samples: Vec<Vec<C64>>,
    pub y_final: Vec<C64>,
    pub stats: OdeStats,
}

fn rms_scaled(x: &[C64], scale: &[f64]) -> f64 {
    let s: f64 = x.iter().zip(scale).map(|(v, s)| (v / s).norm_sqr()).sum();
    (s / x.len() as f64).sqrt()
}

struct Workspace {
    k: Vec<Vec<C64>>,
    tmp: Vec<C64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            k: vec![vec![C64::new(0.0, 0.0); n]; N_STAGES_EXTENDED],
            tmp: vec![C64::new(0.0, 0.0); n],
        }
    }
}

/// `tmp = y + h * sum_j a[j] K[j]` for `j < s`.
fn stage_input(ws: &mut Workspace, y: &[C64], a: &[f64; 16], s: usize, h: f64) {
    let (k, tmp) = (&ws.k, &mut ws.tmp);
    tmp.copy_from_slice(y);
    for (j, kj) in k.iter().enumerate().take(s) {
        let c = a[j] * h;
        if c != 0.0 {
            for (t, v) in tmp.iter_mut().zip(kj) {
                *t += v * c;
            }
        }
    }
}

fn select_initial_step<F>(f: &mut F, t0: f64, y0: &[C64], f0: &[C64], opts: &OdeOptions, nfev: &mut usize) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let scale: Vec<f64> = y0.iter().map(|v| opts.atol + v.norm() * opts.rtol).collect();
    let d0 = rms_scaled(y0, &scale);
    let d1 = rms_scaled(f0, &scale);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<C64> = y0.iter().zip(f0).map(|(y, f)| y + f * h0).collect();
    let mut f1 = vec![C64::new(0.0, 0.0); y0.len()];
    f(t0 + h0, &y1, &mut f1);
    *nfev += 1;
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms_scaled(&diff, &scale) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    (100.0 * h0).min(h1)
}

/// Integrate from `t0` to `t1 > t0`, sampling the dense output at `t_eval`
/// (sorted, inside `[t0, t1]`).
pub fn solve<F>(mut f: F, t0: f64, t1: f64, y0: &[C64], t_eval: &[f64], opts: &OdeOptions) -> Result<OdeSolution>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    if !(t1 >= t0) {
        return Err(Error::InvalidParameter(format!("integration span [{t0}, {t1}] is reversed")));
    }
    if t_eval.windows(2).any(|w| w[1] < w[0]) || t_eval.iter().any(|&t| t < t0 || t > t1) {
        return Err(Error::InvalidParameter("sample times must be sorted inside the span".into()));
    }
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut samples = Vec::with_capacity(t_eval.len());
    let mut next_sample = 0;
    while next_sample < t_eval.len() && t_eval[next_sample] <= t0 {
        samples.push(y0.to_vec());
        next_sample += 1;
    }
    if t1 == t0 || n == 0 {
        while next_sample < t_eval.len() {
            samples.push(y0.to_vec());
            next_sample += 1;
        }
        return Ok(OdeSolution {
            samples,
            y_final: y0.to_vec(),
            stats,
        });
    }

    let mut ws = Workspace::new(n);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut fy = vec![C64::new(0.0, 0.0); n];
    f(t, &y, &mut fy);
    stats.nfev += 1;
    let mut h_abs = match opts.first_step {
        Some(h) => h,
        None => select_initial_step(&mut f, t, &y, &fy, opts, &mut stats.nfev),
    }
    .min(opts.max_step);
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    let mut err5 = vec![C64::new(0.0, 0.0); n];
    let mut err3 = vec![C64::new(0.0, 0.0); n];
    let mut scale = vec![0.0; n];

    while t < t1 {
        let min_step = 10.0 * ((t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE));
        h_abs = h_abs.clamp(min_step, opts.max_step.max(min_step));
        let mut rejected = false;
        let (h, t_new) = loop {
            if h_abs < min_step {
                return Err(Error::ToleranceNotMet { time: t, step: h_abs });
            }
            let mut h = h_abs;
            let mut t_new = t + h;
            if t_new > t1 {
                t_new = t1;
                h = t_new - t;
                h_abs = h;
            }
            ws.k[0].copy_from_slice(&fy);
            for s in 1..N_STAGES {
                stage_input(&mut ws, &y, &A[s], s, h);
                let (_, tail) = ws.k.split_at_mut(s);
                f(t + C[s] * h, &ws.tmp, &mut tail[0]);
            }
            stats.nfev += N_STAGES - 1;
            y_new.copy_from_slice(&y);
            for (j, kj) in ws.k.iter().enumerate().take(N_STAGES) {
                let c = B[j] * h;
                for (yn, v) in y_new.iter_mut().zip(kj) {
                    *yn += v * c;
                }
            }
            {
                let (_, tail) = ws.k.split_at_mut(N_STAGES);
                f(t + h, &y_new, &mut tail[0]);
            }
            stats.nfev += 1;

            for i in 0..n {
                scale[i] = opts.atol + y[i].norm().max(y_new[i].norm()) * opts.rtol;
                let mut e5 = C64::new(0.0, 0.0);
                let mut e3 = C64::new(0.0, 0.0);
                for j in 0..=N_STAGES {
                    let kv = ws.k[j][i];
                    e5 += kv * E5[j];
                    e3 += kv * E3[j];
                }
                err5[i] = e5 / scale[i];
                err3[i] = e3 / scale[i];
            }
            let e5n: f64 = err5.iter().map(|v| v.norm_sqr()).sum();
            let e3n: f64 = err3.iter().map(|v| v.norm_sqr()).sum();
            let error_norm = if e5n == 0.0 && e3n == 0.0 {
                0.0
            } else {
                h.abs() * e5n / ((e5n + 0.01 * e3n) * n as f64).sqrt()
            };

            if error_norm < 1.0 {
                let mut factor = if error_norm == 0.0 {
                    MAX_FACTOR
                } else {
                    MAX_FACTOR.min(SAFETY * error_norm.powf(ERROR_EXPONENT))
                };
                if rejected {
                    factor = factor.min(1.0);
                }
                h_abs *= factor;
                stats.accepted += 1;
                break (h, t_new);
            }
            h_abs *= MIN_FACTOR.max(SAFETY * error_norm.powf(ERROR_EXPONENT));
            rejected = true;
            stats.rejected += 1;
        };

        // Dense output only when a sample lies inside (t, t_new].
        if next_sample < t_eval.len() && t_eval[next_sample] <= t_new {
            for s in N_STAGES + 1..N_STAGES_EXTENDED {
                stage_input(&mut ws, &y, &A[s], s, h);
                let (_, tail) = ws.k.split_at_mut(s);
                f(t + C[s] * h, &ws.tmp, &mut tail[0]);
            }
            stats.nfev += N_STAGES_EXTENDED - N_STAGES - 1;
            let fnew = &ws.k[N_STAGES];
            let mut coeffs = vec![vec![C64::new(0.0, 0.0); n]; 7];
            for i in 0..n {
                let dy = y_new[i] - y[i];
                coeffs[0][i] = dy;
                coeffs[1][i] = fy[i] * h - dy;
                coeffs[2][i] = dy * 2.0 - (fnew[i] + fy[i]) * h;
                for r in 0..4 {
                    let mut acc = C64::new(0.0, 0.0);
                    for (j, kj) in ws.k.iter().enumerate() {
                        acc += kj[i] * D[r][j];
                    }
                    coeffs[3 + r][i] = acc * h;
                }
            }
            while next_sample < t_eval.len() && t_eval[next_sample] <= t_new {
                let x = (t_eval[next_sample] - t) / h;
                let mut out = vec![C64::new(0.0, 0.0); n];
                for (k, c) in coeffs.iter().rev().enumerate() {
                    let w = if k % 2 == 0 { x } else { 1.0 - x };
                    for (o, v) in out.iter_mut().zip(c) {
                        *o = (*o + v) * w;
                    }
                }
                for (o, v) in out.iter_mut().zip(&y) {
                    *o += v;
                }
                samples.push(out);
                next_sample += 1;
            }
        }

        t = t_new;
        std::mem::swap(&mut y, &mut y_new);
        fy.copy_from_slice(&ws.k[N_STAGES]);
    }

    Ok(OdeSolution {
        samples,
        y_final: y,
        stats,
    })
}
