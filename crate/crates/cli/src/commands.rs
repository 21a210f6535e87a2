// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::TAU;

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cas_core::device::{build_static_hamiltonian, DeviceParams, DriveParams};
use cas_core::dynamics::chevron::chevron_scan;
use cas_core::gates::{calibrate_cz, channel_superoperator, NoiseModel};
use cas_core::dynamics::T2Choice;
use cas_core::spectrum::{
    ac_stark_shift, cas_rate_numeric, design_map, diagonalize_and_label, tunable_zz, zz_strength, MapMode,
    SweepGrid, SweepPlan, ZzMethod,
};
use cas_core::swt::{analytic_cas_rates, analytic_weak_drive_frequencies, SwDecomposition, Transition};
use cas_core::hilbert::ModeDims;

use crate::config::{section, RunConfig, SpectrumSection};
use crate::output::{num, opt, OutputDir};
use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub xi_zz_hz: f64,
    pub xi_zz_without_g12_hz: f64,
    pub xi_0_analytic_hz: f64,
    pub g_eff_ghz: f64,
    pub omega_b_prime_ghz: f64,
    pub omega_r_prime_ghz: f64,
    /// Off-diagonal Frobenius norm left after the second-order transformation, rad/ns.
    pub sw_residual: f64,
}

pub fn spectrum(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), Failure> {
    let p = cfg.device()?;
    let max_exc = cfg
        .spectrum
        .clone()
        .unwrap_or(SpectrumSection { max_excitations: 2 })
        .max_excitations;
    let h = build_static_hamiltonian(&p, true);
    let rows: Vec<Vec<String>> = p
        .dims
        .labels()
        .filter(|l| l.excitations() <= max_exc)
        .map(|l| {
            let bare = cas_core::device::bare_energy(&p, l);
            match diagonalize_and_label(&h, &[l]) {
                Ok(s) => {
                    let a = s.assignments[0];
                    vec![
                        l.to_string(),
                        l.excitations().to_string(),
                        num(s.eigenvalues[a.index] / TAU),
                        num(bare),
                        num(a.overlap),
                        String::new(),
                    ]
                }
                Err(e) => vec![
                    l.to_string(),
                    l.excitations().to_string(),
                    String::new(),
                    num(bare),
                    String::new(),
                    format!("unlabeled: {e}"),
                ],
            }
        })
        .collect();
    out.csv(
        "spectrum.csv",
        &["label", "excitations", "energy_ghz", "bare_energy_ghz", "overlap", "flags"],
        &rows,
    )?;

    let with = zz_strength(&p, true)?;
    let without = zz_strength(&p, false)?;
    let weak = analytic_weak_drive_frequencies(&p)?;
    let report = SpectrumReport {
        xi_zz_hz: with.xi_zz * 1e9,
        xi_zz_without_g12_hz: without.xi_zz * 1e9,
        xi_0_analytic_hz: with.xi_0_analytic * 1e9,
        g_eff_ghz: with.g_eff,
        omega_b_prime_ghz: weak.omega_b_prime,
        omega_r_prime_ghz: weak.omega_r_prime,
        sw_residual: SwDecomposition::from_device(&p, true)?.offdiagonal_residual(),
    };
    info!("static ZZ {:.4} kHz", report.xi_zz_hz * 1e-3);
    out.record("spectrum_report.toml", &report)
}

struct RateRow {
    amp: f64,
    analytic: Option<(f64, f64)>,
    blue: Option<(f64, f64)>,
    red: Option<(f64, f64)>,
    stark: Option<(f64, f64)>,
    errors: Vec<String>,
}

fn rate_row(p: &DeviceParams, amp: f64) -> RateRow {
    let mut errors = Vec::new();
    let mut keep = |r: cas_core::Result<(f64, f64)>, what: &str| match r {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(format!("{what}: {e}"));
            None
        }
    };
    let analytic = keep(
        analytic_cas_rates(p, amp).map(|r| (r.omega_b_rate, r.omega_r_rate)),
        "analytic",
    );
    let numeric = |t: Transition| -> cas_core::Result<(f64, f64)> {
        if amp == 0.0 {
            let w = analytic_weak_drive_frequencies(p)?;
            let at = if t == Transition::Blue { w.omega_b_prime } else { w.omega_r_prime };
            Ok((0.0, at))
        } else {
            cas_rate_numeric(p, amp, t).map(|a| (a.rate, a.omega_resonance))
        }
    };
    let blue = keep(numeric(Transition::Blue), "blue");
    let red = keep(numeric(Transition::Red), "red");
    let stark = match (blue, red) {
        (Some(b), Some(r)) => keep(
            ac_stark_shift(p, &DriveParams::continuous(b.1, amp)).and_then(|sb| {
                ac_stark_shift(p, &DriveParams::continuous(r.1, amp)).map(|sr| (sb.omega_b_tilde, sr.omega_r_tilde))
            }),
            "stark",
        ),
        _ => None,
    };
    RateRow {
        amp,
        analytic,
        blue,
        red,
        stark,
        errors,
    }
}

pub fn cas_rates(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), Failure> {
    let p = cfg.device()?;
    let amps = &section(&cfg.cas_rates, "cas_rates")?.amps_ghz;
    if amps.is_empty() {
        return Err(Failure::Config("cas_rates.amps_ghz is empty".into()));
    }
    if let Some(a) = amps.iter().find(|a| !(**a >= 0.0) || !a.is_finite()) {
        return Err(Failure::Config(format!("cas_rates.amps_ghz: amplitude {a} must be >= 0")));
    }
    let rows: Vec<RateRow> = amps.par_iter().map(|&a| rate_row(&p, a)).collect();
    let mhz = |x: Option<f64>| opt(x.map(|v| v * 1e3));
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            for e in &r.errors {
                warn!("amp {} GHz: {e}", r.amp);
            }
            vec![
                num(r.amp * 1e3),
                mhz(r.analytic.map(|a| a.0)),
                mhz(r.analytic.map(|a| a.1)),
                mhz(r.blue.map(|b| b.0)),
                mhz(r.red.map(|b| b.0)),
                opt(r.blue.map(|b| b.1)),
                opt(r.red.map(|b| b.1)),
                opt(r.stark.map(|s| s.0)),
                opt(r.stark.map(|s| s.1)),
                r.errors.join("; "),
            ]
        })
        .collect();
    out.csv(
        "cas_rates.csv",
        &[
            "amp_mhz",
            "omega_b_analytic_mhz",
            "omega_r_analytic_mhz",
            "omega_b_numeric_mhz",
            "omega_r_numeric_mhz",
            "resonance_blue_ghz",
            "resonance_red_ghz",
            "stark_blue_ghz",
            "stark_red_ghz",
            "error",
        ],
        &table,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChevronSummary {
    pub transition: String,
    pub amp_ghz: f64,
    pub center_ghz: f64,
    /// Numeric anticrossing splitting when the center came from it.
    pub splitting_mhz: Option<f64>,
    pub fitted_frequency_mhz: Option<f64>,
    pub low_confidence: bool,
    pub failed_cells: usize,
}

pub fn chevron(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), Failure> {
    let p = cfg.device()?;
    let sec = section(&cfg.chevron, "chevron")?;
    let deltas = sec.delta_ghz.values("chevron.delta_ghz")?;
    let taus = sec.tau_ns.values("chevron.tau_ns")?;
    if !(sec.amp_ghz > 0.0) {
        return Err(Failure::Config("chevron.amp_ghz must be > 0".into()));
    }
    let transition: Transition = sec.transition.into();
    let (center, splitting) = match sec.center_ghz {
        Some(c) => (c, None),
        None => {
            let a = cas_rate_numeric(&p, sec.amp_ghz, transition)?;
            (a.omega_resonance, Some(a.rate))
        }
    };
    let grid = chevron_scan(&p, sec.amp_ghz, center, &deltas, &taus, transition)?;
    for (r, c, e) in &grid.errors {
        warn!("chevron cell ({r}, {c}): {e}");
    }
    let mut long = Vec::with_capacity(deltas.len() * taus.len());
    for (d, row) in deltas.iter().zip(&grid.populations) {
        for (t, v) in taus.iter().zip(row) {
            long.push(vec![num(d * 1e3), num(*t), num(*v)]);
        }
    }
    out.csv("chevron.csv", &["delta_mhz", "tau_ns", "population"], &long)?;

    let mut header = vec!["delta_mhz\\tau_ns".to_string()];
    header.extend(taus.iter().map(|t| num(*t)));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let dense: Vec<Vec<String>> = deltas
        .iter()
        .zip(&grid.populations)
        .map(|(d, row)| std::iter::once(num(d * 1e3)).chain(row.iter().map(|v| num(*v))).collect())
        .collect();
    out.csv("chevron_matrix.csv", &header, &dense)?;

    let fit = grid.resonant_row().map(|r| grid.fit_row(r));
    let (freq, low) = match fit {
        Some(Ok(f)) => (Some(f.frequency * 1e3), f.low_confidence),
        Some(Err(e)) => {
            warn!("resonant-row fit: {e}");
            (None, true)
        }
        None => (None, true),
    };
    out.record(
        "chevron_summary.toml",
        &ChevronSummary {
            transition: transition.name().to_string(),
            amp_ghz: sec.amp_ghz,
            center_ghz: center,
            splitting_mhz: splitting.map(|s| s * 1e3),
            fitted_frequency_mhz: freq,
            low_confidence: low,
            failed_cells: grid.errors.len(),
        },
    )
}

fn map_rows(g: &SweepGrid) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for (x, col) in g.x_axis.iter().zip(&g.cells) {
        for (y, c) in g.y_axis.iter().zip(col) {
            let mut flags = Vec::new();
            if c.sw_invalid {
                flags.push("sw_invalid".to_string());
            }
            if let Some(e) = &c.error {
                flags.push(format!("error: {e}"));
            }
            rows.push(vec![
                num(*x),
                num(*y),
                opt(c.xi_zz.map(|v| v * 1e9)),
                opt(c.eta),
                flags.join("; "),
            ]);
        }
    }
    rows
}

/// Sign changes of a sampled curve inside one detuning branch, by linear interpolation.
fn zero_crossings(points: &[(f64, f64)]) -> Vec<f64> {
    points
        .windows(2)
        .filter(|w| w[0].0 * w[1].0 > 0.0 && w[0].1 * w[1].1 < 0.0)
        .map(|w| {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            x0 - y0 * (x1 - x0) / (y1 - y0)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivenZzReport {
    pub amp_ghz: f64,
    /// Stark-shifted blue transition the detunings refer to.
    pub center_ghz: f64,
    pub crossings_numeric_mhz: Vec<f64>,
    pub crossings_analytic_mhz: Vec<f64>,
}

pub fn zz_map(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), Failure> {
    let sec = section(&cfg.zz_map, "zz_map")?;
    let xs = sec.x.values("zz_map.x")?;
    let ys = sec.y.values("zz_map.y")?;
    let dims = ModeDims::new(sec.levels).map_err(|e| Failure::Config(format!("zz_map.levels: {e}")))?;
    for (mode, tag) in [(MapMode::CasBlue, "cas_blue"), (MapMode::CrossResonance, "cross_resonance")] {
        for (g12, gtag) in [(true, "with_g12"), (false, "without_g12")] {
            let plan = SweepPlan {
                g12: sec.g12_ghz,
                coupler_offset: sec.coupler_offset_ghz,
                omega_2: sec.omega_2_ghz,
                alpha: sec.alpha_ghz,
                dims,
                ..SweepPlan::map_background(xs.clone(), ys.clone(), mode, g12)
            };
            let grid = design_map(&plan);
            info!("{tag} {gtag}: {} cells with |xi_zz| < 100 kHz", grid.count_below(1e-4));
            out.csv(
                &format!("zz_map_{tag}_{gtag}.csv"),
                &["delta12_over_alpha", "g_over_delta", "xi_zz_hz", "eta", "flags"],
                &map_rows(&grid),
            )?;
        }
    }

    let Some(driven) = &sec.driven else {
        return Ok(());
    };
    let p = cfg.device()?;
    let deltas = driven.delta_ghz.values("zz_map.driven.delta_ghz")?;
    let center = ac_stark_shift(&p, &DriveParams::continuous(analytic_weak_drive_frequencies(&p)?.omega_b_prime, driven.amp_ghz))?
        .omega_b_tilde;
    let curve: Vec<(f64, Option<f64>, Option<f64>, Vec<String>)> = deltas
        .par_iter()
        .map(|&delta| {
            let d = DriveParams::continuous(center + delta, driven.amp_ghz);
            let mut errs = Vec::new();
            let mut take = |r: cas_core::Result<f64>| match r {
                Ok(v) => Some(v),
                Err(e) => {
                    errs.push(e.to_string());
                    None
                }
            };
            let n = take(tunable_zz(&p, &d, ZzMethod::Driven).map(|r| r.xi_zz));
            let a = take(tunable_zz(&p, &d, ZzMethod::Analytic).map(|r| r.xi_zz));
            (delta, n, a, errs)
        })
        .collect();
    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|(delta, n, a, errs)| {
            vec![
                num(delta * 1e3),
                num(center + delta),
                opt(n.map(|v| v * 1e9)),
                opt(a.map(|v| v * 1e9)),
                errs.join("; "),
            ]
        })
        .collect();
    out.csv(
        "driven_zz.csv",
        &["delta_mhz", "omega_d_ghz", "xi_numeric_hz", "xi_analytic_hz", "flags"],
        &rows,
    )?;
    let pick = |f: fn(&(f64, Option<f64>, Option<f64>, Vec<String>)) -> Option<f64>| -> Vec<f64> {
        let pts: Vec<(f64, f64)> = curve.iter().filter_map(|c| f(c).map(|v| (c.0, v))).collect();
        zero_crossings(&pts).into_iter().map(|x| x * 1e3).collect()
    };
    let report = DrivenZzReport {
        amp_ghz: driven.amp_ghz,
        center_ghz: center,
        crossings_numeric_mhz: pick(|c| c.1),
        crossings_analytic_mhz: pick(|c| c.2),
    };
    info!("driven ZZ zero crossings (numeric) at {:?} MHz", report.crossings_numeric_mhz);
    out.record("driven_zz_report.toml", &report)
}

/// Calibrated gate and its fidelities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationRecord {
    pub omega_d: f64,
    pub plateau_ns: f64,
    pub amp: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub fbar_coherent: f64,
    pub fbar_lindblad_ramsey: f64,
    pub fbar_lindblad_echo: f64,
    /// Coherent leakage out of the computational block.
    pub leakage: f64,
    pub leakage_lindblad_ramsey: f64,
    pub leakage_lindblad_echo: f64,
}

impl CalibrationRecord {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Config(e.to_string().trim_end().replace('\n', " ")))
    }
}

pub fn calibrate(cfg: &RunConfig, out: &mut OutputDir) -> Result<(), Failure> {
    let p = cfg.device()?;
    let coherence = cfg.coherence()?;
    let sec = section(&cfg.calibrate_cz, "calibrate_cz")?;
    if !(sec.amp_ghz > 0.0) || !(sec.lindblad_step_ns > 0.0) {
        return Err(Failure::Config("calibrate_cz: amp_ghz and lindblad_step_ns must be > 0".into()));
    }
    let cal = calibrate_cz(&p, sec.amp_ghz)?;
    info!(
        "calibrated: omega_d {:.6} GHz, plateau {:.3} ns, |110> population {:.6}",
        cal.omega_d, cal.plateau, cal.population_110
    );
    let coherent = channel_superoperator(&p, &cal, None, false)?;
    let noisy = |t2| {
        let model = NoiseModel {
            step: sec.lindblad_step_ns,
            ..NoiseModel::new(coherence, t2)
        };
        channel_superoperator(&p, &cal, Some(&model), false)
    };
    let ramsey = noisy(T2Choice::Ramsey)?;
    let echo = noisy(T2Choice::Echo)?;
    let record = CalibrationRecord {
        omega_d: cal.omega_d,
        plateau_ns: cal.plateau,
        amp: cal.amp,
        theta1: cal.local_phases.0,
        theta2: cal.local_phases.1,
        fbar_coherent: coherent.avg_fidelity,
        fbar_lindblad_ramsey: ramsey.avg_fidelity,
        fbar_lindblad_echo: echo.avg_fidelity,
        leakage: coherent.leakage,
        leakage_lindblad_ramsey: ramsey.leakage,
        leakage_lindblad_echo: echo.leakage,
    };
    info!(
        "fidelity: coherent {:.5}, Ramsey {:.5}, echo {:.5}",
        record.fbar_coherent, record.fbar_lindblad_ramsey, record.fbar_lindblad_echo
    );
    out.record("calibration.toml", &record)
}
