// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: one TOML file per run holds every physical input.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cas_core::device::DeviceParams;
use cas_core::dynamics::CoherenceParams;
use cas_core::hilbert::ModeDims;
use cas_core::swt::Transition;

use crate::Failure;

/// Configs shipped with the binary, selectable by name.
pub const BUILTIN: [(&str, &str); 2] = [
    ("reference-device", include_str!("../configs/reference-device.toml")),
    ("map-background", include_str!("../configs/map-background.toml")),
];

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Used when `--out` is not given.
    pub output_dir: Option<PathBuf>,
    /// Recorded in the manifest; seeds any randomized check.
    #[serde(default)]
    pub seed: u64,
    pub device: Option<DeviceSection>,
    pub coherence: Option<CoherenceSection>,
    pub spectrum: Option<SpectrumSection>,
    pub cas_rates: Option<CasRatesSection>,
    pub chevron: Option<ChevronSection>,
    pub zz_map: Option<ZzMapSection>,
    pub calibrate_cz: Option<CalibrateSection>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceSection {
    /// (Q1, Q2, coupler)
    pub omega_ghz: [f64; 3],
    pub alpha_ghz: [f64; 3],
    pub g1c_ghz: f64,
    pub g2c_ghz: f64,
    #[serde(default)]
    pub g12_ghz: f64,
    #[serde(default = "default_levels")]
    pub levels: [usize; 3],
}

fn default_levels() -> [usize; 3] {
    [4, 4, 4]
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceSection {
    pub t1_us: [f64; 3],
    pub t2_ramsey_us: [f64; 3],
    pub t2_echo_us: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Largest total excitation number among the reported levels.
    #[serde(default = "default_excitations")]
    pub max_excitations: usize,
}

fn default_excitations() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CasRatesSection {
    pub amps_ghz: Vec<f64>,
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self, name: &str) -> Result<Vec<f64>, Failure> {
        if self.points == 0 {
            return Err(Failure::Config(format!("`{name}` has no points")));
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Failure::Config(format!("`{name}` bounds must be finite")));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points).map(|k| self.start + step * k as f64).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionName {
    Blue,
    Red,
}

impl From<TransitionName> for Transition {
    fn from(t: TransitionName) -> Self {
        match t {
            TransitionName::Blue => Transition::Blue,
            TransitionName::Red => Transition::Red,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChevronSection {
    pub amp_ghz: f64,
    #[serde(default = "default_transition")]
    pub transition: TransitionName,
    /// Zero-detuning drive frequency; the numeric anticrossing when absent.
    pub center_ghz: Option<f64>,
    pub delta_ghz: Axis,
    pub tau_ns: Axis,
}

fn default_transition() -> TransitionName {
    TransitionName::Blue
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ZzMapSection {
    /// `|Delta_12 / alpha|`
    pub x: Axis,
    /// `|g / Delta|`
    pub y: Axis,
    #[serde(default = "default_map_g12")]
    pub g12_ghz: f64,
    #[serde(default = "default_omega_2")]
    pub omega_2_ghz: f64,
    #[serde(default = "default_offset")]
    pub coupler_offset_ghz: f64,
    /// Anharmonicities of the swap-gate maps; the cross-resonance maps use their own.
    #[serde(default = "default_map_alpha")]
    pub alpha_ghz: [f64; 3],
    #[serde(default = "default_levels")]
    pub levels: [usize; 3],
    /// Driven-ZZ detuning scan on the `[device]`, run when present.
    pub driven: Option<DrivenZzSection>,
}

fn default_map_g12() -> f64 {
    0.0018
}
fn default_omega_2() -> f64 {
    5.0
}
fn default_offset() -> f64 {
    0.6
}
fn default_map_alpha() -> [f64; 3] {
    [-0.20, -0.20, -0.45]
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DrivenZzSection {
    pub amp_ghz: f64,
    /// Detuning from the Stark-shifted blue transition.
    pub delta_ghz: Axis,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateSection {
    pub amp_ghz: f64,
    #[serde(default = "default_step")]
    pub lindblad_step_ns: f64,
}

fn default_step() -> f64 {
    cas_core::gates::DEFAULT_LINDBLAD_STEP
}

/// Raw text and where it came from.
#[derive(Debug, Clone)]
pub struct ConfigSource {
    pub text: String,
    pub origin: String,
}

/// A file path, or the name of a built-in config when no such file exists.
pub fn read_source(source: &Path) -> Result<ConfigSource, Failure> {
    if !source.exists() {
        if let Some((name, text)) = BUILTIN.iter().find(|(n, _)| Path::new(n) == source) {
            return Ok(ConfigSource {
                text: text.to_string(),
                origin: format!("builtin:{name}"),
            });
        }
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", source.display())))?;
    Ok(ConfigSource {
        text,
        origin: source.display().to_string(),
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Config(e.to_string().trim_end().replace('\n', " ")))
    }

    pub fn device(&self) -> Result<DeviceParams, Failure> {
        let d = self
            .device
            .as_ref()
            .ok_or_else(|| Failure::Config("missing [device] section".into()))?;
        let dims = ModeDims::new(d.levels).map_err(|e| Failure::Config(format!("device.levels: {e}")))?;
        let p = DeviceParams {
            omega: d.omega_ghz,
            alpha: d.alpha_ghz,
            g1c: d.g1c_ghz,
            g2c: d.g2c_ghz,
            g12: d.g12_ghz,
            dims,
        };
        p.validate().map_err(|e| Failure::Config(format!("device: {e}")))?;
        Ok(p)
    }

    pub fn coherence(&self) -> Result<CoherenceParams, Failure> {
        let c = self
            .coherence
            .as_ref()
            .ok_or_else(|| Failure::Config("missing [coherence] section".into()))?;
        let out = CoherenceParams {
            t1: c.t1_us,
            t2_ramsey: c.t2_ramsey_us,
            t2_echo: c.t2_echo_us,
        };
        out.validate().map_err(|e| Failure::Config(format!("coherence: {e}")))?;
        out.rates(cas_core::dynamics::T2Choice::Ramsey)
            .and_then(|_| out.rates(cas_core::dynamics::T2Choice::Echo))
            .map_err(|e| Failure::Config(format!("coherence: {e}")))?;
        Ok(out)
    }
}

/// Section accessor with a uniform error.
pub fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, Failure> {
    s.as_ref().ok_or_else(|| Failure::Config(format!("missing [{name}] section")))
}
