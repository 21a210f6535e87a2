// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::hilbert::BareLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid mode dimensions {0:?}: every mode needs at least two levels")]
    InvalidDims(Vec<usize>),

    #[error("invalid mode index {0}: expected 0 (Q1), 1 (Q2) or 2 (coupler)")]
    InvalidMode(usize),

    #[error("label {label} out of range for levels {levels:?}")]
    LabelOutOfRange { label: BareLabel, levels: [usize; 3] },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("bare levels {row} and {col} are connected but separated by only {gap:.3e} rad/ns")]
    DegenerateConnectedLevels { row: BareLabel, col: BareLabel, gap: f64 },

    #[error("singular denominator: {0} vanishes")]
    SingularDenominator(&'static str),

    #[error("label {label} is ambiguous between eigenvectors {first} and {second} (overlap {overlap:.4})")]
    LabelAmbiguous {
        label: BareLabel,
        first: usize,
        second: usize,
        overlap: f64,
    },

    #[error("no anticrossing between {lower} and {upper} inside the scan window [{start:.6}, {end:.6}] GHz")]
    NoAnticrossing {
        lower: BareLabel,
        upper: BareLabel,
        start: f64,
        end: f64,
    },

    #[error("integrator step size underflow at t = {time:.6} ns (h = {step:.3e} ns)")]
    ToleranceNotMet { time: f64, step: f64 },

    #[error("negative pure-dephasing rate {rate:.4e} 1/us on mode {mode}: T2 exceeds 2 T1")]
    NegativeDephasing { mode: usize, rate: f64 },

    #[error("fit diverged: {0}")]
    FitDiverged(String),

    #[error("coupler population {population:.4} after the pulse exceeds {limit}")]
    LeakageExceeded { population: f64, limit: f64 },

    #[error("optimization stalled after {iterations} iterations (best objective {best:.8})")]
    OptimizationStalled { iterations: usize, best: f64 },
}
