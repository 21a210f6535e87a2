// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation of a fixed-frequency transmon pair joined by a driven tunable
//! coupler: static spectra, perturbative and numeric swap rates, pulse
//! dynamics, and CZ gate calibration and fidelity.
//!
//! Units: configuration values are frequencies in GHz (cycles per ns);
//! Hamiltonian matrices are angular, rad/ns; times are ns.

pub mod device;
pub mod dynamics;
pub mod error;
pub mod gates;
pub mod hilbert;
pub mod linalg;
pub mod spectrum;
pub mod swt;

pub use error::{Error, Result};
