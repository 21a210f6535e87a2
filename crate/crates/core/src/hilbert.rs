// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Truncated bosonic modes for a transmon triplet (Q1, Q2, coupler).
//!
//! Basis states are packed row-major: `|ijk>` lives at `i*(d2*dc) + j*dc + k`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const DEFAULT_LEVELS: usize = 4;

/// One of the three transmons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Q1,
    Q2,
    Coupler,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Q1, Mode::Q2, Mode::Coupler];

    pub fn index(self) -> usize {
        match self {
            Mode::Q1 => 0,
            Mode::Q2 => 1,
            Mode::Coupler => 2,
        }
    }
}

impl TryFrom<usize> for Mode {
    type Error = Error;

    fn try_from(value: usize) -> Result<Self> {
        match value {
            0 => Ok(Mode::Q1),
            1 => Ok(Mode::Q2),
            2 => Ok(Mode::Coupler),
            other => Err(Error::InvalidMode(other)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    Lower,
    Raise,
    Number,
}

/// Levels kept per mode, ordered (Q1, Q2, coupler).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeDims {
    levels: [usize; 3],
}

impl ModeDims {
    pub fn new(levels: [usize; 3]) -> Result<Self> {
        if levels.iter().any(|&n| n < 2) {
            return Err(Error::InvalidDims(levels.to_vec()));
        }
        Ok(Self { levels })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new([n; 3])
    }

    pub fn levels(&self) -> [usize; 3] {
        self.levels
    }

    pub fn level(&self, mode: Mode) -> usize {
        self.levels[mode.index()]
    }

    pub fn total(&self) -> usize {
        self.levels.iter().product()
    }

    /// Row-major position of a bare label.
    pub fn index_of(&self, label: BareLabel) -> Result<usize> {
        let [i, j, k] = label.occ;
        let [_, d2, dc] = self.levels;
        if !label.fits(self) {
            return Err(Error::LabelOutOfRange {
                label,
                levels: self.levels,
            });
        }
        Ok(i * d2 * dc + j * dc + k)
    }

    pub fn label_of(&self, index: usize) -> Result<BareLabel> {
        let [_, d2, dc] = self.levels;
        if index >= self.total() {
            return Err(Error::DimensionMismatch {
                expected: self.total(),
                found: index,
            });
        }
        Ok(BareLabel::new(index / (d2 * dc), (index / dc) % d2, index % dc))
    }

    /// All bare labels in index order.
    pub fn labels(&self) -> impl Iterator<Item = BareLabel> + '_ {
        (0..self.total()).map(move |n| self.label_of(n).expect("index in range"))
    }
}

impl Default for ModeDims {
    fn default() -> Self {
        Self {
            levels: [DEFAULT_LEVELS; 3],
        }
    }
}

/// Occupation numbers `|ijk> = |i>_1 |j>_2 |k>_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BareLabel {
    pub occ: [usize; 3],
}

impl BareLabel {
    pub const fn new(i: usize, j: usize, k: usize) -> Self {
        Self { occ: [i, j, k] }
    }

    pub fn excitations(&self) -> usize {
        self.occ.iter().sum()
    }

    pub fn fits(&self, dims: &ModeDims) -> bool {
        self.occ.iter().zip(dims.levels.iter()).all(|(o, d)| o < d)
    }
}

impl fmt::Display for BareLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}{}{}>", self.occ[0], self.occ[1], self.occ[2])
    }
}

/// Dense operator on the product space, tagged with its mode dims.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dims: ModeDims,
    data: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(dims: ModeDims, data: DMatrix<C64>) -> Result<Self> {
        let d = dims.total();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: data.nrows().max(data.ncols()),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: ModeDims) -> Self {
        let d = dims.total();
        Self {
            dims,
            data: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(dims: ModeDims) -> Self {
        let d = dims.total();
        Self {
            dims,
            data: DMatrix::identity(d, d),
        }
    }

    pub fn dims(&self) -> ModeDims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.data
    }

    /// Matrix element between two bare states.
    pub fn element(&self, row: BareLabel, col: BareLabel) -> Result<C64> {
        Ok(self.data[(self.dims.index_of(row)?, self.dims.index_of(col)?)])
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dims: self.dims,
            data: self.data.adjoint(),
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dims: self.dims,
            data: self.data.scale(factor),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dims: self.dims,
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            dims: self.dims,
            data: &self.data - &other.data,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            dims: self.dims,
            data: &self.data * &other.data,
        }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        Self {
            dims: self.dims,
            data: &self.data * &other.data - &other.data * &self.data,
        }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.norm()
    }

    /// `||A - A^dag||_F / ||A||_F` (absolute when A vanishes).
    pub fn hermiticity_residual(&self) -> f64 {
        let diff = (&self.data - self.data.adjoint()).norm();
        let n = self.data.norm();
        if n > 0.0 {
            diff / n
        } else {
            diff
        }
    }

    /// `||A + A^dag||_F / ||A||_F` (absolute when A vanishes).
    pub fn antihermiticity_residual(&self) -> f64 {
        let sum = (&self.data + self.data.adjoint()).norm();
        let n = self.data.norm();
        if n > 0.0 {
            sum / n
        } else {
            sum
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn diagonal_part(&self) -> Self {
        let d = self.dim();
        let mut out = DMatrix::zeros(d, d);
        for n in 0..d {
            out[(n, n)] = self.data[(n, n)];
        }
        Self {
            dims: self.dims,
            data: out,
        }
    }

    pub fn offdiagonal_part(&self) -> Self {
        let mut out = self.data.clone();
        for n in 0..self.dim() {
            out[(n, n)] = C64::new(0.0, 0.0);
        }
        Self {
            dims: self.dims,
            data: out,
        }
    }

    /// Largest off-diagonal modulus.
    pub fn max_offdiagonal(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for c in 0..d {
            for r in 0..d {
                if r != c {
                    worst = worst.max(self.data[(r, c)].norm());
                }
            }
        }
        worst
    }
}

fn single_mode(n: usize, kind: OpKind) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(n, n);
    for k in 1..n {
        let v = C64::new((k as f64).sqrt(), 0.0);
        match kind {
            OpKind::Lower => m[(k - 1, k)] = v,
            OpKind::Raise => m[(k, k - 1)] = v,
            OpKind::Number => {}
        }
    }
    if kind == OpKind::Number {
        for k in 0..n {
            m[(k, k)] = C64::new(k as f64, 0.0);
        }
    }
    m
}

/// Embed a single-mode matrix on `mode`, identities elsewhere.
pub fn embed(dims: ModeDims, mode: Mode, local: &DMatrix<C64>) -> Result<OperatorMatrix> {
    let n = dims.level(mode);
    if local.nrows() != n || local.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: local.nrows(),
        });
    }
    let mut full = DMatrix::<C64>::identity(1, 1);
    for m in Mode::ALL {
        let factor = if m == mode {
            local.clone()
        } else {
            DMatrix::identity(dims.level(m), dims.level(m))
        };
        full = full.kronecker(&factor);
    }
    OperatorMatrix::new(dims, full)
}

/// Truncated ladder or number operator on one mode of the triplet.
pub fn site_operator(dims: ModeDims, mode: Mode, kind: OpKind) -> OperatorMatrix {
    let local = single_mode(dims.level(mode), kind);
    embed(dims, mode, &local).expect("local operator sized from dims")
}

/// Same as [`site_operator`] with a raw mode index (0, 1, 2).
pub fn site_operator_at(dims: ModeDims, mode: usize, kind: OpKind) -> Result<OperatorMatrix> {
    Ok(site_operator(dims, Mode::try_from(mode)?, kind))
}

/// Total excitation number.
pub fn total_number(dims: ModeDims) -> OperatorMatrix {
    let d = dims.total();
    let mut m = DMatrix::zeros(d, d);
    for (n, label) in dims.labels().enumerate() {
        m[(n, n)] = C64::new(label.excitations() as f64, 0.0);
    }
    OperatorMatrix::new(dims, m).expect("square by construction")
}

pub fn basis_state(dims: ModeDims, label: BareLabel) -> Result<DVector<C64>> {
    let idx = dims.index_of(label)?;
    let mut v = DVector::zeros(dims.total());
    v[idx] = C64::new(1.0, 0.0);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nonzeros(m: &DMatrix<C64>) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)].norm() > 0.0 {
                    out.push((r, c, m[(r, c)]));
                }
            }
        }
        out
    }

    #[test]
    fn two_level_coupler_lowering_has_four_unit_entries() {
        let dims = ModeDims::uniform(2).unwrap();
        let a = site_operator(dims, Mode::Coupler, OpKind::Lower);
        let nz = nonzeros(a.matrix());
        assert_eq!(nz.len(), 4);
        assert!(nz.iter().all(|(_, _, v)| *v == C64::new(1.0, 0.0)));
    }

    #[test]
    fn number_operator_spectrum_is_sixteenfold() {
        let dims = ModeDims::default();
        let n = site_operator(dims, Mode::Q1, OpKind::Number);
        assert_eq!(n.max_offdiagonal(), 0.0);
        let mut counts = [0usize; 4];
        for k in 0..64 {
            counts[n.matrix()[(k, k)].re as usize] += 1;
        }
        assert_eq!(counts, [16; 4]);
    }

    #[test]
    fn raise_is_adjoint_of_lower_entrywise() {
        let dims = ModeDims::uniform(3).unwrap();
        let a = site_operator(dims, Mode::Q2, OpKind::Lower);
        let ad = site_operator(dims, Mode::Q2, OpKind::Raise);
        // Reference built entry by entry from the packing rule.
        let mut expect = DMatrix::<C64>::zeros(27, 27);
        for i in 0..3 {
            for j in 1..3 {
                for k in 0..3 {
                    let from = i * 9 + (j - 1) * 3 + k;
                    let to = i * 9 + j * 3 + k;
                    expect[(to, from)] = C64::new((j as f64).sqrt(), 0.0);
                }
            }
        }
        assert_eq!(ad.matrix(), &expect);
        assert_eq!(ad.matrix(), &a.matrix().adjoint());
    }

    #[test]
    fn basis_indices_follow_row_major_packing() {
        let d4 = ModeDims::default();
        assert_eq!(d4.index_of(BareLabel::new(0, 0, 0)).unwrap(), 0);
        assert_eq!(d4.index_of(BareLabel::new(1, 0, 1)).unwrap(), 17);
        let d2 = ModeDims::uniform(2).unwrap();
        assert_eq!(d2.index_of(BareLabel::new(0, 1, 0)).unwrap(), 2);
        let v = basis_state(d2, BareLabel::new(0, 1, 0)).unwrap();
        assert_eq!(v[2], C64::new(1.0, 0.0));
        assert_eq!(v.iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn label_round_trip() {
        let dims = ModeDims::new([3, 4, 5]).unwrap();
        for n in 0..dims.total() {
            assert_eq!(dims.index_of(dims.label_of(n).unwrap()).unwrap(), n);
        }
    }

    #[test]
    fn rejects_bad_dims_and_labels() {
        assert!(matches!(ModeDims::new([4, 1, 4]), Err(Error::InvalidDims(_))));
        let dims = ModeDims::uniform(2).unwrap();
        assert!(matches!(
            basis_state(dims, BareLabel::new(0, 2, 0)),
            Err(Error::LabelOutOfRange { .. })
        ));
        assert!(matches!(
            site_operator_at(dims, 3, OpKind::Lower),
            Err(Error::InvalidMode(3))
        ));
    }

    #[test]
    fn display_uses_ket_notation() {
        assert_eq!(BareLabel::new(1, 0, 1).to_string(), "|101>");
    }
}
