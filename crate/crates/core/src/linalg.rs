// Copyright 2026 The cas-sim Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Columns are eigenvectors, same order as `values`.
    pub vectors: DMatrix<C64>,
}

pub fn eigh(h: &DMatrix<C64>) -> Eigh {
    let sym = SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sym.eigenvalues[a].total_cmp(&sym.eigenvalues[b]));
    let values = order.iter().map(|&k| sym.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &sym.eigenvectors.column(src));
    }
    Eigh { values, vectors }
}

impl Eigh {
    /// `V exp(-i E t) V^dag`.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        let mut left = DMatrix::zeros(self.vectors.nrows(), self.vectors.ncols());
        for (k, e) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * t);
            let col = self.vectors.column(k) * phase;
            left.set_column(k, &col);
        }
        &left * self.vectors.adjoint()
    }
}

/// `U = exp(-i H t)` for Hermitian `H`.
pub fn unitary_propagator(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    eigh(h).propagator(t)
}

/// `U^dag U - 1` in Frobenius norm.
pub fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - DMatrix::<C64>::identity(n, n)).norm()
}

/// Unitary factor of the polar decomposition, `U (U^dag U)^(-1/2)`.
pub fn nearest_unitary(u: &DMatrix<C64>) -> DMatrix<C64> {
    let e = eigh(&(u.adjoint() * u));
    let n = u.nrows();
    let mut scaled = DMatrix::zeros(n, n);
    for (k, l) in e.values.iter().enumerate() {
        scaled.set_column(k, &(e.vectors.column(k) * C64::new(1.0 / l.sqrt(), 0.0)));
    }
    u * (scaled * e.vectors.adjoint())
}

pub fn outer(a: &DVector<C64>, b: &DVector<C64>) -> DMatrix<C64> {
    a * b.adjoint()
}

pub fn trace(m: &DMatrix<C64>) -> C64 {
    (0..m.nrows()).map(|k| m[(k, k)]).sum()
}

/// Column-stacking vectorization.
pub fn vec_cols(m: &DMatrix<C64>) -> DVector<C64> {
    DVector::from_column_slice(m.as_slice())
}

pub fn unvec_cols(v: &DVector<C64>, n: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}
