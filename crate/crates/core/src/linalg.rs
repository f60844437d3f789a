// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Singular value decompositions, delegated to faer. nalgebra's complex SVD
//! loses the factorisation on some rank-deficient inputs, and every rank
//! decision in the crate goes through here.

use crate::operators::Matrix;

/// Full SVD `m = U diag(s) V*`, singular values in nonincreasing order.
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

fn to_faer(m: &Matrix) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, faer::c64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn svd(m: &Matrix) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd { u: Matrix::identity(r, r), s: Vec::new(), v: Matrix::identity(c, c) };
    }
    let f = to_faer(m).svd().expect("SVD of a finite matrix converges");
    let s = f.S().column_vector().iter().map(|z| z.re).collect();
    Svd { u: from_faer(f.U()), s, v: from_faer(f.V()) }
}

pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        // overflowed powers of an expanding operator
        return vec![f64::INFINITY; m.nrows().min(m.ncols())];
    }
    to_faer(m).singular_values().expect("SVD of a finite matrix converges")
}
