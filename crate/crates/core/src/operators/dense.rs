// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::space::{NormContext, PNorm, Vector, C64};

pub type Matrix = DMatrix<C64>;

/// Square complex matrix acting on `C^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct DenseOperator(Matrix);

impl TryFrom<Matrix> for DenseOperator {
    type Error = crate::error::Error;

    fn try_from(m: Matrix) -> Result<Self> {
        DenseOperator::new(m)
    }
}

impl From<DenseOperator> for Matrix {
    fn from(op: DenseOperator) -> Matrix {
        op.0
    }
}

impl DenseOperator {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(contract(format!("operator must be square and nonempty, got {}x{}", m.nrows(), m.ncols())));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(contract("operator has non-finite entries"));
        }
        Ok(DenseOperator(m))
    }

    /// Real row-major entries.
    pub fn from_real_rows(d: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != d * d {
            return Err(contract("expected d*d entries"));
        }
        Self::new(Matrix::from_fn(d, d, |i, j| C64::new(rows[i * d + j], 0.0)))
    }

    pub fn identity(d: usize) -> Self {
        DenseOperator(Matrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x)?;
        Ok(&self.0 * x)
    }

    pub fn scaled(&self, c: C64) -> DenseOperator {
        DenseOperator(&self.0 * c)
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator(self.0.adjoint())
    }
}

pub(crate) fn check_dim(d: usize, x: &Vector) -> Result<()> {
    if x.len() != d {
        return Err(contract(format!("vector of dimension {} given to a {d}x{d} operator", x.len())));
    }
    Ok(())
}

/// `S^n` by binary powering.
pub fn matrix_power(s: &Matrix, mut n: u64) -> Matrix {
    let d = s.nrows();
    let mut result = Matrix::identity(d, d);
    let mut base = s.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `S^n x` with `O(log n)` matrix products followed by one application.
pub fn power_apply(s: &DenseOperator, n: u64, x: &Vector) -> Result<Vector> {
    check_dim(s.dim(), x)?;
    if n == 0 {
        return Ok(x.clone());
    }
    Ok(matrix_power(s.matrix(), n) * x)
}

/// Induced operator norm. Exact column/row sums for `p = 1, inf`, largest
/// singular value for `p = 2`. The grid-sup context is the sup-norm on the
/// sample values.
pub fn operator_norm(s: &DenseOperator, ctx: &NormContext) -> f64 {
    let m = s.matrix();
    match ctx {
        NormContext::Coord(PNorm::One) => (0..m.ncols())
            .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max),
        NormContext::Coord(PNorm::Inf) | NormContext::GridSup { .. } => (0..m.nrows())
            .map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max),
        NormContext::Coord(PNorm::Two) => spectral_norm(m),
    }
}

pub fn spectral_norm(m: &Matrix) -> f64 {
    crate::linalg::singular_values(m).first().copied().unwrap_or(0.0)
}
