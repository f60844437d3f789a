// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{contract, Result};
use crate::operators::{power_apply, DenseOperator, Matrix, SemigroupRep};
use crate::space::{pairwise_sum_vectors, Vector, C64};

/// Above this length Cesàro means switch to binary splitting.
pub const DIRECT_CESARO_MAX: u64 = 1 << 10;

/// `sum_{j<n} w_j T^j x` with the iterates summed pairwise.
pub(crate) fn weighted_orbit(t: &DenseOperator, x: &Vector, weights: &[C64]) -> Result<Vector> {
    let mut terms = Vec::with_capacity(weights.len());
    let mut v = x.clone();
    for (j, &w) in weights.iter().enumerate() {
        terms.push(&v * w);
        if j + 1 < weights.len() {
            v = t.apply(&v)?;
        }
    }
    Ok(pairwise_sum_vectors(&terms).unwrap_or_else(|| Vector::zeros(x.len())))
}

/// `(1/n) sum_{j<n} T^j x` by direct iteration.
pub fn cesaro_direct(t: &DenseOperator, n: u64, x: &Vector) -> Result<Vector> {
    if n == 0 {
        return Err(contract("Cesàro length must be >= 1"));
    }
    let mut terms = Vec::with_capacity(n as usize);
    let mut v = x.clone();
    for j in 0..n {
        if j > 0 {
            v = t.apply(&v)?;
        }
        terms.push(v.clone());
    }
    let sum = pairwise_sum_vectors(&terms).expect("n >= 1");
    Ok(sum / C64::new(n as f64, 0.0))
}

/// `(1/n) sum_{j<n} S^j` via `Q_{2m} = Q_m + S^m Q_m`, `Q_{m+1} = I + S Q_m`,
/// walking the bits of `n` from the top.
pub fn cesaro_operator(s: &Matrix, n: u64) -> Matrix {
    assert!(n >= 1);
    let d = s.nrows();
    let id = Matrix::identity(d, d);
    // invariant: q = Q_m, p = S^m
    let mut q = id.clone();
    let mut p = s.clone();
    let top = 63 - n.leading_zeros();
    for bit in (0..top).rev() {
        q = &q + &p * &q;
        p = &p * &p;
        if (n >> bit) & 1 == 1 {
            q = &id + s * &q;
            p = s * &p;
        }
    }
    q / C64::new(n as f64, 0.0)
}

/// Cesàro mean of a (possibly modulated) powers representation.
pub fn cesaro(rep: &SemigroupRep, n: u64, x: &Vector) -> Result<Vector> {
    let t = rep.single_operator()?;
    crate::operators::dense::check_dim(t.dim(), x)?;
    if n == 0 {
        return Err(contract("Cesàro length must be >= 1"));
    }
    if n <= DIRECT_CESARO_MAX {
        cesaro_direct(&t, n, x)
    } else {
        Ok(cesaro_operator(t.matrix(), n) * x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbelValue {
    pub value: Vector,
    /// Number of series terms kept.
    pub terms: u64,
    /// Certified bound `M ||x|| r^terms` on the discarded tail.
    pub tail_bound: f64,
}

/// Smallest `n` with `scale * r^n <= tail_eps`.
pub fn abel_terms(r: f64, tail_eps: f64, scale: f64) -> u64 {
    if scale <= tail_eps {
        return 0;
    }
    let n = ((tail_eps / scale).ln() / r.ln()).ceil().max(0.0) as u64;
    // guard against rounding in the logarithms
    let mut n = n.saturating_sub(1);
    while scale * r.powf(n as f64) > tail_eps {
        n += 1;
    }
    n
}

/// `(1-r) sum_n r^n S^n x`, truncated where the geometric tail bound drops
/// below `tail_eps`.
pub fn abel(rep: &SemigroupRep, r: f64, tail_eps: f64, x: &Vector) -> Result<AbelValue> {
    if !(r > 0.0 && r < 1.0) {
        return Err(contract("Abel parameter must lie in (0,1)"));
    }
    if !(tail_eps > 0.0) {
        return Err(contract("Abel tail tolerance must be > 0"));
    }
    let t = rep.single_operator()?;
    crate::operators::dense::check_dim(t.dim(), x)?;
    let scale = rep.bound() * x.norm();
    let terms = abel_terms(r, tail_eps, scale);
    let weights: Vec<C64> = (0..terms).map(|n| C64::new((1.0 - r) * r.powf(n as f64), 0.0)).collect();
    let value = weighted_orbit(&t, x, &weights)?;
    Ok(AbelValue { value, terms, tail_bound: scale * r.powf(terms as f64) })
}

/// `T^start x`, shared by the Følner interval averages.
pub(crate) fn shifted(t: &DenseOperator, start: u64, x: &Vector) -> Result<Vector> {
    power_apply(t, start, x)
}
