// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::nets::discrete::{cesaro_direct, cesaro_operator, DIRECT_CESARO_MAX};
use crate::operators::{DenseOperator, GroupElement, Matrix, RepKind, SemigroupRep};
use crate::space::{pairwise_sum_vectors, Vector, C64};

/// Support sizes above this are not recorded.
pub const MAX_RECORDED_SUPPORT: usize = 1 << 20;

/// Step rule of a cofinal chain `A_{j+1} = W_j A_j` in the convex hull.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainRule {
    /// `W_j` is the Cesàro mean of length `2^{ceil(j/k)+1}` of generator
    /// `(j mod k) + 1`.
    Doubling,
    /// `W_j = I`.
    Identity,
}

impl ChainRule {
    pub fn step_length(self, j: usize, k: usize) -> u64 {
        match self {
            ChainRule::Doubling => 1u64 << (j.div_ceil(k) + 1),
            ChainRule::Identity => 1,
        }
    }
}

/// A finite convex combination `sum_g w_g S_g`, keyed by the exponent vector
/// `g in N^k`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConvexWeights {
    pub terms: BTreeMap<Vec<u64>, f64>,
}

impl ConvexWeights {
    pub fn identity(k: usize) -> Self {
        ConvexWeights { terms: BTreeMap::from([(vec![0; k], 1.0)]) }
    }

    /// Uniform weights `1/n` on `{0..n-1}` in the first coordinate.
    pub fn interval(n: u64) -> Self {
        ConvexWeights { terms: (0..n).map(|j| (vec![j], 1.0 / n as f64)).collect() }
    }

    pub fn total(&self) -> f64 {
        self.terms.values().sum()
    }

    pub fn support_size(&self) -> usize {
        self.terms.len()
    }

    /// Weights of `(1/n) sum_{m<n} S_axis^m` composed with `self`.
    fn then_average(&self, axis: usize, n: u64) -> Self {
        let mut out = BTreeMap::new();
        let w = 1.0 / n as f64;
        for (g, &c) in &self.terms {
            for m in 0..n {
                let mut h = g.clone();
                h[axis] += m;
                *out.entry(h).or_insert(0.0) += c * w;
            }
        }
        ConvexWeights { terms: out }
    }

    /// `sum_g w_g S_g x`.
    pub fn apply(&self, rep: &SemigroupRep, x: &Vector) -> Result<Vector> {
        let terms = self
            .terms
            .iter()
            .map(|(g, &w)| {
                let el = if g.len() == 1 && matches!(rep.kind(), RepKind::Powers { .. }) {
                    GroupElement::Step(g[0])
                } else {
                    GroupElement::Multi(g.clone())
                };
                Ok(rep.apply(&el, x)? * C64::new(w, 0.0))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(pairwise_sum_vectors(&terms).unwrap_or_else(|| Vector::zeros(x.len())))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrace {
    /// `A_j x` for `j = 0..=length`.
    pub values: Vec<Vector>,
    /// `N_j` of each step `W_j`.
    pub step_lengths: Vec<u64>,
    /// Convex weights of each `A_j`, when recorded.
    pub weights: Option<Vec<ConvexWeights>>,
}

/// Materialises the chain `A_0 = I`, `A_{j+1} = W_j A_j` and returns `A_j x`.
pub fn convex_chain(rep: &SemigroupRep, rule: ChainRule, length: usize, x: &Vector, record_weights: bool) -> Result<ChainTrace> {
    let gens: Vec<DenseOperator> = match rep.kind() {
        RepKind::Powers { .. } => vec![rep.single_operator()?],
        RepKind::Abelian { generators } => generators
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let mut unit = vec![0; generators.len()];
                unit[i] = 1;
                Ok(s.scaled(rep.character().value(&GroupElement::Multi(unit))?))
            })
            .collect::<Result<_>>()?,
        _ => return Err(contract("convex chains need a finitely generated abelian representation")),
    };
    crate::operators::dense::check_dim(gens[0].dim(), x)?;
    let k = gens.len();

    let mut values = vec![x.clone()];
    let mut step_lengths = Vec::with_capacity(length);
    let mut weights = record_weights.then(|| vec![ConvexWeights::identity(k)]);
    let mut v = x.clone();
    for j in 0..length {
        let axis = j % k;
        let n = rule.step_length(j, k);
        step_lengths.push(n);
        // W_j commutes with A_j, so W_j A_j x = A_j-then-average
        v = if n <= DIRECT_CESARO_MAX {
            cesaro_direct(&gens[axis], n, &v)?
        } else {
            cesaro_operator(gens[axis].matrix(), n) * &v
        };
        values.push(v.clone());
        if let Some(ws) = weights.as_mut() {
            let last = ws.last().expect("A_0 recorded");
            // bound the product support before materialising it
            if (last.support_size() as u64).saturating_mul(n) > MAX_RECORDED_SUPPORT as u64 {
                weights = None;
            } else {
                let next = last.then_average(axis, n);
                ws.push(next);
            }
        }
    }
    Ok(ChainTrace { values, step_lengths, weights })
}

/// Convex weights of `A_length` over `N^k`, or None once the support
/// exceeds [`MAX_RECORDED_SUPPORT`].
pub fn chain_weights(rule: ChainRule, k: usize, length: usize) -> Result<Option<ConvexWeights>> {
    if k == 0 {
        return Err(contract("chain needs at least one generator"));
    }
    let mut w = ConvexWeights::identity(k);
    for j in 0..length {
        let n = rule.step_length(j, k);
        if (w.support_size() as u64).saturating_mul(n) > MAX_RECORDED_SUPPORT as u64 {
            return Ok(None);
        }
        w = w.then_average(j % k, n);
    }
    Ok(Some(w))
}

/// `A_length` as a matrix: the product of the step matrices `W_j`.
pub fn chain_matrix(rep: &SemigroupRep, rule: ChainRule, length: usize) -> Result<Matrix> {
    let gens = match rep.kind() {
        RepKind::Powers { .. } | RepKind::Abelian { .. } => rep.generator_matrices()?,
        _ => return Err(contract("convex chains need a finitely generated abelian representation")),
    };
    let k = gens.len();
    let d = rep.dim();
    let mut m = Matrix::identity(d, d);
    for j in 0..length {
        let n = rule.step_length(j, k);
        if n > 1 {
            m = cesaro_operator(&gens[j % k], n) * m;
        }
    }
    Ok(m)
}
