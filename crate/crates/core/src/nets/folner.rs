// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::nets::discrete::{cesaro, cesaro_direct, cesaro_operator, shifted, DIRECT_CESARO_MAX};
use crate::nets::time::time_average;
use crate::operators::{matrix_power, GroupElement, Matrix, RepKind, SemigroupRep};
use crate::space::{pairwise_sum_vectors, Vector, C64};

/// A finite (or compact, for `R_+`) averaging set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "snake_case")]
pub enum FolnerSet {
    /// `{start, .., start + len - 1}` in `N`.
    Interval { start: u64, len: u64 },
    /// `prod_i {start_i, .., start_i + len_i - 1}` in `N^k`.
    Box { start: Vec<u64>, lens: Vec<u64> },
    /// All elements of a finite group.
    WholeGroup,
    /// `[start, start + len]` in `R_+`, integrated by Simpson's rule with step `h`.
    TimeInterval { start: f64, len: f64, h: f64 },
}

impl FolnerSet {
    pub fn validate(&self) -> Result<()> {
        match self {
            FolnerSet::Interval { len, .. } if *len == 0 => Err(contract("Følner set is empty")),
            FolnerSet::Box { start, lens } if start.len() != lens.len() || lens.is_empty() => {
                Err(contract("Følner box needs one start and one length per generator"))
            }
            FolnerSet::Box { lens, .. } if lens.contains(&0) => Err(contract("Følner set is empty")),
            FolnerSet::TimeInterval { start, len, h } if !(*len > 0.0 && *h > 0.0 && *start >= 0.0 && h <= len) => {
                Err(contract("time interval needs start >= 0 and 0 < h <= len"))
            }
            _ => Ok(()),
        }
    }

    /// `|F Δ gF| / |F|` for the translate by `g`.
    pub fn relative_symmetric_difference(&self, g: &GroupElement) -> Result<f64> {
        match (self, g) {
            (FolnerSet::Interval { len, .. }, GroupElement::Step(k)) => Ok(2.0 * (*k).min(*len) as f64 / *len as f64),
            (FolnerSet::Box { lens, .. }, GroupElement::Multi(ks)) if ks.len() == lens.len() => {
                let size: f64 = lens.iter().map(|&l| l as f64).product();
                let overlap: f64 = lens.iter().zip(ks).map(|(&l, &k)| l.saturating_sub(k) as f64).product();
                Ok(2.0 * (size - overlap) / size)
            }
            (FolnerSet::WholeGroup, GroupElement::Member(_)) => Ok(0.0),
            (FolnerSet::TimeInterval { len, .. }, GroupElement::Time(t)) => Ok(2.0 * t.abs().min(*len) / len),
            _ => Err(contract("group element does not act on this Følner set")),
        }
    }
}

/// Ordered Følner sets `F_alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FolnerSequence {
    sets: Vec<FolnerSet>,
}

impl FolnerSequence {
    pub fn new(sets: Vec<FolnerSet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(contract("Følner sequence is empty"));
        }
        for s in &sets {
            s.validate()?;
        }
        let lens: Vec<u64> = sets
            .iter()
            .filter_map(|s| match s {
                FolnerSet::Interval { len, .. } => Some(*len),
                _ => None,
            })
            .collect();
        if lens.windows(2).any(|w| w[1] <= w[0]) {
            return Err(contract("interval lengths must strictly increase"));
        }
        Ok(FolnerSequence { sets })
    }

    /// `{0..n-1}` for each listed `n`.
    pub fn initial_intervals(ns: &[u64]) -> Result<Self> {
        Self::new(ns.iter().map(|&len| FolnerSet::Interval { start: 0, len }).collect())
    }

    pub fn get(&self, alpha: usize) -> Result<&FolnerSet> {
        self.sets
            .get(alpha)
            .ok_or_else(|| contract(format!("Følner index {alpha} outside 0..{}", self.sets.len())))
    }

    pub fn sets(&self) -> &[FolnerSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// `(1/|F|) sum_{g in F} chi(g) S_g x` (an integral over `F` for `R_+`).
pub fn folner_average(rep: &SemigroupRep, set: &FolnerSet, x: &Vector) -> Result<Vector> {
    set.validate()?;
    match (rep.kind(), set) {
        (RepKind::Powers { .. }, FolnerSet::Interval { start, len }) => {
            let avg = cesaro(rep, *len, x)?;
            if *start == 0 {
                return Ok(avg);
            }
            shifted(&rep.single_operator()?, *start, &avg)
        }
        (RepKind::Abelian { generators }, FolnerSet::Box { start, lens }) if lens.len() == generators.len() => {
            let mut v = x.clone();
            for (i, (&s0, &len)) in start.iter().zip(lens).enumerate() {
                let mut unit = vec![0; generators.len()];
                unit[i] = 1;
                let lambda = rep.character().value(&GroupElement::Multi(unit))?;
                let t = generators[i].scaled(lambda);
                v = if len <= DIRECT_CESARO_MAX {
                    cesaro_direct(&t, len, &v)?
                } else {
                    cesaro_operator(t.matrix(), len) * &v
                };
                if s0 > 0 {
                    v = shifted(&t, s0, &v)?;
                }
            }
            Ok(v)
        }
        (RepKind::FiniteGroup { elements, .. }, FolnerSet::WholeGroup) => {
            let terms = elements
                .iter()
                .enumerate()
                .map(|(i, e)| Ok(e.apply(x)? * rep.character().value(&GroupElement::Member(i))?))
                .collect::<Result<Vec<_>>>()?;
            let sum = pairwise_sum_vectors(&terms).expect("group is nonempty");
            Ok(sum / C64::new(elements.len() as f64, 0.0))
        }
        (RepKind::OneParameter { .. }, FolnerSet::TimeInterval { start, len, h }) => {
            let avg = time_average(rep, *len, *h, x)?.value;
            if *start == 0.0 {
                return Ok(avg);
            }
            rep.apply(&GroupElement::Time(*start), &avg)
        }
        _ => Err(contract("Følner set does not match the representation's carrier")),
    }
}

/// The box average `prod_i S_i^{start_i} C_{len_i}(S_i)` as a matrix.
pub fn box_matrix(rep: &SemigroupRep, start: &[u64], lens: &[u64]) -> Result<Matrix> {
    let gens = rep.generator_matrices()?;
    if !matches!(rep.kind(), RepKind::Abelian { .. }) || start.len() != gens.len() || lens.len() != gens.len() {
        return Err(contract("box averages need one start and one length per generator"));
    }
    if lens.contains(&0) {
        return Err(contract("Følner set is empty"));
    }
    let d = rep.dim();
    let mut m = Matrix::identity(d, d);
    for ((g, &s0), &len) in gens.iter().zip(start).zip(lens) {
        m = matrix_power(g, s0) * cesaro_operator(g, len) * m;
    }
    Ok(m)
}
