// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::operators::dense::{check_dim, matrix_power, spectral_norm, DenseOperator, Matrix};
use crate::operators::expm::expm_t;
use crate::space::{Vector, C64};

/// Commutation tolerance for abelian generator sets.
pub const COMMUTE_TOL: f64 = 1e-10;

/// Unimodular character modulating a representation. Angles are in turns:
/// `lambda = e^{2 pi i theta}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "character", rename_all = "snake_case")]
pub enum Character {
    #[default]
    Trivial,
    /// `n -> lambda^n` on `N`.
    Circle { theta: f64 },
    /// `(n_1..n_k) -> prod lambda_i^{n_i}` on `N^k`.
    Torus { thetas: Vec<f64> },
    /// `t -> e^{2 pi i r t}` on `R_+`.
    Frequency { r: f64 },
    /// Explicit values on the elements of a finite group.
    Table { values: Vec<C64> },
}

pub fn turn(theta: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * theta)
}

impl Character {
    pub fn value(&self, g: &GroupElement) -> Result<C64> {
        match (self, g) {
            (Character::Trivial, _) => Ok(C64::new(1.0, 0.0)),
            (Character::Circle { theta }, GroupElement::Step(n)) => Ok(turn((theta * *n as f64).rem_euclid(1.0))),
            (Character::Torus { thetas }, GroupElement::Multi(ns)) if thetas.len() == ns.len() => {
                let phase: f64 = thetas.iter().zip(ns).map(|(t, &n)| (t * n as f64).rem_euclid(1.0)).sum();
                Ok(turn(phase))
            }
            (Character::Frequency { r }, GroupElement::Time(t)) => Ok(turn((r * t).rem_euclid(1.0))),
            (Character::Table { values }, GroupElement::Member(i)) => values
                .get(*i)
                .copied()
                .ok_or_else(|| Error::Domain(format!("group element {i} has no character value"))),
            _ => Err(contract(format!("character {self:?} does not act on {g:?}"))),
        }
    }

    /// `lambda` for a character of `N` (trivial gives 1).
    pub fn circle_value(&self) -> Result<C64> {
        match self {
            Character::Trivial => Ok(C64::new(1.0, 0.0)),
            Character::Circle { theta } => Ok(turn(*theta)),
            _ => Err(contract("expected a character of N")),
        }
    }
}

/// An element of the acting semigroup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupElement {
    Step(u64),
    Multi(Vec<u64>),
    Time(f64),
    Member(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepKind {
    /// `{S^n : n in N}`.
    Powers { op: DenseOperator },
    /// `{S_1^{n_1} ... S_k^{n_k}}` for commuting generators.
    Abelian { generators: Vec<DenseOperator> },
    /// `{exp(tA) : t >= 0}`; boundedness is certified on `[0, t_max]`.
    OneParameter { generator: DenseOperator, t_max: f64 },
    /// A finite group given by its elements; `products[a][b]` is the index of
    /// `S_a S_b`.
    FiniteGroup { elements: Vec<DenseOperator>, products: Vec<Vec<usize>> },
}

/// A bounded representation together with its bound `M >= sup ||S_g||_2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemigroupRep {
    kind: RepKind,
    #[serde(default)]
    character: Character,
    bound: f64,
}

/// Sample points for the power bound: all `n <= 64` and `2^j` up to `2^20`.
fn sampled_power_norms(s: &Matrix) -> f64 {
    let mut best: f64 = 1.0;
    let mut p = s.clone();
    for _ in 1..=64 {
        best = best.max(spectral_norm(&p));
        p = &p * s;
    }
    let mut q = matrix_power(s, 64);
    for _ in 6..=20 {
        if !best.is_finite() {
            break;
        }
        q = &q * &q;
        best = best.max(spectral_norm(&q));
    }
    best
}

impl SemigroupRep {
    pub fn powers(op: DenseOperator) -> Self {
        let bound = sampled_power_norms(op.matrix());
        SemigroupRep { kind: RepKind::Powers { op }, character: Character::Trivial, bound }
    }

    pub fn abelian(generators: Vec<DenseOperator>) -> Result<Self> {
        let d = generators.first().ok_or_else(|| contract("abelian rep needs a generator"))?.dim();
        if generators.iter().any(|g| g.dim() != d) {
            return Err(contract("generators have different dimensions"));
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                let c = (a.matrix() * b.matrix() - b.matrix() * a.matrix()).norm();
                let scale = 1.0f64.max(a.matrix().norm() * b.matrix().norm());
                if c > COMMUTE_TOL * scale {
                    return Err(Error::Refused(format!("generators do not commute (defect {c:e})")));
                }
            }
        }
        let bound = bound_of_abelian(&generators);
        Ok(SemigroupRep { kind: RepKind::Abelian { generators }, character: Character::Trivial, bound })
    }

    pub fn one_parameter(generator: DenseOperator, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(contract("t_max must be positive and finite"));
        }
        let mut bound: f64 = 1.0;
        for j in 0..=64 {
            let t = t_max * j as f64 / 64.0;
            bound = bound.max(spectral_norm(&expm_t(&generator, t)?));
        }
        Ok(SemigroupRep { kind: RepKind::OneParameter { generator, t_max }, character: Character::Trivial, bound })
    }

    /// Builds the product table by matching `S_a S_b` against the element list.
    pub fn finite_group(elements: Vec<DenseOperator>) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(contract("finite group needs elements"));
        }
        let d = elements[0].dim();
        if !elements.iter().any(|e| (e.matrix() - Matrix::identity(d, d)).norm() < 1e-12) {
            return Err(contract("finite group must contain the identity"));
        }
        let mut products = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                let ab = elements[a].matrix() * elements[b].matrix();
                products[a][b] = elements
                    .iter()
                    .position(|e| (e.matrix() - &ab).norm() < 1e-10)
                    .ok_or_else(|| contract(format!("elements {a} and {b} multiply outside the set")))?;
            }
        }
        let bound = elements.iter().map(|e| spectral_norm(e.matrix())).fold(0.0, f64::max);
        Ok(SemigroupRep { kind: RepKind::FiniteGroup { elements, products }, character: Character::Trivial, bound })
    }

    /// Overrides the sampled bound with a known certificate.
    pub fn with_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound > 0.0) || !bound.is_finite() {
            return Err(contract("bound must be positive and finite"));
        }
        self.bound = bound;
        Ok(self)
    }

    /// The same representation modulated by a unimodular character.
    pub fn modulated(&self, character: Character) -> Result<Self> {
        let ok = matches!(
            (&self.kind, &character),
            (_, Character::Trivial)
                | (RepKind::Powers { .. }, Character::Circle { .. })
                | (RepKind::OneParameter { .. }, Character::Frequency { .. })
                | (RepKind::FiniteGroup { .. }, Character::Table { .. })
        ) || matches!((&self.kind, &character),
            (RepKind::Abelian { generators }, Character::Torus { thetas }) if generators.len() == thetas.len());
        if !ok {
            return Err(contract(format!("character {character:?} does not fit this representation")));
        }
        if let (RepKind::FiniteGroup { elements, .. }, Character::Table { values }) = (&self.kind, &character) {
            if values.len() != elements.len() || values.iter().any(|v| (v.norm() - 1.0).abs() > 1e-12) {
                return Err(contract("character table must list one unimodular value per element"));
            }
        }
        Ok(SemigroupRep { kind: self.kind.clone(), character, bound: self.bound })
    }

    pub fn kind(&self) -> &RepKind {
        &self.kind
    }

    pub fn character(&self) -> &Character {
        &self.character
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            RepKind::Powers { op } => op.dim(),
            RepKind::Abelian { generators } => generators[0].dim(),
            RepKind::OneParameter { generator, .. } => generator.dim(),
            RepKind::FiniteGroup { elements, .. } => elements[0].dim(),
        }
    }

    /// The single (modulated) operator of a powers representation.
    pub fn single_operator(&self) -> Result<DenseOperator> {
        match &self.kind {
            RepKind::Powers { op } => Ok(op.scaled(self.character.circle_value()?)),
            _ => Err(contract("operation needs a powers-of-one-operator representation")),
        }
    }

    /// Modulated generator matrices whose joint fixed space is `Fix S`.
    ///
    /// One-parameter semigroups use `S(1)` and `S(sqrt 2)`: a common fixed
    /// vector of both is fixed by the whole semigroup, since `e^{mu} = 1` and
    /// `e^{sqrt(2) mu} = 1` force `mu = 0`.
    pub fn generator_matrices(&self) -> Result<Vec<Matrix>> {
        Ok(match &self.kind {
            RepKind::Powers { op } => vec![op.matrix() * self.character.circle_value()?],
            RepKind::Abelian { generators } => {
                let k = generators.len();
                (0..k)
                    .map(|i| {
                        let mut e = vec![0; k];
                        e[i] = 1;
                        Ok(generators[i].matrix() * self.character.value(&GroupElement::Multi(e))?)
                    })
                    .collect::<Result<_>>()?
            }
            RepKind::OneParameter { .. } => vec![
                self.operator_at(&GroupElement::Time(1.0))?,
                self.operator_at(&GroupElement::Time(std::f64::consts::SQRT_2))?,
            ],
            RepKind::FiniteGroup { elements, .. } => elements
                .iter()
                .enumerate()
                .map(|(i, e)| Ok(e.matrix() * self.character.value(&GroupElement::Member(i))?))
                .collect::<Result<_>>()?,
        })
    }

    /// Generator elements of the semigroup (unit steps, or all group members).
    pub fn generator_elements(&self) -> Vec<GroupElement> {
        match &self.kind {
            RepKind::Powers { .. } => vec![GroupElement::Step(1)],
            RepKind::Abelian { generators } => (0..generators.len())
                .map(|i| {
                    let mut e = vec![0; generators.len()];
                    e[i] = 1;
                    GroupElement::Multi(e)
                })
                .collect(),
            RepKind::OneParameter { .. } => vec![GroupElement::Time(1.0), GroupElement::Time(std::f64::consts::SQRT_2)],
            RepKind::FiniteGroup { elements, .. } => (0..elements.len()).map(GroupElement::Member).collect(),
        }
    }

    /// The matrix of `S_g`, character included.
    pub fn operator_at(&self, g: &GroupElement) -> Result<Matrix> {
        let chi = self.character.value(g)?;
        let m = match (&self.kind, g) {
            (RepKind::Powers { op }, GroupElement::Step(n)) => matrix_power(op.matrix(), *n),
            (RepKind::Abelian { generators }, GroupElement::Multi(ns)) if ns.len() == generators.len() => {
                let d = generators[0].dim();
                generators
                    .iter()
                    .zip(ns)
                    .fold(Matrix::identity(d, d), |acc, (s, &n)| acc * matrix_power(s.matrix(), n))
            }
            (RepKind::OneParameter { generator, .. }, GroupElement::Time(t)) => expm_t(generator, *t)?,
            (RepKind::FiniteGroup { elements, .. }, GroupElement::Member(i)) => elements
                .get(*i)
                .ok_or_else(|| Error::Domain(format!("group has no element {i}")))?
                .matrix()
                .clone(),
            _ => return Err(Error::Domain(format!("{g:?} is not in the carrier of this representation"))),
        };
        Ok(m * chi)
    }

    /// `S_g x`.
    pub fn apply(&self, g: &GroupElement, x: &Vector) -> Result<Vector> {
        check_dim(self.dim(), x)?;
        Ok(self.operator_at(g)? * x)
    }

    /// The element `h g` with `S_g S_h = S_{hg}`.
    pub fn compose(&self, h: &GroupElement, g: &GroupElement) -> Result<GroupElement> {
        match (&self.kind, h, g) {
            (RepKind::Powers { .. }, GroupElement::Step(a), GroupElement::Step(b)) => Ok(GroupElement::Step(a + b)),
            (RepKind::Abelian { .. }, GroupElement::Multi(a), GroupElement::Multi(b)) if a.len() == b.len() => {
                Ok(GroupElement::Multi(a.iter().zip(b).map(|(x, y)| x + y).collect()))
            }
            (RepKind::OneParameter { .. }, GroupElement::Time(a), GroupElement::Time(b)) => Ok(GroupElement::Time(a + b)),
            (RepKind::FiniteGroup { products, .. }, GroupElement::Member(a), GroupElement::Member(b)) => {
                Ok(GroupElement::Member(products[*b][*a]))
            }
            _ => Err(Error::Domain("elements are not in the carrier of this representation".into())),
        }
    }
}

fn bound_of_abelian(generators: &[DenseOperator]) -> f64 {
    // sampled products of powers along the diagonal and the axes
    let d = generators[0].dim();
    let mut best: f64 = 1.0;
    for n in [1u64, 2, 3, 5, 8, 16, 64, 256, 1024] {
        let mut all = Matrix::identity(d, d);
        for g in generators {
            let p = matrix_power(g.matrix(), n);
            best = best.max(spectral_norm(&p));
            all *= p;
        }
        best = best.max(spectral_norm(&all));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn swap() -> DenseOperator {
        DenseOperator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn identity_and_swap_actions() {
        let x = Vector::from_vec(vec![c(0.3), C64::new(0.0, 2.0)]);
        let id = SemigroupRep::powers(DenseOperator::identity(2));
        assert_eq!(id.apply(&GroupElement::Step(5), &x).unwrap(), x);
        let s = SemigroupRep::powers(swap());
        let e = Vector::from_vec(vec![c(1.0), c(0.0)]);
        assert_eq!(s.apply(&GroupElement::Step(1), &e).unwrap(), Vector::from_vec(vec![c(0.0), c(1.0)]));
        assert!((s.bound() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_time_and_wrong_carrier_are_domain_errors() {
        let a = DenseOperator::identity(2).scaled(c(-1.0));
        let rep = SemigroupRep::one_parameter(a, 4.0).unwrap();
        let x = Vector::from_element(2, c(1.0));
        assert!(matches!(rep.apply(&GroupElement::Time(-0.5), &x), Err(Error::Domain(_))));
        assert!(matches!(rep.apply(&GroupElement::Step(1), &x), Err(Error::Domain(_))));
    }

    #[test]
    fn non_commuting_generators_are_refused() {
        let a = DenseOperator::from_real_rows(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let b = DenseOperator::from_real_rows(2, &[1.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(SemigroupRep::abelian(vec![a, b]), Err(Error::Refused(_))));
    }

    #[test]
    fn finite_group_table() {
        let g = SemigroupRep::finite_group(vec![DenseOperator::identity(2), swap()]).unwrap();
        match g.kind() {
            RepKind::FiniteGroup { products, .. } => assert_eq!(products, &vec![vec![0, 1], vec![1, 0]]),
            _ => unreachable!(),
        }
        assert!(SemigroupRep::finite_group(vec![swap()]).is_err());
    }

    #[test]
    fn modulated_powers_pick_up_lambda_to_the_n() {
        let rep = SemigroupRep::powers(DenseOperator::identity(1)).modulated(Character::Circle { theta: 0.5 }).unwrap();
        let x = Vector::from_element(1, c(1.0));
        let y = rep.apply(&GroupElement::Step(3), &x).unwrap();
        assert!((y[0] - c(-1.0)).norm() < 1e-15);
        assert!(rep.modulated(Character::Frequency { r: 1.0 }).is_err());
    }
}
