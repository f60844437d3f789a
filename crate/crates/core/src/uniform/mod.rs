// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Uniform families of ergodic nets over a compact index set `I`: one
//! representation `S_i` per index, sharing a net scheme and a uniform bound.
//!
//! Compact index sets are sampled on finite equispaced grids. Every sup over
//! `I` is a sup over the grid, and profiles are recomputed on a refined grid
//! as a stability check; nothing here certifies values between grid points.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::mean_ergodic::{mean_ergodic_projection, DEFAULT_RANK_TOL};
use crate::nets::koopman::{koopman_abel, koopman_cesaro, koopman_folner};
use crate::nets::{self, chain_weights, ChainRule, FolnerSet, NetScheme, MAX_RECORDED_SUPPORT};
use crate::operators::{Character, Cocycle, DynamicsMap, GroupElement, KoopmanOperator, Observable, RepKind, SemigroupRep};
use crate::space::{SampleGrid, Vector, C64};


/// Largest number of index points a grid may expand to.
pub const MAX_INDEX_POINTS: usize = 1 << 20;

/// Relative slack on the quadrature-based bounds (Simpson tolerance is 1e-10).
const QUAD_SLACK: f64 = 1e-8;

/// The compact index set being sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum IndexModel {
    /// `lambda = e^{2 pi i theta}` on the unit circle.
    Circle,
    /// Characters `g -> e^{2 pi i <theta, g>}` of `N^k`.
    Torus { k: usize },
    /// Frequencies `r` in `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
    /// A finite list (cocycles, or characters of a finite group).
    Finite { count: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexGrid {
    #[serde(flatten)]
    pub model: IndexModel,
    /// Points per axis of a continuum model; ignored for finite lists.
    pub samples: usize,
    /// Factor by which the refined grid multiplies `samples`.
    pub refinement: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolution {
    Base,
    Refined,
}

/// One sampled index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "index", rename_all = "snake_case")]
pub enum IndexPoint {
    Lambda { theta: f64 },
    Torus { thetas: Vec<f64> },
    Frequency { r: f64 },
    Item { i: usize },
}

impl IndexPoint {
    pub fn label(&self) -> String {
        match self {
            IndexPoint::Lambda { theta } => format!("theta={theta}"),
            IndexPoint::Torus { thetas } => {
                let parts: Vec<String> = thetas.iter().map(|t| t.to_string()).collect();
                format!("thetas=({})", parts.join(","))
            }
            IndexPoint::Frequency { r } => format!("r={r}"),
            IndexPoint::Item { i } => format!("item={i}"),
        }
    }
}

impl IndexGrid {
    pub fn new(model: IndexModel, samples: usize, refinement: usize) -> Result<Self> {
        let g = IndexGrid { model, samples, refinement };
        g.validate()?;
        Ok(g)
    }

    pub fn circle(samples: usize) -> Result<Self> {
        IndexGrid::new(IndexModel::Circle, samples, 2)
    }

    pub fn torus(k: usize, samples: usize) -> Result<Self> {
        IndexGrid::new(IndexModel::Torus { k }, samples, 2)
    }

    pub fn interval(lo: f64, hi: f64, samples: usize) -> Result<Self> {
        IndexGrid::new(IndexModel::Interval { lo, hi }, samples, 2)
    }

    pub fn finite(count: usize) -> Result<Self> {
        IndexGrid::new(IndexModel::Finite { count }, count, 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(contract("index grid needs at least one sample"));
        }
        if self.refinement < 2 {
            return Err(contract("refinement factor must be >= 2"));
        }
        match &self.model {
            IndexModel::Torus { k } if *k == 0 => Err(contract("torus needs dimension >= 1")),
            IndexModel::Interval { lo, hi } if lo.is_nan() || hi.is_nan() || lo > hi => {
                Err(contract("frequency interval needs lo <= hi"))
            }
            IndexModel::Interval { lo, hi } if !lo.is_finite() || !hi.is_finite() => Err(Error::Refused(
                "unbounded frequency set: no equicontinuity certificate".into(),
            )),
            IndexModel::Finite { count } if *count == 0 => Err(contract("finite index list is empty")),
            _ => Ok(()),
        }
    }

    /// Points per axis at the given resolution.
    pub fn per_axis(&self, res: Resolution) -> usize {
        match res {
            Resolution::Base => self.samples,
            Resolution::Refined => self.samples * self.refinement,
        }
    }

    pub fn points(&self, res: Resolution) -> Result<Vec<IndexPoint>> {
        self.validate()?;
        let m = self.per_axis(res);
        let circle = |m: usize| (0..m).map(move |j| j as f64 / m as f64);
        Ok(match &self.model {
            IndexModel::Circle => circle(m).map(|theta| IndexPoint::Lambda { theta }).collect(),
            IndexModel::Torus { k } => {
                let total = u32::try_from(*k)
                    .ok()
                    .and_then(|k| m.checked_pow(k))
                    .filter(|&t| t <= MAX_INDEX_POINTS)
                    .ok_or_else(|| Error::Refused(format!("torus grid {m}^{k} exceeds {MAX_INDEX_POINTS} points")))?;
                (0..total)
                    .map(|mut flat| {
                        let mut thetas = vec![0.0; *k];
                        for t in thetas.iter_mut() {
                            *t = (flat % m) as f64 / m as f64;
                            flat /= m;
                        }
                        IndexPoint::Torus { thetas }
                    })
                    .collect()
            }
            IndexModel::Interval { lo, hi } => {
                if lo == hi || m == 1 {
                    vec![IndexPoint::Frequency { r: *lo }]
                } else {
                    (0..m)
                        .map(|j| IndexPoint::Frequency { r: lo + (hi - lo) * j as f64 / (m - 1) as f64 })
                        .collect()
                }
            }
            IndexModel::Finite { count } => (0..*count).map(|i| IndexPoint::Item { i }).collect(),
        })
    }

    fn frequency_bound(&self) -> f64 {
        match self.model {
            IndexModel::Interval { lo, hi } => lo.abs().max(hi.abs()),
            _ => 0.0,
        }
    }
}

/// Which of the six standard constructions a family follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// Cesàro means of `lambda S`, `lambda` on the circle.
    A,
    /// Abel means of `lambda S`.
    B,
    /// Nets of Koopman operators twisted by a list of unitary cocycles.
    C,
    /// Time averages of `e^{2 pi i r t} S(t)` with `r` in a bounded set.
    D,
    /// Convex chains of an abelian representation twisted by torus characters.
    E,
    /// Følner averages twisted by a family of characters.
    F,
}

/// What the family is built from.
#[derive(Clone, Debug)]
pub enum FamilyBase {
    Rep(SemigroupRep),
    /// A finite group indexed by explicit character tables.
    GroupCharacters { rep: SemigroupRep, tables: Vec<Vec<C64>> },
    Koopman { dynamics: DynamicsMap, cocycles: Vec<Cocycle>, grid: Arc<SampleGrid> },
}

/// A vector of `C^d`, or a function with a certified bound on its sup norm.
#[derive(Clone, Debug)]
pub enum Probe {
    Vector(Vector),
    Function { f: Observable, sup: f64 },
}

impl Probe {
    pub fn norm(&self) -> f64 {
        match self {
            Probe::Vector(v) => v.norm(),
            Probe::Function { sup, .. } => *sup,
        }
    }
}

#[derive(Clone, Debug)]
enum Member {
    Rep(SemigroupRep),
    Koopman(Arc<KoopmanOperator>),
}

#[derive(Clone, Debug)]
pub struct UniformFamily {
    kind: FamilyKind,
    base: FamilyBase,
    index: IndexGrid,
    bound: f64,
}

/// Builds a family, checking that base, kind and index set fit together.
pub fn build_family(kind: FamilyKind, base: FamilyBase, index: IndexGrid) -> Result<UniformFamily> {
    index.validate()?;
    let carrier_fits = |rep: &SemigroupRep| match (rep.kind(), &index.model) {
        (RepKind::Powers { .. }, IndexModel::Circle) => true,
        (RepKind::Abelian { generators }, IndexModel::Torus { k }) => generators.len() == *k,
        (RepKind::OneParameter { .. }, IndexModel::Interval { .. }) => true,
        (RepKind::FiniteGroup { .. }, IndexModel::Finite { count }) => *count == 1,
        _ => false,
    };
    let bound = match (kind, &base) {
        (FamilyKind::A | FamilyKind::B, FamilyBase::Rep(rep)) => {
            let op = rep.single_operator()?;
            let norm = crate::operators::dense::spectral_norm(op.matrix());
            if norm > 1.0 + 1e-12 {
                return Err(contract(format!("base operator is not a contraction (norm {norm})")));
            }
            if index.model != IndexModel::Circle {
                return Err(contract("modulated Cesàro/Abel families are indexed by the circle"));
            }
            1.0
        }
        (FamilyKind::C, FamilyBase::Koopman { cocycles, grid, dynamics }) => {
            if index.model != (IndexModel::Finite { count: cocycles.len() }) {
                return Err(contract("Koopman families are indexed by their cocycle list"));
            }
            if grid.space() != dynamics.space() {
                return Err(contract("norm grid lives on a different space than the dynamics"));
            }
            let w = cocycles.first().map(Cocycle::width);
            if cocycles.iter().any(|c| Some(c.width()) != w) {
                return Err(contract("cocycles have different widths"));
            }
            1.0
        }
        (FamilyKind::D, FamilyBase::Rep(rep)) if matches!(rep.kind(), RepKind::OneParameter { .. }) => {
            if !matches!(index.model, IndexModel::Interval { .. }) {
                return Err(contract("time-average families are indexed by a frequency interval"));
            }
            rep.bound()
        }
        (FamilyKind::E, FamilyBase::Rep(rep)) if matches!(rep.kind(), RepKind::Abelian { .. }) => {
            if !carrier_fits(rep) {
                return Err(contract("chain families need one torus axis per generator"));
            }
            rep.bound()
        }
        (FamilyKind::F, FamilyBase::Rep(rep)) => {
            if !carrier_fits(rep) {
                return Err(contract("index set does not match the representation's characters"));
            }
            rep.bound()
        }
        (FamilyKind::F, FamilyBase::GroupCharacters { rep, tables }) => {
            if index.model != (IndexModel::Finite { count: tables.len() }) {
                return Err(contract("finite-group families are indexed by their character list"));
            }
            for t in tables {
                rep.modulated(Character::Table { values: t.clone() })?;
            }
            rep.bound()
        }
        _ => return Err(contract(format!("base does not fit a family of kind {kind:?}"))),
    };
    Ok(UniformFamily { kind, base, index, bound })
}

/// The shared convex support `g_1..g_N` of `A_alpha` with its weights, which
/// are the same for every index (the twist sits in `S_{i,g}`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproximationReport {
    /// Sup over the grid of `||A_alpha x - sum_j w_j S_{i,g_j} x||`.
    pub defect: f64,
    pub support_size: u64,
    /// Recorded support and weights; None when larger than the recording cap
    /// or (time averages) when the quadrature nodes differ between indices.
    pub support: Option<Vec<(GroupElement, f64)>>,
    /// Series terms kept by the normalized Abel truncation.
    pub abel_terms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub sup: f64,
    pub argmax: IndexPoint,
    pub points: usize,
    /// The a-priori bound for this kind, net and group element, if known.
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
}

/// `i -> P_i x` for a convergence profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Targets {
    Zero,
    /// The mean ergodic projection of each `S_i` (finite-dimensional bases).
    MeanErgodic,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    /// Scalar index of the net: `N`, `r`, `s` or chain length.
    pub alpha: f64,
    pub sup_defect: f64,
    pub sup_defect_refined: f64,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceProfile {
    pub rows: Vec<ProfileRow>,
    pub grid_stable: bool,
    /// Whether the refined sups never increase along alpha; None when the
    /// profile is grid-unstable.
    pub monotone_decay: Option<bool>,
}

impl ConvergenceProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,sup_defect,sup_defect_refined,stable\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                fmt17(r.alpha),
                fmt17(r.sup_defect),
                fmt17(r.sup_defect_refined),
                r.stable
            ));
        }
        s
    }
}

/// Floats with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Two grid sups agree when they differ by less than 10% (or both vanish).
pub fn sups_agree(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs());
    scale <= 1e-12 || (a - b).abs() < 0.1 * scale
}

/// Scalar index of a scheme, for tables.
pub fn alpha_value(alpha: &NetScheme) -> f64 {
    match alpha {
        NetScheme::Cesaro { n } => *n as f64,
        NetScheme::Abel { r, .. } => *r,
        NetScheme::TimeAverage { s, .. } => *s,
        NetScheme::ConvexChain { length, .. } => *length as f64,
        NetScheme::Folner { set } => match set {
            FolnerSet::Interval { len, .. } => *len as f64,
            FolnerSet::Box { lens, .. } => lens.iter().map(|&l| l as f64).product(),
            FolnerSet::WholeGroup => 1.0,
            FolnerSet::TimeInterval { len, .. } => *len,
        },
    }
}

fn step_count(g: &GroupElement) -> Result<u64> {
    match g {
        GroupElement::Step(k) => Ok(*k),
        _ => Err(contract("expected an element of N")),
    }
}

impl UniformFamily {
    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn index(&self) -> &IndexGrid {
        &self.index
    }

    /// Uniform bound `M` on `||S_{i,g}||`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn base(&self) -> &FamilyBase {
        &self.base
    }

    /// The twisted representation `S_i` for a representation-based family.
    pub fn member_rep(&self, i: &IndexPoint) -> Result<SemigroupRep> {
        match self.member(i)? {
            Member::Rep(r) => Ok(r),
            Member::Koopman(_) => Err(contract("Koopman families have no matrix representation")),
        }
    }

    fn member(&self, i: &IndexPoint) -> Result<Member> {
        let rep_with = |rep: &SemigroupRep, c: Character| Ok(Member::Rep(rep.modulated(c)?.with_bound(self.bound)?));
        match (&self.base, i) {
            (FamilyBase::Rep(rep), IndexPoint::Lambda { theta }) => rep_with(rep, Character::Circle { theta: *theta }),
            (FamilyBase::Rep(rep), IndexPoint::Torus { thetas }) => {
                rep_with(rep, Character::Torus { thetas: thetas.clone() })
            }
            (FamilyBase::Rep(rep), IndexPoint::Frequency { r }) => rep_with(rep, Character::Frequency { r: *r }),
            (FamilyBase::Rep(rep), IndexPoint::Item { .. }) => rep_with(rep, Character::Trivial),
            (FamilyBase::GroupCharacters { rep, tables }, IndexPoint::Item { i }) => {
                rep_with(rep, Character::Table { values: tables[*i].clone() })
            }
            (FamilyBase::Koopman { dynamics, cocycles, .. }, IndexPoint::Item { i }) => Ok(Member::Koopman(Arc::new(
                KoopmanOperator::with_cocycle(dynamics.clone(), cocycles[*i].clone()),
            ))),
            _ => Err(contract("index point does not belong to this family")),
        }
    }

    /// The scheme a member actually runs: time steps are tightened so each
    /// Simpson panel sees at most a quarter period of the fastest character.
    fn effective(&self, alpha: &NetScheme) -> NetScheme {
        let rmax = self.index.frequency_bound();
        let cap = |h: f64| if rmax > 0.0 { h.min(0.25 / rmax) } else { h };
        match alpha {
            NetScheme::TimeAverage { s, h } => NetScheme::TimeAverage { s: *s, h: cap(*h).min(*s) },
            NetScheme::Folner { set: FolnerSet::TimeInterval { start, len, h } } => NetScheme::Folner {
                set: FolnerSet::TimeInterval { start: *start, len: *len, h: cap(*h).min(*len) },
            },
            other => other.clone(),
        }
    }

    /// Checks that `alpha` belongs to the scheme family of this kind.
    pub fn check_scheme(&self, alpha: &NetScheme) -> Result<()> {
        alpha.validate()?;
        let ok = match (self.kind, alpha) {
            (FamilyKind::A, NetScheme::Cesaro { .. }) => true,
            (FamilyKind::B, NetScheme::Abel { .. }) => true,
            (FamilyKind::C, NetScheme::Cesaro { .. } | NetScheme::Abel { .. }) => true,
            (FamilyKind::C, NetScheme::Folner { set: FolnerSet::Interval { .. } }) => true,
            (FamilyKind::D, NetScheme::TimeAverage { .. }) => true,
            (FamilyKind::D, NetScheme::Folner { set: FolnerSet::TimeInterval { start, .. } }) => *start == 0.0,
            (FamilyKind::E, NetScheme::ConvexChain { .. }) => true,
            (FamilyKind::F, NetScheme::Folner { set }) => matches!(
                (set, &self.index.model),
                (FolnerSet::Interval { .. }, IndexModel::Circle)
                    | (FolnerSet::Box { .. }, IndexModel::Torus { .. })
                    | (FolnerSet::TimeInterval { .. }, IndexModel::Interval { .. })
                    | (FolnerSet::WholeGroup, IndexModel::Finite { .. })
            ),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(contract(format!("scheme {alpha:?} is not a net of a kind-{:?} family", self.kind)))
        }
    }

    fn check_probe(&self, x: &Probe) -> Result<()> {
        match (&self.base, x) {
            (FamilyBase::Koopman { .. }, Probe::Function { sup, .. }) if *sup >= 0.0 => Ok(()),
            (FamilyBase::Koopman { .. }, _) => Err(contract("Koopman families act on functions with a sup bound")),
            (_, Probe::Vector(_)) => Ok(()),
            _ => Err(contract("matrix families act on vectors")),
        }
    }

    fn net(&self, m: &Member, alpha: &NetScheme, x: &Probe) -> Result<Probe> {
        match (m, x) {
            (Member::Rep(rep), Probe::Vector(v)) => Ok(Probe::Vector(nets::evaluate(&self.effective(alpha), rep, v)?)),
            (Member::Koopman(k), Probe::Function { f, sup }) => {
                let g = match alpha {
                    NetScheme::Cesaro { n } => koopman_cesaro(k, *n, 0.0, f)?,
                    NetScheme::Folner { set: FolnerSet::Interval { start, len } } => {
                        koopman_folner(k, *start, *len, 0.0, f)?
                    }
                    NetScheme::Abel { r, tail_eps } => koopman_abel(k, *r, *tail_eps, 0.0, f, *sup)?.0,
                    _ => return Err(contract("scheme does not act on Koopman families")),
                };
                // averages of unitary-twisted orbits never exceed the input's sup
                Ok(Probe::Function { f: g, sup: *sup })
            }
            _ => Err(contract("probe does not match the family")),
        }
    }

    fn act(&self, m: &Member, g: &GroupElement, x: &Probe) -> Result<Probe> {
        match (m, x) {
            (Member::Rep(rep), Probe::Vector(v)) => Ok(Probe::Vector(rep.apply(g, v)?)),
            (Member::Koopman(k), Probe::Function { f, sup }) => {
                Ok(Probe::Function { f: k.power(step_count(g)?, f)?, sup: *sup })
            }
            _ => Err(contract("probe does not match the family")),
        }
    }

    fn distance(&self, a: &Probe, b: &Probe) -> Result<f64> {
        match (a, b, &self.base) {
            (Probe::Vector(u), Probe::Vector(v), _) => Ok((u - v).norm()),
            (Probe::Function { f, .. }, Probe::Function { f: g, .. }, FamilyBase::Koopman { grid, .. }) => {
                Ok(f.minus(g)?.sample(grid)?.grid_sup())
            }
            _ => Err(contract("probes of different types")),
        }
    }

    /// Max of `f` over the grid, evaluated in parallel; ties keep the first
    /// point so the reported argmax does not depend on scheduling.
    fn grid_sup<F>(&self, res: Resolution, f: F) -> Result<(f64, IndexPoint, usize)>
    where
        F: Fn(&Member) -> Result<f64> + Sync,
    {
        let points = self.index.points(res)?;
        let values: Vec<f64> =
            points.par_iter().map(|p| f(&self.member(p)?)).collect::<Result<Vec<_>>>()?;
        let mut best = 0;
        for (j, v) in values.iter().enumerate() {
            if v.is_nan() {
                return Err(Error::Domain(format!("defect at {} is NaN", points[j].label())));
            }
            if *v > values[best] {
                best = j;
            }
        }
        Ok((values[best], points[best].clone(), points.len()))
    }

    /// Convex support of `A_alpha` shared by all indices, if it is a finite
    /// combination of group elements (not for Abel or time averages).
    pub fn shared_support(&self, alpha: &NetScheme) -> Result<Option<Vec<(GroupElement, f64)>>> {
        self.check_scheme(alpha)?;
        let interval = |start: u64, len: u64| {
            (len <= MAX_RECORDED_SUPPORT as u64)
                .then(|| (0..len).map(|j| (GroupElement::Step(start + j), 1.0 / len as f64)).collect())
        };
        Ok(match alpha {
            NetScheme::Cesaro { n } => interval(0, *n),
            NetScheme::Folner { set: FolnerSet::Interval { start, len } } => interval(*start, *len),
            NetScheme::Folner { set: FolnerSet::Box { start, lens } } => {
                let size = lens.iter().try_fold(1u64, |a, &l| a.checked_mul(l));
                match size {
                    Some(n) if n <= MAX_RECORDED_SUPPORT as u64 => Some(
                        (0..n)
                            .map(|mut flat| {
                                let g = start
                                    .iter()
                                    .zip(lens)
                                    .map(|(&s0, &l)| {
                                        let c = flat % l;
                                        flat /= l;
                                        s0 + c
                                    })
                                    .collect();
                                (GroupElement::Multi(g), 1.0 / n as f64)
                            })
                            .collect(),
                    ),
                    _ => None,
                }
            }
            NetScheme::Folner { set: FolnerSet::WholeGroup } => {
                let rep = match &self.base {
                    FamilyBase::Rep(r) | FamilyBase::GroupCharacters { rep: r, .. } => r,
                    FamilyBase::Koopman { .. } => unreachable!("checked scheme"),
                };
                match rep.kind() {
                    RepKind::FiniteGroup { elements, .. } => {
                        let n = elements.len();
                        Some((0..n).map(|i| (GroupElement::Member(i), 1.0 / n as f64)).collect())
                    }
                    _ => return Err(contract("whole-group averages need a finite group")),
                }
            }
            NetScheme::ConvexChain { rule, length } => {
                let k = match &self.index.model {
                    IndexModel::Torus { k } => *k,
                    _ => 1,
                };
                chain_weights(*rule, k, *length)?.map(|w| {
                    w.terms.into_iter().map(|(g, c)| (GroupElement::Multi(g), c)).collect()
                })
            }
            _ => None,
        })
    }

    /// How far `A_alpha` is from a finite convex combination with support
    /// shared across the index set.
    pub fn approximation_defect(&self, alpha: &NetScheme, eps: f64, probes: &[Probe]) -> Result<ApproximationReport> {
        self.check_scheme(alpha)?;
        if !(eps > 0.0) {
            return Err(contract("approximation tolerance must be > 0"));
        }
        for x in probes {
            self.check_probe(x)?;
        }
        match alpha {
            NetScheme::Abel { r, .. } => self.abel_approximation(*r, eps, probes),
            NetScheme::TimeAverage { .. } | NetScheme::Folner { set: FolnerSet::TimeInterval { .. } } => {
                // Simpson weights are positive and sum to one, so the computed
                // net is itself convex; the defect is the quadrature error.
                let eff = self.effective(alpha);
                let (s, h) = match eff {
                    NetScheme::TimeAverage { s, h } => (s, h),
                    NetScheme::Folner { set: FolnerSet::TimeInterval { len, h, .. } } => (len, h),
                    _ => unreachable!(),
                };
                let (defect, _, _) = self.grid_sup(Resolution::Base, |m| {
                    let rep = match m {
                        Member::Rep(r) => r,
                        Member::Koopman(_) => unreachable!("time families are matrix families"),
                    };
                    probes.iter().try_fold(0.0f64, |acc, x| match x {
                        Probe::Vector(v) => Ok(acc.max(nets::time_average(rep, s, h, v)?.error_estimate)),
                        Probe::Function { .. } => unreachable!("checked probe"),
                    })
                })?;
                let panels = (s / h).ceil() as u64;
                Ok(ApproximationReport { defect, support_size: panels + 1, support: None, abel_terms: None })
            }
            _ => {
                let support = self.shared_support(alpha)?;
                let support_size = match (&support, alpha) {
                    (Some(s), _) => s.len() as u64,
                    (None, NetScheme::Cesaro { n }) => *n,
                    (None, NetScheme::Folner { set: FolnerSet::Interval { len, .. } }) => *len,
                    (None, NetScheme::Folner { set: FolnerSet::Box { lens, .. } }) => {
                        lens.iter().fold(1u64, |a, &l| a.saturating_mul(l))
                    }
                    (None, NetScheme::ConvexChain { rule, length }) => {
                        let k = match &self.index.model {
                            IndexModel::Torus { k } => *k,
                            _ => 1,
                        };
                        (0..*length).fold(1u64, |a, j| a.saturating_mul(rule.step_length(j, k)))
                    }
                    _ => 0,
                };
                Ok(ApproximationReport { defect: 0.0, support_size, support, abel_terms: None })
            }
        }
    }

    /// Abel means against the normalized partial sum over `{0..N-1}`, `N` the
    /// smallest count with `r^N < eps/2`.
    fn abel_approximation(&self, r: f64, eps: f64, probes: &[Probe]) -> Result<ApproximationReport> {
        let terms = smallest_abel_cut(r, eps);
        let norm = (1.0 - r) / (1.0 - r.powi(terms as i32));
        let weights: Vec<f64> = (0..terms).map(|n| norm * r.powi(n as i32)).collect();
        // reference: the series truncated far below eps
        let reference = NetScheme::Abel { r, tail_eps: eps * 1e-13 };
        let (defect, _, _) = self.grid_sup(Resolution::Base, |m| {
            probes.iter().try_fold(0.0f64, |acc, x| {
                let full = self.net(m, &reference, x)?;
                let partial = match (m, x) {
                    (Member::Rep(rep), Probe::Vector(v)) => {
                        let t = rep.single_operator()?;
                        let mut acc_v = Vector::zeros(v.len());
                        let mut p = v.clone();
                        for &w in &weights {
                            acc_v += &p * C64::new(w, 0.0);
                            p = t.apply(&p)?;
                        }
                        Probe::Vector(acc_v)
                    }
                    (Member::Koopman(k), Probe::Function { f, sup }) => Probe::Function {
                        f: k.weighted_orbit(f, 0, weights.iter().map(|&w| C64::new(w, 0.0)).collect())?,
                        sup: *sup,
                    },
                    _ => return Err(contract("probe does not match the family")),
                };
                Ok(acc.max(self.distance(&full, &partial)?))
            })
        })?;
        let support = weights.iter().enumerate().map(|(n, &w)| (GroupElement::Step(n as u64), w)).collect();
        Ok(ApproximationReport { defect, support_size: terms, support: Some(support), abel_terms: Some(terms) })
    }

    /// Sup over the grid of `||A_alpha x - A_alpha S_{i,g} x||`, with the
    /// a-priori bound of the kind when one is known.
    pub fn uniform_invariance_defect(&self, g: &GroupElement, x: &Probe, alpha: &NetScheme) -> Result<InvarianceReport> {
        self.check_scheme(alpha)?;
        self.check_probe(x)?;
        let (sup, argmax, points) = self.grid_sup(Resolution::Base, |m| {
            let ax = self.net(m, alpha, x)?;
            let agx = self.net(m, alpha, &self.act(m, g, x)?)?;
            self.distance(&ax, &agx)
        })?;
        let bound = self.invariance_bound(alpha, g, x.norm())?;
        let within_bound = bound.map(|b| sup <= b + 1e-12 * self.bound * x.norm().max(1.0));
        Ok(InvarianceReport { sup, argmax, points, bound, within_bound })
    }

    /// A-priori bound on `||A_alpha x - A_alpha S_{i,g} x||` uniform in `i`.
    ///
    /// Averages over a Følner set `F`: `M ||x|| |F Δ Fg| / |F|` (Cesàro is the
    /// interval from 0). Abel: `2M(1 - r^k)||x||` plus the two truncated
    /// tails. Chains: `sum_i 2 k_i M^2 ||x|| / N_i`, `N_i` the longest step
    /// averaging generator `i`.
    pub fn invariance_bound(&self, alpha: &NetScheme, g: &GroupElement, xnorm: f64) -> Result<Option<f64>> {
        let m = self.bound;
        let folner = |set: &FolnerSet| -> Result<f64> { Ok(m * xnorm * set.relative_symmetric_difference(g)?) };
        Ok(match alpha {
            NetScheme::Cesaro { n } => Some(folner(&FolnerSet::Interval { start: 0, len: *n })?),
            NetScheme::Abel { r, tail_eps } => {
                let k = step_count(g)?;
                Some(2.0 * m * (1.0 - r.powf(k as f64)) * xnorm + 2.0 * tail_eps)
            }
            NetScheme::TimeAverage { s, .. } => {
                let set = FolnerSet::TimeInterval { start: 0.0, len: *s, h: *s };
                Some(folner(&set)? + 2.0 * QUAD_SLACK * m * xnorm)
            }
            NetScheme::Folner { set: set @ FolnerSet::TimeInterval { .. } } => {
                Some(folner(set)? + 2.0 * QUAD_SLACK * m * xnorm)
            }
            NetScheme::Folner { set } => Some(folner(set)?),
            NetScheme::ConvexChain { rule, length } => {
                let ks: Vec<u64> = match g {
                    GroupElement::Multi(ks) => ks.clone(),
                    GroupElement::Step(k) => vec![*k],
                    _ => return Err(contract("chains act on N^k")),
                };
                let mut total = 0.0;
                for (axis, &k) in ks.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let longest = (0..*length).filter(|j| j % ks.len() == axis).map(|j| rule.step_length(j, ks.len())).max();
                    match longest {
                        Some(n) => total += 2.0 * k as f64 * m * m * xnorm / n as f64,
                        None => total += 2.0 * m * m * xnorm,
                    }
                }
                Some(total)
            }
        })
    }

    /// Sup over the grid of `||A_alpha x - A_alpha A_beta x||`.
    pub fn chain_defect(&self, alpha: &NetScheme, beta: &NetScheme, x: &Probe) -> Result<f64> {
        self.check_scheme(alpha)?;
        self.check_scheme(beta)?;
        self.check_probe(x)?;
        let (sup, _, _) = self.grid_sup(Resolution::Base, |m| {
            let ax = self.net(m, alpha, x)?;
            let abx = self.net(m, alpha, &self.net(m, beta, x)?)?;
            self.distance(&ax, &abx)
        })?;
        Ok(sup)
    }

    /// Bound on [`chain_defect`](Self::chain_defect) from the invariance
    /// bounds, averaged over the convex weights of `A_beta`, plus
    /// `2M ||x||` times the normalized-truncation error for Abel `beta`.
    /// None when `A_beta` has no recorded support.
    pub fn chain_bound(&self, alpha: &NetScheme, beta: &NetScheme, xnorm: f64) -> Result<Option<f64>> {
        self.check_scheme(alpha)?;
        let (support, extra) = match beta {
            NetScheme::Abel { r, .. } => {
                // truncate where the dropped mass r^N is below 1e-12
                let terms = smallest_abel_cut(*r, 2e-12);
                let norm = (1.0 - r) / (1.0 - r.powi(terms as i32));
                let s = (0..terms).map(|n| (GroupElement::Step(n), norm * r.powi(n as i32))).collect();
                // normalized vs. full series differ by at most 2 r^N in weight mass
                (Some(s), 2.0 * r.powi(terms as i32) * self.bound * self.bound * xnorm)
            }
            _ => (self.shared_support(beta)?, 0.0),
        };
        let Some(support) = support else { return Ok(None) };
        let mut total = extra;
        for (g, w) in &support {
            let g = match (g, &self.index.model) {
                (GroupElement::Multi(v), IndexModel::Circle) if v.len() == 1 => GroupElement::Step(v[0]),
                _ => g.clone(),
            };
            match self.invariance_bound(alpha, &g, xnorm)? {
                Some(b) => total += w * b,
                None => return Ok(None),
            }
        }
        Ok(Some(total))
    }

    /// `sup_i ||A_alpha x - P_i x||` along the schemes, on the base and the
    /// refined grid.
    pub fn uniform_convergence_profile(&self, x: &Probe, targets: Targets, alphas: &[NetScheme]) -> Result<ConvergenceProfile> {
        self.check_probe(x)?;
        for a in alphas {
            self.check_scheme(a)?;
        }
        let target = |m: &Member| -> Result<Probe> {
            match (targets, m, x) {
                (Targets::Zero, Member::Rep(_), Probe::Vector(v)) => Ok(Probe::Vector(Vector::zeros(v.len()))),
                (Targets::Zero, Member::Koopman(_), Probe::Function { f, .. }) => {
                    Ok(Probe::Function { f: f.minus(f)?, sup: 0.0 })
                }
                (Targets::MeanErgodic, Member::Rep(rep), Probe::Vector(v)) => {
                    Ok(Probe::Vector(mean_ergodic_projection(rep, DEFAULT_RANK_TOL)?.apply(v)?))
                }
                _ => Err(contract("mean ergodic targets need a matrix family")),
            }
        };
        let sup_at = |res: Resolution, alpha: &NetScheme| -> Result<f64> {
            Ok(self.grid_sup(res, |m| self.distance(&self.net(m, alpha, x)?, &target(m)?))?.0)
        };
        let mut rows = Vec::with_capacity(alphas.len());
        for a in alphas {
            let base = sup_at(Resolution::Base, a)?;
            let refined = sup_at(Resolution::Refined, a)?;
            rows.push(ProfileRow {
                alpha: alpha_value(a),
                sup_defect: base,
                sup_defect_refined: refined,
                stable: sups_agree(base, refined),
            });
        }
        let grid_stable = rows.iter().all(|r| r.stable);
        let monotone_decay = grid_stable.then(|| {
            rows.windows(2)
                .all(|w| w[1].sup_defect_refined <= w[0].sup_defect_refined * (1.0 + 1e-9) + 1e-15)
        });
        Ok(ConvergenceProfile { rows, grid_stable, monotone_decay })
    }
}

/// Smallest `N >= 1` with `r^N < eps / 2`.
pub fn smallest_abel_cut(r: f64, eps: f64) -> u64 {
    let mut n = ((eps / 2.0).ln() / r.ln()).floor().max(1.0) as u64;
    while n > 1 && r.powi((n - 1) as i32) < eps / 2.0 {
        n -= 1;
    }
    while r.powi(n as i32) >= eps / 2.0 {
        n += 1;
    }
    n
}

/// A Cesàro scheme of each length.
pub fn cesaro_range(ns: &[u64]) -> Vec<NetScheme> {
    ns.iter().map(|&n| NetScheme::Cesaro { n }).collect()
}

/// A doubling chain of each length.
pub fn chain_range(lengths: &[usize]) -> Vec<NetScheme> {
    lengths.iter().map(|&length| NetScheme::ConvexChain { rule: ChainRule::Doubling, length }).collect()
}
