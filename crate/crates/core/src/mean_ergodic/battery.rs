// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{
    decomposition, dual_fix_space, fix_space, oblique_projection, orbit_subspace, range_space, restrict,
    separation_from_pairing, zero_element_check, Decomposition, SeparationResult, SubspaceBasis, ZeroElementReport,
    DEFAULT_RANK_TOL, PRINCIPAL_ANGLE_TOL,
};
use crate::error::{contract, Error, Result};
use crate::nets::{net_matrix, ChainRule, FolnerSet, NetScheme};
use crate::operators::{spectral_norm, Matrix, RepKind, SemigroupRep};
use crate::space::Vector;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BatteryOptions {
    pub rank_tol: f64,
    pub angle_tol: f64,
    /// Convergence threshold for the nets, relative to the bound `M`.
    pub net_tol: f64,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        BatteryOptions { rank_tol: DEFAULT_RANK_TOL, angle_tol: PRINCIPAL_ANGLE_TOL, net_tol: 1e-3 }
    }
}

/// One ergodic net, sampled along an increasing sequence of indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetPath {
    pub label: String,
    pub steps: Vec<NetScheme>,
}

impl NetPath {
    /// Cesàro means of length `2^e` for each listed exponent.
    pub fn cesaro_dyadic(exps: impl IntoIterator<Item = u32>) -> Self {
        NetPath { label: "cesaro".into(), steps: exps.into_iter().map(|e| NetScheme::Cesaro { n: 1 << e }).collect() }
    }

    /// Abel means at `r = 1 - 2^{-j}`.
    pub fn abel_dyadic(js: impl IntoIterator<Item = i32>, tail_eps: f64) -> Self {
        NetPath {
            label: "abel".into(),
            steps: js.into_iter().map(|j| NetScheme::Abel { r: 1.0 - 2f64.powi(-j), tail_eps }).collect(),
        }
    }

    pub fn chain(lengths: impl IntoIterator<Item = usize>) -> Self {
        NetPath {
            label: "convex_chain".into(),
            steps: lengths.into_iter().map(|length| NetScheme::ConvexChain { rule: ChainRule::Doubling, length }).collect(),
        }
    }

    /// Cubes `{0..2^e - 1}^k`.
    pub fn boxes(k: usize, exps: impl IntoIterator<Item = u32>) -> Self {
        NetPath {
            label: "folner_box".into(),
            steps: exps
                .into_iter()
                .map(|e| NetScheme::Folner { set: FolnerSet::Box { start: vec![0; k], lens: vec![1 << e; k] } })
                .collect(),
        }
    }

    /// Time averages over `[0, 2^e]`.
    pub fn time_dyadic(exps: impl IntoIterator<Item = i32>, h: f64) -> Self {
        NetPath {
            label: "time_average".into(),
            steps: exps
                .into_iter()
                .map(|e| {
                    let s = 2f64.powi(e);
                    NetScheme::TimeAverage { s, h: h.min(s) }
                })
                .collect(),
        }
    }
}

/// Nets suited to the carrier of `rep`.
pub fn default_paths(rep: &SemigroupRep) -> Vec<NetPath> {
    match rep.kind() {
        RepKind::Powers { .. } => {
            vec![NetPath::cesaro_dyadic(4..=20), NetPath::abel_dyadic(4..=16, 1e-14), NetPath::chain(4..=16)]
        }
        RepKind::Abelian { generators } => {
            let k = generators.len();
            vec![NetPath::chain((3..=16).map(|j| j * k)), NetPath::boxes(k, 4..=16)]
        }
        RepKind::OneParameter { .. } => vec![NetPath::time_dyadic(1..=10, 0.5)],
        RepKind::FiniteGroup { .. } => {
            vec![NetPath { label: "whole_group".into(), steps: vec![NetScheme::Folner { set: FolnerSet::WholeGroup }] }]
        }
    }
}

/// Per-net measurements at operator level (all coordinate inputs at once).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathOutcome {
    pub label: String,
    /// `||(I - Pi_Fix) A_k||` along the path.
    pub dist_to_fix: Vec<f64>,
    /// `||A_k - P||` along the path, when `P` exists.
    pub error_to_projection: Option<Vec<f64>>,
    /// `||A_last - A_prev||`.
    pub last_increment: f64,
    pub cluster_in_fix: bool,
    pub converges_to_fix: bool,
    pub converges_to_projection: Option<bool>,
}

/// Verdict on one of the eight equivalent conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub id: u8,
    pub name: String,
    pub holds: Option<bool>,
    /// The number the verdict is read from.
    pub measure: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerVectorReport {
    pub x: Vector,
    pub orbit_dim: usize,
    pub conditions: Vec<Condition>,
    pub consistent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanErgodicReport {
    pub dim: usize,
    pub fix_basis: SubspaceBasis,
    pub dual_fix_basis: SubspaceBasis,
    pub range_basis: SubspaceBasis,
    pub separation: SeparationResult,
    pub decomposition: Decomposition,
    pub projection: Option<Matrix>,
    pub zero_element: Option<ZeroElementReport>,
    pub paths: Vec<PathOutcome>,
    pub conditions: Vec<Condition>,
    pub consistent: bool,
    pub per_vector: Option<PerVectorReport>,
}

impl MeanErgodicReport {
    pub fn holds(&self, id: u8) -> Option<bool> {
        self.conditions.iter().find(|c| c.id == id).and_then(|c| c.holds)
    }
}

const NAMES: [&str; 8] = [
    "mean ergodic with zero element P",
    "convex orbit hull meets Fix",
    "Fix separates dual Fix",
    "Fix plus closed range is the whole space",
    "nets have a weak cluster point in Fix",
    "weak nets converge weakly to a fixed point",
    "strong nets converge weakly to a fixed point",
    "strong nets converge strongly to a fixed point",
];

fn condition(id: u8, holds: bool, measure: f64) -> Condition {
    Condition { id, name: NAMES[id as usize - 1].into(), holds: Some(holds), measure: Some(measure) }
}

fn all_agree(conditions: &[Condition]) -> bool {
    let mut seen = conditions.iter().filter_map(|c| c.holds);
    match seen.next() {
        Some(first) => seen.all(|h| h == first),
        None => true,
    }
}

fn measure_path(
    path: &NetPath,
    rep: &SemigroupRep,
    fix_proj: &Matrix,
    p: Option<&Matrix>,
    thr: f64,
    rank_tol: f64,
) -> Result<PathOutcome> {
    if path.steps.is_empty() {
        return Err(contract(format!("net path {} has no steps", path.label)));
    }
    let d = rep.dim();
    let leave_fix = Matrix::identity(d, d) - fix_proj;
    let mats = path.steps.iter().map(|s| net_matrix(s, rep)).collect::<Result<Vec<_>>>()?;
    let dist: Vec<f64> = mats.iter().map(|a| spectral_norm(&(&leave_fix * a))).collect();
    let err: Option<Vec<f64>> = p.map(|p| mats.iter().map(|a| spectral_norm(&(a - p))).collect());
    let last = mats.len() - 1;
    let last_increment = if last == 0 { 0.0 } else { spectral_norm(&(&mats[last] - &mats[last - 1])) };
    let tail = &dist[last / 2..];
    let cluster_in_fix = tail.iter().cloned().fold(f64::INFINITY, f64::min) <= thr;
    let converges_to_fix = dist[last] <= thr && last_increment <= thr;
    let converges_to_projection =
        err.as_ref().map(|e| e[last] <= thr && e[last] <= e[0] * (1.0 + 1e-9) + rank_tol);
    Ok(PathOutcome {
        label: path.label.clone(),
        dist_to_fix: dist,
        error_to_projection: err,
        last_increment,
        cluster_in_fix,
        converges_to_fix,
        converges_to_projection,
    })
}

fn analyze(rep: &SemigroupRep, paths: &[NetPath], opts: &BatteryOptions) -> Result<MeanErgodicReport> {
    if paths.is_empty() {
        return Err(contract("the battery needs at least one net path"));
    }
    let tol = opts.rank_tol;
    let fix = fix_space(rep, tol)?;
    let dual = dual_fix_space(rep, tol)?;
    let range = range_space(rep, tol)?;
    let separation = separation_from_pairing(&(dual.matrix().adjoint() * fix.matrix()), tol);
    let dec = decomposition(&fix, &range, opts.angle_tol);
    let projection = if dec.holds { Some(oblique_projection(&fix, &range)?) } else { None };

    let scale = rep.bound().max(1.0);
    let thr = opts.net_tol * scale;
    let zero_element = match &projection {
        Some(p) => Some(zero_element_check(p, rep, tol * scale * spectral_norm(p).max(1.0))?),
        None => None,
    };
    let fix_proj = fix.orthogonal_projector();
    let outcomes = paths
        .iter()
        .map(|path| measure_path(path, rep, &fix_proj, projection.as_ref(), thr, tol))
        .collect::<Result<Vec<_>>>()?;

    let max_of = |f: &dyn Fn(&PathOutcome) -> f64| outcomes.iter().map(f).fold(0.0, f64::max);
    let last_dist = |o: &PathOutcome| *o.dist_to_fix.last().expect("nonempty");
    let last_err = |o: &PathOutcome| o.error_to_projection.as_ref().map_or(f64::INFINITY, |e| *e.last().expect("nonempty"));

    let c1 = {
        let ze = zero_element.as_ref();
        let holds = ze.is_some_and(|z| z.passes) && outcomes.iter().all(|o| o.converges_to_projection == Some(true));
        let measure = ze.map_or(f64::INFINITY, |z| z.right.max(z.left).max(z.idempotence).max(max_of(&last_err)));
        condition(1, holds, measure)
    };
    let best_dist = outcomes.iter().map(last_dist).fold(f64::INFINITY, f64::min);
    let c2 = condition(2, best_dist <= thr, best_dist);
    let c3 = condition(3, separation.separates, (separation.dual_dim - separation.pairing_rank) as f64);
    let c4 = condition(4, dec.holds, dec.min_angle);
    let tail_min = |o: &PathOutcome| o.dist_to_fix[(o.dist_to_fix.len() - 1) / 2..].iter().cloned().fold(f64::INFINITY, f64::min);
    let c5 = condition(5, outcomes.iter().all(|o| o.cluster_in_fix), max_of(&tail_min));
    // weak and strong topologies agree in finite dimension
    let weak = max_of(&|o: &PathOutcome| last_dist(o).max(o.last_increment));
    let weak_holds = outcomes.iter().all(|o| o.converges_to_fix);
    let c6 = condition(6, weak_holds, weak);
    let c7 = condition(7, weak_holds, weak);
    let strong_holds = weak_holds && outcomes.iter().all(|o| o.converges_to_projection != Some(false));
    let c8 = condition(8, strong_holds, if projection.is_some() { max_of(&last_err) } else { weak });

    let conditions = vec![c1, c2, c3, c4, c5, c6, c7, c8];
    let consistent = all_agree(&conditions);
    Ok(MeanErgodicReport {
        dim: rep.dim(),
        fix_basis: fix,
        dual_fix_basis: dual,
        range_basis: range,
        separation,
        decomposition: dec,
        projection,
        zero_element,
        paths: outcomes,
        conditions,
        consistent,
        per_vector: None,
    })
}

fn verdicts(conditions: &[Condition]) -> String {
    conditions
        .iter()
        .map(|c| format!("({}) {}", c.id, c.holds.map_or("-", |h| if h { "T" } else { "F" })))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Evaluates conditions (1)-(8) on `rep`, and on `Y_x` when `x` is given.
///
/// Finite-dimensional bounded representations are always mean ergodic, so any
/// disagreement between the verdicts is reported as [`Error::Inconsistent`].
pub fn equivalence_battery(
    rep: &SemigroupRep,
    x: Option<&Vector>,
    paths: &[NetPath],
    opts: &BatteryOptions,
) -> Result<MeanErgodicReport> {
    let mut report = analyze(rep, paths, opts)?;
    if !report.consistent {
        return Err(Error::Inconsistent(verdicts(&report.conditions)));
    }
    if let Some(x) = x {
        let orbit = orbit_subspace(rep, x, opts.rank_tol)?;
        report.per_vector = Some(if orbit.is_empty() {
            PerVectorReport {
                x: x.clone(),
                orbit_dim: 0,
                conditions: (1..=8).map(|id| condition(id, true, 0.0)).collect(),
                consistent: true,
            }
        } else {
            let sub = analyze(&restrict(rep, &orbit)?, paths, opts)?;
            if !sub.consistent {
                return Err(Error::Inconsistent(format!("on Y_x: {}", verdicts(&sub.conditions))));
            }
            PerVectorReport { x: x.clone(), orbit_dim: orbit.dim(), conditions: sub.conditions, consistent: true }
        });
    }
    Ok(report)
}
