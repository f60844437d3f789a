// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! One function per subcommand, each turning a validated config into a
//! [`Report`]. Batch work is spread over the ambient rayon pool with
//! order-preserving collects, and every random instance draws from its own
//! ChaCha stream, so reports do not depend on the worker count.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::config::{Experiment, ModelSpec, RunConfig, Subcommand};
use super::report::{Cell, Plot, Report};
use crate::error::{contract, Error, Result};
use crate::experiments::{
    dirichlet_sweep, square_map_cauchy_defect, square_map_separation, ww_abel_sweep, ww_cesaro_sweep, ExperimentReport,
    SkewProductModel,
};
use crate::mean_ergodic::{
    decomposition, default_paths, equivalence_battery, mean_ergodic_projection, range_space, separation_check,
    zero_element_check,
};
use crate::nets::{evaluate, invariance_defect, Side};
use crate::operators::{Cocycle, DynamicsMap, Formula, Matrix, Observable, SemigroupRep};
use crate::random::{bounded_abelian, peripheral_contraction, random_contraction};
use crate::space::{ModelSpace, NormContext, PNorm, SampleGrid, Vector, C64};
use crate::uniform::{alpha_value, build_family, FamilyBase, Probe, Targets};

/// A representation with, when the generator knows it, its projection.
pub struct Instance {
    pub rep: SemigroupRep,
    pub oracle: Option<Matrix>,
}

fn rng_for(seed: u64, stream: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

fn op(spec: &super::config::MatrixSpec) -> Result<crate::operators::DenseOperator> {
    spec.to_operator().map_err(contract)
}

fn with_bound(rep: SemigroupRep, bound: Option<f64>) -> Result<SemigroupRep> {
    match bound {
        Some(b) => rep.with_bound(b),
        None => Ok(rep),
    }
}

pub fn instances(model: &ModelSpec, seed: u64) -> Result<Vec<Instance>> {
    let one = |rep| Ok(vec![Instance { rep, oracle: None }]);
    match model {
        ModelSpec::Powers { matrix, bound } => one(with_bound(SemigroupRep::powers(op(matrix)?), *bound)?),
        ModelSpec::Abelian { generators, bound } => {
            let g = generators.iter().map(op).collect::<Result<Vec<_>>>()?;
            one(with_bound(SemigroupRep::abelian(g)?, *bound)?)
        }
        ModelSpec::OneParameter { generator, t_max, bound } => {
            one(with_bound(SemigroupRep::one_parameter(op(generator)?, *t_max)?, *bound)?)
        }
        ModelSpec::FiniteGroup { elements } => {
            one(SemigroupRep::finite_group(elements.iter().map(op).collect::<Result<Vec<_>>>()?)?)
        }
        ModelSpec::RandomContractions { count, dim, norm } => (0..*count)
            .into_par_iter()
            .map(|i| {
                let t = random_contraction(&mut rng_for(seed, i), *dim, *norm);
                Ok(Instance { rep: SemigroupRep::powers(t), oracle: None })
            })
            .collect(),
        ModelSpec::RandomPeripheral { count, dim } => (0..*count)
            .into_par_iter()
            .map(|i| {
                let m = peripheral_contraction(&mut rng_for(seed, i), *dim);
                Ok(Instance { rep: SemigroupRep::powers(m.op).with_bound(1.0)?, oracle: Some(m.projection) })
            })
            .collect(),
        ModelSpec::RandomAbelian { count, dim, generators } => (0..*count)
            .into_par_iter()
            .map(|i| {
                let m = bounded_abelian(&mut rng_for(seed, i), *dim, *generators);
                let rep = SemigroupRep::abelian(m.generators)?.with_bound(m.bound)?;
                Ok(Instance { rep, oracle: Some(m.projection) })
            })
            .collect(),
        _ => Err(contract("not a matrix model")),
    }
}

fn probe_vector(cfg: &RunConfig, d: usize) -> Result<Vector> {
    match &cfg.probe {
        Some(p) if p.len() != d => Err(contract(format!("probe has length {} but the model acts on C^{d}", p.len()))),
        Some(p) => Ok(Vector::from_vec(p.clone())),
        None => Ok(Vector::from_element(d, C64::new(1.0, 0.0))),
    }
}

fn opt_bool(v: Option<bool>) -> Cell {
    v.map_or(Cell::Empty, Cell::B)
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    match cfg.subcommand {
        Subcommand::Analyze => match cfg.model.as_ref() {
            Some(ModelSpec::SquareMap { points, depth, n1, n2 }) => analyze_square_map(cfg, *points, *depth, *n1, *n2),
            _ => analyze(cfg),
        },
        Subcommand::Net => net(cfg),
        Subcommand::Uniform => uniform(cfg),
        Subcommand::Ww => ww(cfg),
        Subcommand::Equivalence => equivalence(cfg),
    }
}

fn model(cfg: &RunConfig) -> Result<&ModelSpec> {
    cfg.model.as_ref().ok_or_else(|| Error::Config("missing model".into()))
}

fn analyze(cfg: &RunConfig) -> Result<Report> {
    let tol = &cfg.tolerances;
    let inst = instances(model(cfg)?, cfg.seed)?;
    let rows = inst
        .par_iter()
        .map(|it| {
            let rep = &it.rep;
            let (sep, fix, dual) = separation_check(rep, tol.rank_tol)?;
            let range = range_space(rep, tol.rank_tol)?;
            let dec = decomposition(&fix, &range, tol.angle_tol);
            let p = match mean_ergodic_projection(rep, tol.rank_tol) {
                Ok(p) => Some(p.matrix().clone()),
                Err(Error::NotMeanErgodic(_)) => None,
                Err(e) => return Err(e),
            };
            let zero = p.as_ref().map(|p| zero_element_check(p, rep, tol.rank_tol.max(1e-10))).transpose()?;
            let oracle_err = match (&p, &it.oracle) {
                (Some(p), Some(o)) => Some((p - o).norm()),
                _ => None,
            };
            Ok((rep.dim(), rep.bound(), fix.dim(), dual.dim(), range.dim(), sep.separates, dec, zero.map(|z| z.passes), oracle_err))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut r = Report::new(&[
        "instance",
        "dim",
        "bound",
        "fix_dim",
        "dual_fix_dim",
        "range_dim",
        "separates",
        "min_angle",
        "decomposes",
        "zero_element",
        "oracle_error",
    ]);
    for (i, (d, m, f, df, rg, sep, dec, zero, oe)) in rows.iter().enumerate() {
        r.push(vec![
            Cell::I(i as i64),
            Cell::I(*d as i64),
            Cell::F(*m),
            Cell::I(*f as i64),
            Cell::I(*df as i64),
            Cell::I(*rg as i64),
            Cell::B(*sep),
            Cell::F(dec.min_angle),
            Cell::B(dec.holds),
            opt_bool(*zero),
            Cell::opt(*oe),
        ]);
    }
    r.plots.push(Plot {
        name: "min_angle".into(),
        x: "instance".into(),
        y: "min_angle".into(),
        points: rows.iter().enumerate().map(|(i, row)| (i as f64, row.6.min_angle)).collect(),
    });
    let flags: Vec<bool> = rows.iter().map(|row| row.5 && row.6.holds).collect();
    let agree = rows.iter().all(|row| row.5 == row.6.holds && row.7.unwrap_or(false) == (row.5 && row.6.holds));
    r.verdict("separation, decomposition and zero element agree", agree, format!("{} instances", rows.len()));
    if let Some(want) = cfg.expect.mean_ergodic {
        let bad = flags.iter().filter(|&&f| f != want).count();
        r.verdict("mean ergodic", bad == 0, format!("{bad} of {} instances disagree with {want}", flags.len()));
    }
    let oracle: Vec<f64> = rows.iter().filter_map(|row| row.8).collect();
    if !oracle.is_empty() {
        let worst = oracle.iter().cloned().fold(0.0, f64::max);
        r.verdict("projection matches construction", worst <= tol.oracle_tol, format!("max error {worst:e}"));
    }
    Ok(r)
}

fn analyze_square_map(cfg: &RunConfig, points: usize, depth: u32, n1: u64, n2: u64) -> Result<Report> {
    let grid = SampleGrid::interval_accumulating_at_one(points, depth)?;
    let sep = square_map_separation(&grid, cfg.tolerances.rank_tol)?;
    let f = Formula::Polynomial { coeffs: vec![0.0, 1.0] };
    let defect = square_map_cauchy_defect(&f, &grid, n1, n2)?;
    let mut r = Report::new(&["grid_points", "fix_dim", "dual_fix_dim", "separates", "witness_pairing", "cauchy_defect"]);
    r.push(vec![
        Cell::I(grid.len() as i64),
        Cell::I(1),
        Cell::I(sep.fixed_points.len() as i64),
        Cell::B(sep.separation.separates),
        Cell::opt(sep.separation.witness_pairing),
        Cell::F(defect),
    ]);
    let ergodic = sep.separation.separates;
    if let Some(want) = cfg.expect.mean_ergodic {
        let pairing_ok = ergodic || sep.separation.witness_pairing.is_some_and(|p| p <= 1e-12);
        r.verdict(
            "mean ergodic",
            ergodic == want && pairing_ok,
            format!("separates = {ergodic}, witness pairing {:?}", sep.separation.witness_pairing),
        );
    }
    if let Some(min) = cfg.expect.min_cauchy_defect {
        r.verdict("cauchy defect", defect >= min, format!("{defect} between N = {n1} and N = {n2} (need >= {min})"));
    }
    r.details = json!({ "fixed_points": sep.fixed_points, "separation": sep.separation });
    Ok(r)
}

fn net(cfg: &RunConfig) -> Result<Report> {
    let inst = instances(model(cfg)?, cfg.seed)?;
    let rep = &inst[0].rep;
    let x = probe_vector(cfg, rep.dim())?;
    let ctx = NormContext::Coord(PNorm::Two);
    let px = match mean_ergodic_projection(rep, cfg.tolerances.rank_tol) {
        Ok(p) => Some(p.matrix() * &x),
        Err(Error::NotMeanErgodic(_)) => None,
        Err(e) => return Err(e),
    };
    let rows = cfg
        .schemes
        .par_iter()
        .map(|s| {
            let ax = evaluate(s, rep, &x)?;
            let dist = px.as_ref().map(|p| (&ax - p).norm());
            let (right, left) = match &cfg.element {
                Some(g) => (
                    Some(invariance_defect(s, rep, g, &x, Side::Right, &ctx)?),
                    Some(invariance_defect(s, rep, g, &x, Side::Left, &ctx)?),
                ),
                None => (None, None),
            };
            Ok((alpha_value(s), ax.norm(), dist, right, left))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = Report::new(&["step", "alpha", "norm_ax", "dist_to_projection", "defect_right", "defect_left"]);
    for (i, (a, n, d, dr, dl)) in rows.iter().enumerate() {
        r.push(vec![Cell::I(i as i64), Cell::F(*a), Cell::F(*n), Cell::opt(*d), Cell::opt(*dr), Cell::opt(*dl)]);
    }
    r.plots.push(Plot {
        name: "dist_to_projection".into(),
        x: "alpha".into(),
        y: "dist_to_projection".into(),
        points: rows.iter().filter_map(|row| row.2.map(|d| (row.0, d))).collect(),
    });
    if let Some(want) = cfg.expect.converges {
        let thr = cfg.tolerances.net_tol * rep.bound() * x.norm();
        let last = rows.last().and_then(|row| row.2);
        let got = last.is_some_and(|d| d <= thr);
        r.verdict("net converges", got == want, format!("last distance {last:?}, threshold {thr:e}"));
    }
    r.details = json!({ "bound": rep.bound(), "schemes": cfg.schemes });
    Ok(r)
}

fn koopman_grid(space: ModelSpace, m: usize) -> Result<SampleGrid> {
    match space {
        ModelSpace::Circle => SampleGrid::circle(m),
        ModelSpace::Torus => SampleGrid::torus(m),
        ModelSpace::Interval => SampleGrid::interval(m),
        ModelSpace::Finite { .. } => Err(contract("koopman families on finite spaces are not configurable")),
    }
}

/// Largest rung of a fixed ladder not above `v`, for stable verdict text.
fn floor_rung(v: f64, tol: f64) -> f64 {
    [0.5, 0.1, 0.01].into_iter().find(|&b| b >= tol && v >= b).unwrap_or(tol)
}

fn uniform(cfg: &RunConfig) -> Result<Report> {
    let kind = cfg.family.ok_or_else(|| Error::Config("missing family".into()))?;
    let index = cfg.index.clone().ok_or_else(|| Error::Config("missing index".into()))?;
    let (base, probe, default_targets) = match model(cfg)? {
        ModelSpec::Koopman { map, cocycles, grid_points, function, sup } => {
            let dynamics = DynamicsMap::new(map.clone())?;
            let grid = Arc::new(koopman_grid(dynamics.space(), *grid_points)?);
            let cocycles = cocycles.iter().map(|c| Cocycle::phase(c.freq, c.shift)).collect();
            let probe = Probe::Function { f: Observable::scalar(function.clone()), sup: *sup };
            (FamilyBase::Koopman { dynamics, cocycles, grid }, probe, Targets::Zero)
        }
        m => {
            let rep = instances(m, cfg.seed)?.remove(0).rep;
            let x = probe_vector(cfg, rep.dim())?;
            (FamilyBase::Rep(rep), Probe::Vector(x), Targets::MeanErgodic)
        }
    };
    let family = build_family(kind, base, index)?;
    let prof = family.uniform_convergence_profile(&probe, cfg.targets.unwrap_or(default_targets), &cfg.schemes)?;
    let mut r = Report::new(&["alpha", "sup_defect", "sup_defect_refined", "stable"]);
    let mut rows = prof.rows.clone();
    rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    for row in &rows {
        r.push(vec![Cell::F(row.alpha), Cell::F(row.sup_defect), Cell::F(row.sup_defect_refined), Cell::B(row.stable)]);
    }
    r.plots.push(Plot {
        name: "sup_defect".into(),
        x: "alpha".into(),
        y: "sup_defect_refined".into(),
        points: rows.iter().map(|row| (row.alpha, row.sup_defect_refined)).collect(),
    });
    r.verdict("grid stable", prof.grid_stable, "base and refined sups agree within 10%");
    if let Some(want) = cfg.expect.uniform_convergence {
        let tol = cfg.expect.sup_tol.unwrap_or(cfg.tolerances.net_tol);
        let last = rows.last().map_or(f64::INFINITY, |row| row.sup_defect.max(row.sup_defect_refined));
        let claim = last < tol;
        let detail = if claim {
            format!("sup defect < {tol} (last {last})")
        } else {
            format!("sup defect ≥ {} (last {last}, tolerance {tol})", floor_rung(last, tol))
        };
        r.verdict("uniform convergence", claim == want, detail);
    }
    if let Some(want) = cfg.expect.monotone {
        r.verdict("monotone decay", prof.monotone_decay == Some(want), format!("{:?}", prof.monotone_decay));
    }
    r.details = json!({ "bound": family.bound(), "grid_stable": prof.grid_stable, "monotone_decay": prof.monotone_decay });
    Ok(r)
}

fn experiment_report(r: &mut Report, e: &ExperimentReport) {
    *r = Report::new(&[e.param_name.as_str(), "sup_lower", "sup_upper", "slope_estimate"]);
    let mut rows = e.rows.clone();
    rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    for row in &rows {
        r.push(vec![Cell::F(row.param), Cell::F(row.sup_lower), Cell::F(row.sup_upper), Cell::F(row.slope_estimate)]);
    }
    for (name, pick) in [("sup_upper", true), ("sup_lower", false)] {
        r.plots.push(Plot {
            name: name.into(),
            x: e.param_name.clone(),
            y: name.into(),
            points: rows.iter().map(|row| (row.param, if pick { row.sup_upper } else { row.sup_lower })).collect(),
        });
    }
}

fn ww(cfg: &RunConfig) -> Result<Report> {
    let skew = match &cfg.model {
        Some(ModelSpec::SkewProduct(m)) => m.clone(),
        _ => SkewProductModel::default(),
    };
    let slack = cfg.tolerances.sup_slack;
    let mut r = Report::default();
    let exp = match cfg.experiment.as_ref().ok_or_else(|| Error::Config("missing experiment".into()))? {
        Experiment::Cesaro { ns } => ww_cesaro_sweep(&skew, ns, slack)?,
        Experiment::Abel { js, tail_eps } => ww_abel_sweep(&skew, js, *tail_eps, slack)?,
        Experiment::Dirichlet { ns, oversample } => {
            let (e, lobes) = dirichlet_sweep(ns, *oversample)?;
            experiment_report(&mut r, &e);
            let worst = lobes.iter().map(|l| (l.lobe_direct - l.lobe_closed_form).abs()).fold(0.0, f64::max);
            r.verdict("closed form", worst <= 1e-6, format!("max lobe mismatch {worst:e}"));
            r.details = json!({ "lobes": lobes });
            e
        }
    };
    if r.columns.is_empty() {
        experiment_report(&mut r, &exp);
    }
    let ex = &cfg.expect;
    let uppers: Vec<f64> = r.plots[0].points.iter().map(|p| p.1).collect();
    let lowers: Vec<f64> = r.plots[1].points.iter().map(|p| p.1).collect();
    if let Some([lo, hi]) = ex.slope_range {
        r.verdict("slope", (lo..=hi).contains(&exp.slope), format!("{} (want [{lo}, {hi}])", exp.slope));
    }
    if let Some(v) = ex.final_sup_below {
        let last = *uppers.last().unwrap_or(&f64::INFINITY);
        r.verdict("final sup", last < v, format!("sup_upper {last} (want < {v})"));
    }
    if let Some(want) = ex.monotone {
        let mono = uppers.windows(2).all(|w| w[1] <= w[0]);
        r.verdict("monotone", mono == want, format!("sup_upper non-increasing: {mono}"));
    }
    if let Some(v) = ex.min_sup {
        let least = lowers.iter().cloned().fold(f64::INFINITY, f64::min);
        r.verdict("sup stays large", least >= v, format!("least sup_lower {least} (want >= {v})"));
    }
    if r.details.is_null() {
        r.details = json!({ "slope": exp.slope });
    } else {
        r.details["slope"] = json!(exp.slope);
    }
    Ok(r)
}

fn equivalence(cfg: &RunConfig) -> Result<Report> {
    let opts = cfg.tolerances.battery();
    let inst = instances(model(cfg)?, cfg.seed)?;
    let outcomes = inst
        .par_iter()
        .map(|it| {
            let x = match &cfg.probe {
                Some(_) => Some(probe_vector(cfg, it.rep.dim())?),
                None => None,
            };
            match equivalence_battery(&it.rep, x.as_ref(), &default_paths(&it.rep), &opts) {
                Ok(rep) => {
                    let oracle = match (&rep.projection, &it.oracle) {
                        (Some(p), Some(o)) => Some((p - o).norm()),
                        _ => None,
                    };
                    Ok(Ok((rep.conditions, oracle)))
                }
                Err(Error::Inconsistent(msg)) => Ok(Err(msg)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r = Report::new(&["instance", "condition", "name", "holds", "measure"]);
    let mut inconsistent = vec![];
    let mut disagree = 0;
    let mut worst_oracle: Option<f64> = None;
    for (i, o) in outcomes.iter().enumerate() {
        match o {
            Ok((conds, oracle)) => {
                for c in conds {
                    r.push(vec![
                        Cell::I(i as i64),
                        Cell::I(c.id as i64),
                        Cell::S(c.name.clone()),
                        opt_bool(c.holds),
                        Cell::opt(c.measure),
                    ]);
                    if let (Some(want), Some(h)) = (cfg.expect.mean_ergodic, c.holds) {
                        disagree += usize::from(h != want);
                    }
                }
                if let Some(e) = oracle {
                    worst_oracle = Some(worst_oracle.unwrap_or(0.0).max(*e));
                }
            }
            Err(msg) => inconsistent.push(format!("instance {i}: {msg}")),
        }
    }
    r.verdict(
        "conditions agree",
        inconsistent.is_empty(),
        if inconsistent.is_empty() { format!("{} instances", outcomes.len()) } else { inconsistent.join("; ") },
    );
    if let Some(want) = cfg.expect.mean_ergodic {
        r.verdict("mean ergodic", disagree == 0, format!("{disagree} condition verdicts differ from {want}"));
    }
    if let Some(w) = worst_oracle {
        r.verdict("projection matches construction", w <= cfg.tolerances.oracle_tol, format!("max error {w:e}"));
    }
    Ok(r)
}
