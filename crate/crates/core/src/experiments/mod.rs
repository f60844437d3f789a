// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Runnable experiments on uniform convergence.
//!
//! * A skew product `(x, y) -> (x + a, y + x)` on the torus, where modulated
//!   averages of `e_{k,l0}` reduce to trigonometric polynomials whose sup norm
//!   (over all `lambda` and all points at once) is certified.
//! * The Dirichlet means `(1/N) sum lambda^n`, which converge for every
//!   `lambda` but not uniformly.
//! * The map `x -> x^2` on `[0,1]`, which is not mean ergodic on `C[0,1]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::mean_ergodic::{separation_from_pairing, SeparationResult};
use crate::nets::abel_terms;
use crate::operators::{turn, DynamicsMap, Formula, KoopmanOperator, Matrix, Observable};
use crate::space::{
    certified_sup_norm2, oversample_for, pairwise_sum, pairwise_sum_real, SampleGrid, SupBounds, TrigPoly, TrigPoly2, C64,
};

#[cfg(test)]
mod tests;

/// Largest FFT grid (`m_u * m_v` points) a certified sup may use.
pub const MAX_SUP_GRID: usize = 1 << 23;

/// Default gap between the certified lower and upper sup bounds.
pub const DEFAULT_SUP_SLACK: f64 = 0.02;

/// `(sqrt 5 - 1) / 2`.
pub fn golden_conjugate() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// `frac(a * m)` accurate for `|m| < 2^36`: `a` is split into two 17-bit
/// leading parts, whose products with `m` are exact, and a small remainder.
pub fn phase_turns(a: f64, m: i64) -> f64 {
    let chunk = |v: f64, bits: i32| (v * 2f64.powi(bits)).round() / 2f64.powi(bits);
    let hi = chunk(a, 17);
    let mid = chunk(a - hi, 34);
    let lo = a - hi - mid;
    let m = m as f64;
    ((hi * m).rem_euclid(1.0) + (mid * m).rem_euclid(1.0) + (lo * m).rem_euclid(1.0)).rem_euclid(1.0)
}

/// Skew product on the torus with a function supported on the characters
/// `e_{k,l0}(x, y) = e^{2 pi i (k x + l0 y)}`, `l0 != 0`.
///
/// On that span the Koopman operator is a weighted shift in `k` without
/// eigenvectors, so every mean ergodic projection `P_lambda f` vanishes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkewProductModel {
    pub alpha: f64,
    pub l0: i64,
    /// `(k, c_k)` pairs.
    pub coeffs: Vec<(i64, C64)>,
    /// Largest admissible Cesàro length.
    pub n_max: u64,
}

impl Default for SkewProductModel {
    fn default() -> Self {
        SkewProductModel { alpha: golden_conjugate(), l0: 1, coeffs: vec![(0, C64::new(1.0, 0.0))], n_max: 1 << 12 }
    }
}

impl SkewProductModel {
    pub fn validate(&self) -> Result<()> {
        if self.l0 == 0 {
            return Err(contract("l0 must be nonzero"));
        }
        if !self.alpha.is_finite() {
            return Err(contract("rotation number must be finite"));
        }
        if self.n_max == 0 {
            return Err(contract("n_max must be >= 1"));
        }
        Ok(())
    }

    /// Largest `|k|` with a coefficient (`K`).
    pub fn k_range(&self) -> i64 {
        self.coeffs.iter().map(|(k, _)| k.abs()).max().unwrap_or(0)
    }

    /// `sum |c_k|`, an upper bound for `||f||_inf`.
    pub fn coeff_l1(&self) -> f64 {
        self.coeffs.iter().map(|(_, c)| c.norm()).sum()
    }

    pub fn dynamics(&self) -> Result<DynamicsMap> {
        DynamicsMap::skew(self.alpha)
    }

    pub fn function(&self) -> Observable {
        Observable::scalar(Formula::Fourier2 { modes: self.coeffs.iter().map(|&(k, c)| (k, self.l0, c)).collect() })
    }

    /// `p(u, x) = sum_{n,k} w_n c_k e^{2 pi i a (n k + l0 n(n-1)/2)} e^{2 pi i (n u + k x)}`.
    ///
    /// `|sum_n w_n lambda^n S^n f (x, y)|` equals `|p(theta + l0 x, x)|`, and
    /// `(theta, x) -> (theta + l0 x, x)` is a bijection of the torus, so the
    /// sup over `lambda` and over points is exactly `sup |p|`.
    pub fn merged_polynomial(&self, weights: &[f64]) -> Result<TrigPoly2> {
        self.validate()?;
        let kk = self.k_range();
        let cols = (2 * kk + 1) as usize;
        let mut coeffs = vec![C64::new(0.0, 0.0); weights.len() * cols];
        for (n, &w) in weights.iter().enumerate() {
            let n = n as i64;
            let quad = self.l0 * (n * (n - 1) / 2);
            for &(k, c) in &self.coeffs {
                let phase = phase_turns(self.alpha, n * k + quad);
                coeffs[n as usize * cols + (k + kk) as usize] += c * turn(phase) * w;
            }
        }
        TrigPoly2::new(0, -kk, cols, coeffs)
    }
}

/// Closed form `S^n e_{k,l} = e^{2 pi i a (n k + l n(n-1)/2)} e_{k + n l, l}`
/// for the skew product `(x, y) -> (x + a, y + x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseRecurrence {
    pub alpha: f64,
}

impl PhaseRecurrence {
    /// `(phase, k')` with `S^n e_{k,l} = phase * e_{k', l}`.
    pub fn apply(&self, n: u64, k: i64, l: i64) -> (C64, i64) {
        let n = n as i64;
        (turn(phase_turns(self.alpha, n * k + l * (n * (n - 1) / 2))), k + n * l)
    }

    /// Largest deviation from `n`-fold composition of the map on a fixed set
    /// of torus points, over `n <= n_max`, `|k| <= k_max`, `|l| <= l_max`.
    pub fn validate(&self, n_max: u64, k_max: i64, l_max: i64) -> Result<f64> {
        let s = std::sync::Arc::new(KoopmanOperator::new(DynamicsMap::skew(self.alpha)?));
        let points = [[0.0, 0.0], [0.1234, 0.5678], [0.5, 0.25], [0.9876, 0.0123], [0.31, 0.77]];
        let mut worst = 0.0f64;
        for k in -k_max..=k_max {
            for l in -l_max..=l_max {
                let e = Observable::scalar(Formula::Fourier2 { modes: vec![(k, l, C64::new(1.0, 0.0))] });
                for n in 0..=n_max {
                    let direct = s.power(n, &e)?;
                    let (phase, k2) = self.apply(n, k, l);
                    let closed = Formula::Fourier2 { modes: vec![(k2, l, phase)] };
                    for p in points {
                        let d = (direct.eval(p)?[0] - closed.eval(p)?).norm();
                        worst = worst.max(d);
                    }
                }
            }
        }
        Ok(worst)
    }
}

/// Certified `sup |p|` with `m_u, m_v` chosen so the bracket gap is at most
/// `slack` relative.
fn certified_sup(p: &TrigPoly2, slack: f64) -> Result<SupBounds> {
    let (du, dv) = p.degrees();
    let mu = oversample_for(du, slack / 2.0).max(1);
    let mv = if dv == 0.0 { 1 } else { oversample_for(dv, slack / 2.0) };
    if mu.saturating_mul(mv) > MAX_SUP_GRID {
        return Err(Error::Refused(format!("certifying degrees ({du}, {dv}) needs a {mu}x{mv} grid")));
    }
    certified_sup_norm2(p, mu, mv)
}

/// `sup_{lambda, x, y} |(1/N) sum_{n<N} lambda^n S^n f|`, certified.
pub fn ww_cesaro_sup(model: &SkewProductModel, n: u64, slack: f64) -> Result<SupBounds> {
    model.validate()?;
    if n == 0 {
        return Err(contract("Cesàro length must be >= 1"));
    }
    if n > model.n_max {
        return Err(Error::Refused(format!("N = {n} exceeds the model's n_max = {}", model.n_max)));
    }
    let w = vec![1.0 / n as f64; n as usize];
    certified_sup(&model.merged_polynomial(&w)?, slack)
}

/// `sup_{lambda, x, y} |(1-r) sum_n r^n lambda^n S^n f|`, certified: the
/// series is cut where `sum|c_k| r^T <= tail_eps` and the tail widens the
/// bracket on both sides.
pub fn ww_abel_sup(model: &SkewProductModel, r: f64, tail_eps: f64, slack: f64) -> Result<SupBounds> {
    model.validate()?;
    if !(r > 0.0 && r < 1.0) {
        return Err(contract("Abel parameter must lie in (0,1)"));
    }
    if !(tail_eps > 0.0) {
        return Err(contract("Abel tail tolerance must be > 0"));
    }
    let scale = model.coeff_l1();
    if scale == 0.0 {
        return Ok(SupBounds::exact(0.0));
    }
    let terms = abel_terms(r, tail_eps, scale).max(1);
    let w: Vec<f64> = (0..terms).map(|n| (1.0 - r) * r.powf(n as f64)).collect();
    let tail = scale * r.powf(terms as f64);
    let b = certified_sup(&model.merged_polynomial(&w)?, slack)?;
    Ok(SupBounds { lower: (b.lower - tail).max(0.0), upper: b.upper + tail })
}

/// One row of an experiment sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    /// `N`, or `r` for Abel sweeps.
    pub param: f64,
    pub sup_lower: f64,
    pub sup_upper: f64,
    /// Least-squares slope of `log sup_upper` against `log N` over the
    /// whole sweep (`log 1/(1-r)` for Abel sweeps); repeated on every row.
    pub slope_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    /// Column header of `param`: `N` or `r`.
    pub param_name: String,
    pub rows: Vec<ExperimentRow>,
    pub slope: f64,
}

impl ExperimentReport {
    fn from_bounds(name: &str, param_name: &str, params: &[f64], scale: &[f64], bounds: &[SupBounds]) -> Self {
        let slope = loglog_slope(scale, &bounds.iter().map(|b| b.upper).collect::<Vec<_>>());
        let rows = params
            .iter()
            .zip(bounds)
            .map(|(&param, b)| ExperimentRow { param, sup_lower: b.lower, sup_upper: b.upper, slope_estimate: slope })
            .collect();
        ExperimentReport { name: name.into(), param_name: param_name.into(), rows, slope }
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},sup_lower,sup_upper,slope_estimate\n", self.param_name);
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                crate::uniform::fmt17(r.param),
                crate::uniform::fmt17(r.sup_lower),
                crate::uniform::fmt17(r.sup_upper),
                crate::uniform::fmt17(r.slope_estimate)
            ));
        }
        s
    }
}

/// Least-squares slope of `log y` against `log x`; NaN with fewer than two
/// usable points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pairwise_sum_real(&pts.iter().map(|p| p.0).collect::<Vec<_>>()) / n;
    let my = pairwise_sum_real(&pts.iter().map(|p| p.1).collect::<Vec<_>>()) / n;
    let sxy = pairwise_sum_real(&pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).collect::<Vec<_>>());
    let sxx = pairwise_sum_real(&pts.iter().map(|p| (p.0 - mx).powi(2)).collect::<Vec<_>>());
    sxy / sxx
}

/// Certified Cesàro sups over `ns`, evaluated in parallel, rows in input order.
pub fn ww_cesaro_sweep(model: &SkewProductModel, ns: &[u64], slack: f64) -> Result<ExperimentReport> {
    let bounds = ns.par_iter().map(|&n| ww_cesaro_sup(model, n, slack)).collect::<Result<Vec<_>>>()?;
    let params: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    Ok(ExperimentReport::from_bounds("ww_cesaro", "N", &params, &params, &bounds))
}

/// Certified Abel sups at `r_j = 1 - 2^{-j}`.
pub fn ww_abel_sweep(model: &SkewProductModel, js: &[u32], tail_eps: f64, slack: f64) -> Result<ExperimentReport> {
    let rs: Vec<f64> = js.iter().map(|&j| 1.0 - (-(j as f64)).exp2()).collect();
    let bounds = rs.par_iter().map(|&r| ww_abel_sup(model, r, tail_eps, slack)).collect::<Result<Vec<_>>>()?;
    let scale: Vec<f64> = js.iter().map(|&j| (j as f64).exp2()).collect();
    Ok(ExperimentReport::from_bounds("ww_abel", "r", &rs, &scale, &bounds))
}

/// Non-uniform convergence of `(1/N) sum_{n<N} lambda^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirichletReport {
    pub n: u64,
    pub grid: usize,
    /// Max over `lambda = e^{2 pi i j/m}`, `j != 0`, of the mean (its limit
    /// is 0 there; at `lambda = 1` mean and limit are both 1).
    pub sup: f64,
    pub argmax_turns: f64,
    /// The mean at `theta = pi/N` radians, by direct summation.
    pub lobe_direct: f64,
    /// `|sin(N theta/2) / (N sin(theta/2))|` at `theta = pi/N`.
    pub lobe_closed_form: f64,
}

/// `|sin(N theta/2) / (N sin(theta/2))|`, `theta` in radians.
pub fn dirichlet_closed_form(n: u64, theta: f64) -> f64 {
    let s = (theta / 2.0).sin();
    if s == 0.0 {
        return 1.0;
    }
    ((n as f64 * theta / 2.0).sin() / (n as f64 * s)).abs()
}

/// Grid sup of the Dirichlet means, refused unless `m >= 8N` (the grid must
/// resolve the main lobe).
pub fn dirichlet_sup(n: u64, m: usize) -> Result<DirichletReport> {
    if n == 0 {
        return Err(contract("N must be >= 1"));
    }
    if (m as u64) < 8 * n {
        return Err(Error::Refused(format!("grid of {m} points cannot resolve the main lobe for N = {n}; need >= {}", 8 * n)));
    }
    let p = TrigPoly::new(0, vec![C64::new(1.0 / n as f64, 0.0); n as usize])?;
    let values = p.eval_grid(m);
    let (mut sup, mut arg) = (0.0f64, 0usize);
    for (j, v) in values.iter().enumerate().skip(1) {
        if v.norm() > sup {
            sup = v.norm();
            arg = j;
        }
    }
    let theta = std::f64::consts::PI / n as f64;
    let terms: Vec<C64> = (0..n).map(|j| C64::from_polar(1.0, theta * j as f64)).collect();
    let lobe_direct = (pairwise_sum(&terms) / n as f64).norm();
    Ok(DirichletReport {
        n,
        grid: m,
        sup,
        argmax_turns: arg as f64 / m as f64,
        lobe_direct,
        lobe_closed_form: dirichlet_closed_form(n, theta),
    })
}

/// Sweep of [`dirichlet_sup`] with `m = oversample * N`. The upper bound is
/// the true sup over `lambda != 1`, which is 1 (approached as `lambda -> 1`).
pub fn dirichlet_sweep(ns: &[u64], oversample: usize) -> Result<(ExperimentReport, Vec<DirichletReport>)> {
    let reports = ns.par_iter().map(|&n| dirichlet_sup(n, oversample * n as usize)).collect::<Result<Vec<_>>>()?;
    let params: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let bounds: Vec<SupBounds> = reports.iter().map(|r| SupBounds { lower: r.sup, upper: 1.0 }).collect();
    let mut rep = ExperimentReport::from_bounds("dirichlet", "N", &params, &params, &bounds);
    // the upper bound is constant; report the slope of the grid sups instead
    rep.slope = loglog_slope(&params, &reports.iter().map(|r| r.sup).collect::<Vec<_>>());
    rep.rows.iter_mut().for_each(|r| r.slope_estimate = rep.slope);
    Ok((rep, reports))
}

/// `(1/N) sum_{n<N} f(x^{2^n})` for each `N` in `ns` (increasing), by
/// iterated squaring.
pub fn square_map_means(f: &Formula, x: f64, ns: &[u64]) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("{x} is outside [0,1]")));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) || ns.first() == Some(&0) {
        return Err(contract("lengths must be positive and increasing"));
    }
    let n_max = ns.last().copied().unwrap_or(0);
    let mut terms = Vec::with_capacity(n_max as usize);
    let mut p = x;
    for _ in 0..n_max {
        let v = f.eval([p, 0.0])?;
        if v.im != 0.0 {
            return Err(contract("square-map experiments use real functions"));
        }
        terms.push(v.re);
        p *= p;
    }
    Ok(ns.iter().map(|&n| pairwise_sum_real(&terms[..n as usize]) / n as f64).collect())
}

/// `sup_grid |A_{N2} f - A_{N1} f|` for the Koopman operator of `x -> x^2`.
pub fn square_map_cauchy_defect(f: &Formula, grid: &SampleGrid, n1: u64, n2: u64) -> Result<f64> {
    if n1 == 0 || n1 >= n2 {
        return Err(contract("need 0 < N1 < N2"));
    }
    let defects = grid
        .points()
        .par_iter()
        .map(|p| {
            let v = square_map_means(f, p[0], &[n1, n2])?;
            Ok((v[1] - v[0]).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// Separation test for `x -> x^2` on `C[0,1]`.
///
/// Fixed functions are the constants (`f(x) = f(x^{2^n}) -> f(0)` for
/// `x < 1`, and continuity at 1). Invariant measures of a map are spanned,
/// among point masses, by its fixed points, located here on the grid; the
/// pairing matrix is `G[a, 0] = <delta_{p_a}, 1> = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SquareMapSeparation {
    pub fixed_points: Vec<f64>,
    pub separation: SeparationResult,
}

pub fn square_map_separation(grid: &SampleGrid, tol: f64) -> Result<SquareMapSeparation> {
    let map = DynamicsMap::square();
    // exact: x * x == x only at 0 and 1 in floating point, while any slack
    // admits the points 1 - 2^-j that accumulating grids put next to 1
    let idx = map.fixed_points_on(grid, 0.0);
    if idx.is_empty() {
        return Err(Error::Domain("grid contains no fixed point of x^2".into()));
    }
    let fixed_points: Vec<f64> = idx.iter().map(|&i| grid.points()[i][0]).collect();
    let g = Matrix::from_element(fixed_points.len(), 1, C64::new(1.0, 0.0));
    Ok(SquareMapSeparation { fixed_points, separation: separation_from_pairing(&g, tol) })
}
