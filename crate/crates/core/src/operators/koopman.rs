// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Koopman operators `f -> gamma * (f o phi)` on functions over a compact
//! model space.
//!
//! Functions are carried as [`Observable`]s: closed-form expressions that can
//! be evaluated at any point, so orbits that leave the sample grid are still
//! evaluated exactly. Weighted orbit sums (all discrete averaging nets) are
//! again observables, which lets nets be composed (`A_a A_b f`) without
//! interpolation.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::operators::dense::Matrix;
use crate::space::{ModelSpace, Point, SampleGrid, SampledFunction, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MapRule {
    /// `x -> x + alpha mod 1` on the circle.
    Rotation { alpha: f64 },
    /// `x -> x^2` on `[0,1]`.
    Square,
    /// `(x, y) -> (x + alpha, y + x)` on the torus.
    Skew { alpha: f64 },
    /// `j -> table[j]` on `{0..n}`.
    Table { table: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRule", into = "MapRule")]
pub struct DynamicsMap {
    rule: MapRule,
}

impl TryFrom<MapRule> for DynamicsMap {
    type Error = Error;

    fn try_from(rule: MapRule) -> Result<Self> {
        DynamicsMap::new(rule)
    }
}

impl From<DynamicsMap> for MapRule {
    fn from(m: DynamicsMap) -> MapRule {
        m.rule
    }
}

impl DynamicsMap {
    pub fn new(rule: MapRule) -> Result<Self> {
        match &rule {
            MapRule::Rotation { alpha } | MapRule::Skew { alpha } if !alpha.is_finite() => {
                return Err(contract("rotation number must be finite"));
            }
            MapRule::Table { table } => {
                if table.is_empty() {
                    return Err(contract("map table must be nonempty"));
                }
                if let Some(bad) = table.iter().find(|&&j| j >= table.len()) {
                    return Err(contract(format!("map table entry {bad} outside 0..{}", table.len())));
                }
            }
            _ => {}
        }
        Ok(DynamicsMap { rule })
    }

    pub fn rotation(alpha: f64) -> Result<Self> {
        Self::new(MapRule::Rotation { alpha })
    }

    pub fn square() -> Self {
        DynamicsMap { rule: MapRule::Square }
    }

    pub fn skew(alpha: f64) -> Result<Self> {
        Self::new(MapRule::Skew { alpha })
    }

    pub fn table(table: Vec<usize>) -> Result<Self> {
        Self::new(MapRule::Table { table })
    }

    pub fn rule(&self) -> &MapRule {
        &self.rule
    }

    pub fn space(&self) -> ModelSpace {
        match &self.rule {
            MapRule::Rotation { .. } => ModelSpace::Circle,
            MapRule::Square => ModelSpace::Interval,
            MapRule::Skew { .. } => ModelSpace::Torus,
            MapRule::Table { table } => ModelSpace::Finite { n: table.len() },
        }
    }

    pub fn step(&self, p: Point) -> Point {
        match &self.rule {
            MapRule::Rotation { alpha } => [(p[0] + alpha).rem_euclid(1.0), 0.0],
            MapRule::Square => [p[0] * p[0], 0.0],
            MapRule::Skew { alpha } => [(p[0] + alpha).rem_euclid(1.0), (p[1] + p[0]).rem_euclid(1.0)],
            MapRule::Table { table } => [table[p[0] as usize] as f64, 0.0],
        }
    }

    pub fn iterate(&self, mut p: Point, n: u64) -> Point {
        for _ in 0..n {
            p = self.step(p);
        }
        p
    }

    /// Points `p` with `phi(p) = p` (to `tol`) among the grid points.
    pub fn fixed_points_on(&self, grid: &SampleGrid, tol: f64) -> Vec<usize> {
        grid.points()
            .iter()
            .enumerate()
            .filter(|(_, &p)| {
                let q = self.step(p);
                let dx = match self.space() {
                    ModelSpace::Circle | ModelSpace::Torus => {
                        let w = |a: f64, b: f64| {
                            let t = (a - b).rem_euclid(1.0);
                            t.min(1.0 - t)
                        };
                        w(q[0], p[0]).max(w(q[1], p[1]))
                    }
                    _ => (q[0] - p[0]).abs(),
                };
                dx <= tol
            })
            .map(|(i, _)| i)
            .collect()
    }
}

/// Unitary-valued function `gamma(p) = e^{2 pi i freq p_0} U`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cocycle {
    freq: i64,
    base: Matrix,
}

impl Cocycle {
    pub fn new(freq: i64, base: Matrix) -> Result<Self> {
        if !base.is_square() || base.nrows() == 0 {
            return Err(contract("cocycle base must be a square matrix"));
        }
        let d = base.nrows();
        let defect = (base.adjoint() * &base - Matrix::identity(d, d)).norm();
        if defect > 1e-10 {
            return Err(contract(format!("cocycle base is not unitary (defect {defect:e})")));
        }
        Ok(Cocycle { freq, base })
    }

    /// Scalar phase cocycle `e^{2 pi i (freq x + shift)}`.
    pub fn phase(freq: i64, shift: f64) -> Self {
        Cocycle { freq, base: Matrix::from_element(1, 1, C64::from_polar(1.0, 2.0 * PI * shift)) }
    }

    pub fn width(&self) -> usize {
        self.base.nrows()
    }

    pub fn at(&self, p: Point) -> Matrix {
        if self.freq == 0 {
            return self.base.clone();
        }
        &self.base * C64::from_polar(1.0, 2.0 * PI * self.freq as f64 * p[0])
    }
}

/// Closed-form scalar function on a model space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Formula {
    /// `sum_j c_j x^j` in the first coordinate.
    Polynomial { coeffs: Vec<f64> },
    /// `sum c e^{2 pi i k x}`.
    Fourier { modes: Vec<(i64, C64)> },
    /// `sum c e^{2 pi i (k x + l y)}` on the torus.
    Fourier2 { modes: Vec<(i64, i64, C64)> },
    /// Lookup in samples; the evaluation point must be a grid point.
    Samples {
        #[serde(skip)]
        samples: Option<Arc<SampledFunction>>,
    },
}

impl Formula {
    pub fn constant(c: f64) -> Self {
        Formula::Polynomial { coeffs: vec![c] }
    }

    pub fn samples(f: SampledFunction) -> Self {
        Formula::Samples { samples: Some(Arc::new(f)) }
    }

    pub fn eval(&self, p: Point) -> Result<C64> {
        Ok(match self {
            Formula::Polynomial { coeffs } => {
                C64::new(coeffs.iter().rev().fold(0.0, |acc, &c| acc * p[0] + c), 0.0)
            }
            Formula::Fourier { modes } => modes
                .iter()
                .map(|&(k, c)| c * C64::from_polar(1.0, 2.0 * PI * k as f64 * p[0]))
                .sum(),
            Formula::Fourier2 { modes } => modes
                .iter()
                .map(|&(k, l, c)| c * C64::from_polar(1.0, 2.0 * PI * (k as f64 * p[0] + l as f64 * p[1])))
                .sum(),
            Formula::Samples { samples } => {
                let f = samples.as_ref().ok_or_else(|| contract("sample formula without samples"))?;
                let idx = f
                    .grid()
                    .locate(p, 1e-9)
                    .ok_or_else(|| Error::Domain(format!("point {p:?} is not on the sample grid")))?;
                f.at(idx)[0]
            }
        })
    }
}

/// Koopman operator with optional unitary cocycle, acting on `C^width`-valued
/// functions: `(gamma S) f (p) = gamma(p) f(phi(p))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KoopmanOperator {
    dynamics: DynamicsMap,
    cocycle: Option<Cocycle>,
}

impl KoopmanOperator {
    pub fn new(dynamics: DynamicsMap) -> Self {
        KoopmanOperator { dynamics, cocycle: None }
    }

    pub fn with_cocycle(dynamics: DynamicsMap, cocycle: Cocycle) -> Self {
        KoopmanOperator { dynamics, cocycle: Some(cocycle) }
    }

    pub fn dynamics(&self) -> &DynamicsMap {
        &self.dynamics
    }

    pub fn cocycle(&self) -> Option<&Cocycle> {
        self.cocycle.as_ref()
    }

    pub fn width(&self) -> usize {
        self.cocycle.as_ref().map_or(1, Cocycle::width)
    }

    /// `(gamma S)^n f` as a lazily evaluated observable.
    pub fn power(self: &Arc<Self>, n: u64, f: &Observable) -> Result<Observable> {
        self.weighted_orbit(f, n, vec![C64::new(1.0, 0.0)])
    }

    /// `sum_j weights[j] (gamma S)^{start + j} f` as an observable.
    pub fn weighted_orbit(self: &Arc<Self>, f: &Observable, start: u64, weights: Vec<C64>) -> Result<Observable> {
        if f.width() != self.width() {
            return Err(contract(format!(
                "operator acts on width {} but function has width {}",
                self.width(),
                f.width()
            )));
        }
        Ok(Observable::Orbit {
            koopman: self.clone(),
            inner: Arc::new(f.clone()),
            start,
            weights: weights.into(),
        })
    }

    /// Evaluates `sum_j w_j (gamma S)^{start+j} f` at `p` by walking the orbit.
    fn orbit_value(&self, inner: &Observable, start: u64, weights: &[C64], p: Point) -> Result<Vec<C64>> {
        let width = self.width();
        let mut q = p;
        let mut acc = vec![C64::new(0.0, 0.0); width];
        match &self.cocycle {
            None => {
                q = self.dynamics.iterate(q, start);
                for &w in weights {
                    let v = inner.eval(q)?;
                    acc[0] += w * v[0];
                    q = self.dynamics.step(q);
                }
            }
            Some(gamma) => {
                let mut prod = Matrix::identity(width, width);
                for _ in 0..start {
                    prod = &prod * gamma.at(q);
                    q = self.dynamics.step(q);
                }
                for &w in weights {
                    let v = nalgebra::DVector::from_vec(inner.eval(q)?);
                    let gv = &prod * v;
                    for (a, b) in acc.iter_mut().zip(gv.iter()) {
                        *a += w * b;
                    }
                    prod = &prod * gamma.at(q);
                    q = self.dynamics.step(q);
                }
            }
        }
        Ok(acc)
    }
}

/// A function that can be evaluated at any point of its model space.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    /// One closed-form formula per value component.
    Closed(Vec<Formula>),
    /// `sum_j weights[j] (gamma S)^{start+j} inner`.
    Orbit {
        koopman: Arc<KoopmanOperator>,
        inner: Arc<Observable>,
        start: u64,
        weights: Arc<[C64]>,
    },
    /// `a - b`.
    Difference(Arc<Observable>, Arc<Observable>),
}

impl Observable {
    pub fn scalar(f: Formula) -> Self {
        Observable::Closed(vec![f])
    }

    pub fn width(&self) -> usize {
        match self {
            Observable::Closed(fs) => fs.len(),
            Observable::Orbit { koopman, .. } => koopman.width(),
            Observable::Difference(a, _) => a.width(),
        }
    }

    pub fn minus(&self, other: &Observable) -> Result<Observable> {
        if self.width() != other.width() {
            return Err(contract("observables have different widths"));
        }
        Ok(Observable::Difference(Arc::new(self.clone()), Arc::new(other.clone())))
    }

    pub fn eval(&self, p: Point) -> Result<Vec<C64>> {
        match self {
            Observable::Closed(fs) => fs.iter().map(|f| f.eval(p)).collect(),
            Observable::Orbit { koopman, inner, start, weights } => koopman.orbit_value(inner, *start, weights, p),
            Observable::Difference(a, b) => {
                let (va, vb) = (a.eval(p)?, b.eval(p)?);
                Ok(va.iter().zip(&vb).map(|(x, y)| x - y).collect())
            }
        }
    }

    /// Samples on a grid; grid points are evaluated in parallel, results keep
    /// grid order.
    pub fn sample(&self, grid: &Arc<SampleGrid>) -> Result<SampledFunction> {
        let rows: Vec<Vec<C64>> = grid.points().par_iter().map(|&p| self.eval(p)).collect::<Result<_>>()?;
        let width = self.width();
        SampledFunction::vector_valued(grid.clone(), width, rows.into_iter().flatten().collect())
    }
}
