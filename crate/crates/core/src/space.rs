// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Normed-space substrate.
//!
//! Three concrete carriers are supported: coordinate space `C^d` with the
//! 1-, 2- and sup-norms, grid-sampled continuous functions on a compact model
//! space (circle, torus, interval, finite set) with the grid-sup norm, and
//! trigonometric polynomials in coefficient form, for which the sup-norm can
//! be bracketed by a certified interval.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

pub type C64 = Complex64;

/// Coordinate vector in `C^d`.
pub type Vector = DVector<C64>;

/// Default absolute tolerance for equality checks.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PNorm {
    One,
    Two,
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormContext {
    Coord(PNorm),
    /// Max of pointwise magnitudes over a grid with the given point count.
    GridSup { points: usize },
}

impl NormContext {
    pub fn grid_sup(grid: &SampleGrid) -> Result<Self> {
        if grid.is_empty() {
            return Err(contract("grid-sup norm needs a nonempty grid"));
        }
        Ok(NormContext::GridSup { points: grid.len() })
    }
}

/// Values that carry a norm under some [`NormContext`].
pub trait Normed {
    fn norm_in(&self, ctx: &NormContext) -> Result<f64>;
}

pub fn p_norm(v: &Vector, p: PNorm) -> f64 {
    match p {
        PNorm::One => pairwise_sum_real(&v.iter().map(|z| z.norm()).collect::<Vec<_>>()),
        PNorm::Two => v.norm(),
        PNorm::Inf => v.iter().fold(0.0, |m, z| m.max(z.norm())),
    }
}

impl Normed for Vector {
    fn norm_in(&self, ctx: &NormContext) -> Result<f64> {
        match *ctx {
            NormContext::Coord(p) => Ok(p_norm(self, p)),
            NormContext::GridSup { points } => {
                if points != self.len() {
                    return Err(contract(format!(
                        "grid of {points} points used on a vector of dimension {}",
                        self.len()
                    )));
                }
                Ok(p_norm(self, PNorm::Inf))
            }
        }
    }
}

/// Compact model space carrying a sample grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpace {
    /// `[0,1)` with wraparound.
    Circle,
    /// `[0,1)^2` with wraparound in both coordinates.
    Torus,
    /// `[0,1]`.
    Interval,
    /// `{1..n}`, stored as indices `0..n`.
    Finite { n: usize },
}

/// A point of a model space. One-dimensional spaces use only `[0]`.
pub type Point = [f64; 2];

#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    space: ModelSpace,
    points: Vec<Point>,
    resolution: usize,
}

impl SampleGrid {
    /// `m` equispaced points `j/m` on the circle.
    pub fn circle(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(contract("circle grid needs resolution >= 2"));
        }
        let points = (0..m).map(|j| [j as f64 / m as f64, 0.0]).collect();
        Ok(SampleGrid { space: ModelSpace::Circle, points, resolution: m })
    }

    /// `m x m` equispaced points on the torus, row-major in `(x, y)`.
    pub fn torus(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(contract("torus grid needs resolution >= 2"));
        }
        let mut points = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                points.push([i as f64 / m as f64, j as f64 / m as f64]);
            }
        }
        Ok(SampleGrid { space: ModelSpace::Torus, points, resolution: m })
    }

    /// `m` equispaced points on `[0,1]` including both endpoints.
    pub fn interval(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(contract("interval grid needs resolution >= 2"));
        }
        let points = (0..m).map(|j| [j as f64 / (m - 1) as f64, 0.0]).collect();
        Ok(SampleGrid { space: ModelSpace::Interval, points, resolution: m })
    }

    /// Arbitrary points of `[0,1]`; sorted and checked for distinctness.
    pub fn interval_points(mut xs: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 {
            return Err(contract("interval grid needs at least 2 points"));
        }
        if xs.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(contract("interval grid points must lie in [0,1]"));
        }
        xs.sort_by(f64::total_cmp);
        if xs.windows(2).any(|w| w[0] == w[1]) {
            return Err(contract("grid points must be pairwise distinct"));
        }
        let resolution = xs.len();
        let points = xs.into_iter().map(|x| [x, 0.0]).collect();
        Ok(SampleGrid { space: ModelSpace::Interval, points, resolution })
    }

    /// Equispaced interval grid of `m` points augmented with `1 - 2^-j` for
    /// `j = 1..=depth`, so that a neighbourhood of 1 is resolved geometrically.
    pub fn interval_accumulating_at_one(m: usize, depth: u32) -> Result<Self> {
        let mut xs: Vec<f64> = (0..m).map(|j| j as f64 / (m - 1).max(1) as f64).collect();
        xs.extend((1..=depth).map(|j| 1.0 - (-(j as f64)).exp2()));
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        Self::interval_points(xs)
    }

    pub fn finite(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(contract("finite model space must be nonempty"));
        }
        let points = (0..n).map(|j| [j as f64, 0.0]).collect();
        Ok(SampleGrid { space: ModelSpace::Finite { n }, points, resolution: n })
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Index of the grid point equal to `p` (up to `tol`, with wraparound on
    /// periodic spaces), if any.
    pub fn locate(&self, p: Point, tol: f64) -> Option<usize> {
        let m = self.resolution as f64;
        match self.space {
            ModelSpace::Circle => {
                let t = p[0].rem_euclid(1.0) * m;
                let j = t.round();
                ((t - j).abs() <= tol * m).then_some(j as usize % self.resolution)
            }
            ModelSpace::Torus => {
                let tx = p[0].rem_euclid(1.0) * m;
                let ty = p[1].rem_euclid(1.0) * m;
                let (i, j) = (tx.round(), ty.round());
                if (tx - i).abs() <= tol * m && (ty - j).abs() <= tol * m {
                    let r = self.resolution;
                    Some((i as usize % r) * r + j as usize % r)
                } else {
                    None
                }
            }
            ModelSpace::Finite { n } => {
                let j = p[0].round();
                ((p[0] - j).abs() <= tol && j >= 0.0 && (j as usize) < n).then_some(j as usize)
            }
            ModelSpace::Interval => {
                let idx = self.points.partition_point(|q| q[0] < p[0] - tol);
                (idx < self.points.len() && (self.points[idx][0] - p[0]).abs() <= tol)
                    .then_some(idx)
            }
        }
    }
}

/// A continuous (possibly `C^d`-valued) function known by its grid samples.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    grid: Arc<SampleGrid>,
    width: usize,
    values: Vec<C64>,
    lipschitz: Option<f64>,
}

impl SampledFunction {
    /// Scalar samples, one per grid point.
    pub fn scalar(grid: Arc<SampleGrid>, values: Vec<C64>) -> Result<Self> {
        Self::vector_valued(grid, 1, values)
    }

    /// `width`-tuples laid out point-major: `values[p * width + c]`.
    pub fn vector_valued(grid: Arc<SampleGrid>, width: usize, values: Vec<C64>) -> Result<Self> {
        if width == 0 {
            return Err(contract("value width must be positive"));
        }
        if values.len() != grid.len() * width {
            return Err(contract(format!(
                "expected {} samples, got {}",
                grid.len() * width,
                values.len()
            )));
        }
        Ok(SampledFunction { grid, width, values, lipschitz: None })
    }

    pub fn from_fn(grid: Arc<SampleGrid>, f: impl Fn(Point) -> C64) -> Self {
        let values = grid.points().iter().map(|&p| f(p)).collect();
        SampledFunction { grid, width: 1, values, lipschitz: None }
    }

    pub fn with_lipschitz(mut self, l: f64) -> Result<Self> {
        if !(l >= 0.0) {
            return Err(contract("Lipschitz constant must be nonnegative"));
        }
        self.lipschitz = Some(l);
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<SampleGrid> {
        &self.grid
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn at(&self, point_index: usize) -> &[C64] {
        &self.values[point_index * self.width..(point_index + 1) * self.width]
    }

    /// Euclidean magnitude of the value tuple at each grid point.
    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.values
            .chunks(self.width)
            .map(|t| t.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }

    pub fn grid_sup(&self) -> f64 {
        self.magnitudes().fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<SampledFunction> {
        if self.width != other.width || self.grid.len() != other.grid.len() {
            return Err(contract("functions live on different grids"));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(SampledFunction { grid: self.grid.clone(), width: self.width, values, lipschitz: None })
    }
}

impl Normed for SampledFunction {
    fn norm_in(&self, ctx: &NormContext) -> Result<f64> {
        match *ctx {
            NormContext::GridSup { points } if points == self.grid.len() => Ok(self.grid_sup()),
            NormContext::GridSup { points } => Err(contract(format!(
                "grid-sup context for {points} points used on a function sampled at {}",
                self.grid.len()
            ))),
            NormContext::Coord(_) => Err(contract("sampled functions carry the grid-sup norm")),
        }
    }
}

/// Trigonometric polynomial `p(x) = sum_k c_k e^{2 pi i k x}` on the circle,
/// with contiguous frequency support `min_freq ..= min_freq + len - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    min_freq: i64,
    coeffs: Vec<C64>,
}

impl TrigPoly {
    pub fn new(min_freq: i64, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(contract("trig polynomial needs at least one coefficient"));
        }
        Ok(TrigPoly { min_freq, coeffs })
    }

    pub fn constant(c: C64) -> Self {
        TrigPoly { min_freq: 0, coeffs: vec![c] }
    }

    pub fn min_freq(&self) -> i64 {
        self.min_freq
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Half-width of the frequency support. `|p|` is unchanged by a frequency
    /// shift, so this is the degree that enters the Bernstein estimate.
    pub fn degree(&self) -> f64 {
        (self.coeffs.len() - 1) as f64 / 2.0
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * C64::from_polar(1.0, 2.0 * PI * (self.min_freq + j as i64) as f64 * x))
            .sum()
    }

    /// Values at the `m` points `j/m`, by one inverse FFT of length `m`.
    pub fn eval_grid(&self, m: usize) -> Vec<C64> {
        let mut buf = vec![C64::new(0.0, 0.0); m];
        for (j, c) in self.coeffs.iter().enumerate() {
            let k = (self.min_freq + j as i64).rem_euclid(m as i64) as usize;
            buf[k] += c;
        }
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        buf
    }
}

/// Certified bracket `[lower, upper]` around a sup-norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupBounds {
    pub lower: f64,
    pub upper: f64,
}

impl SupBounds {
    pub fn exact(v: f64) -> Self {
        SupBounds { lower: v, upper: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Brackets `sup_x |p(x)|` from `m` equispaced samples.
///
/// With `D = p.degree()`, Bernstein's inequality gives `|p'| <= 2 pi D sup|p|`,
/// and every point is within `1/(2m)` of a sample, so
/// `max_j |p(j/m)| >= (1 - pi D / m) sup|p|`.
pub fn certified_sup_norm(p: &TrigPoly, m: usize) -> Result<SupBounds> {
    let d = p.degree();
    let slack = PI * d / m as f64;
    if slack >= 1.0 {
        return Err(Error::Refused(format!(
            "{m} samples cannot certify degree {d}: need more than {:.1}",
            PI * d
        )));
    }
    let lower = p.eval_grid(m).iter().fold(0.0f64, |a, z| a.max(z.norm()));
    Ok(SupBounds { lower, upper: lower / (1.0 - slack) })
}

/// Smallest power of two `m` with `pi * degree / m <= slack`.
pub fn oversample_for(degree: f64, slack: f64) -> usize {
    let need = (PI * degree / slack).ceil().max(2.0) as usize;
    need.next_power_of_two()
}

/// Two-variable trigonometric polynomial
/// `p(u, v) = sum a[i][j] e^{2 pi i ((u0 + i) u + (v0 + j) v)}`,
/// stored row-major with `cols` entries per `u`-frequency.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly2 {
    u_min: i64,
    v_min: i64,
    cols: usize,
    coeffs: Vec<C64>,
}

impl TrigPoly2 {
    pub fn new(u_min: i64, v_min: i64, cols: usize, coeffs: Vec<C64>) -> Result<Self> {
        if cols == 0 || coeffs.is_empty() || !coeffs.len().is_multiple_of(cols) {
            return Err(contract("coefficient block must be a nonempty rows x cols array"));
        }
        Ok(TrigPoly2 { u_min, v_min, cols, coeffs })
    }

    pub fn rows(&self) -> usize {
        self.coeffs.len() / self.cols
    }

    pub fn degrees(&self) -> (f64, f64) {
        ((self.rows() - 1) as f64 / 2.0, (self.cols - 1) as f64 / 2.0)
    }

    pub fn eval(&self, u: f64, v: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.rows() {
            for j in 0..self.cols {
                let phase = (self.u_min + i as i64) as f64 * u + (self.v_min + j as i64) as f64 * v;
                acc += self.coeffs[i * self.cols + j] * C64::from_polar(1.0, 2.0 * PI * phase);
            }
        }
        acc
    }

    /// Max of `|p|` over the `mu x mv` product grid.
    fn grid_max(&self, mu: usize, mv: usize) -> f64 {
        let mut planner = FftPlanner::new();
        let fft_u = planner.plan_fft_inverse(mu);
        let rows = self.rows();
        let mut best = 0.0f64;
        let mut buf = vec![C64::new(0.0, 0.0); mu];
        for jv in 0..mv {
            let v = jv as f64 / mv as f64;
            let twiddle: Vec<C64> = (0..self.cols)
                .map(|j| C64::from_polar(1.0, 2.0 * PI * (self.v_min + j as i64) as f64 * v))
                .collect();
            buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for i in 0..rows {
                let row = &self.coeffs[i * self.cols..(i + 1) * self.cols];
                let b: C64 = row.iter().zip(&twiddle).map(|(a, t)| a * t).sum();
                let k = (self.u_min + i as i64).rem_euclid(mu as i64) as usize;
                buf[k] += b;
            }
            fft_u.process(&mut buf);
            best = buf.iter().fold(best, |a, z| a.max(z.norm()));
        }
        best
    }
}

/// Two-variable analogue of [`certified_sup_norm`]: the grid-to-sup gap is
/// at most `(pi D_u / m_u + pi D_v / m_v) sup|p|`.
pub fn certified_sup_norm2(p: &TrigPoly2, mu: usize, mv: usize) -> Result<SupBounds> {
    let (du, dv) = p.degrees();
    let slack = PI * du / mu as f64 + PI * dv / mv as f64;
    if slack >= 1.0 {
        return Err(Error::Refused(format!(
            "{mu}x{mv} samples cannot certify degrees ({du}, {dv})"
        )));
    }
    let lower = p.grid_max(mu, mv);
    Ok(SupBounds { lower, upper: lower / (1.0 - slack) })
}

/// Pairwise summation with a fixed split, so the result does not depend on
/// how callers schedule work.
pub fn pairwise_sum<T>(xs: &[T]) -> T
where
    T: Copy + std::ops::Add<Output = T> + Default,
{
    const LEAF: usize = 8;
    if xs.len() <= LEAF {
        return xs.iter().fold(T::default(), |a, &b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_real(xs: &[f64]) -> f64 {
    pairwise_sum(xs)
}

/// Pairwise sum of equally sized vectors.
pub fn pairwise_sum_vectors(xs: &[Vector]) -> Option<Vector> {
    match xs.len() {
        0 => None,
        1 => Some(xs[0].clone()),
        n => {
            let mid = n / 2;
            let a = pairwise_sum_vectors(&xs[..mid])?;
            let b = pairwise_sum_vectors(&xs[mid..])?;
            Some(a + b)
        }
    }
}
