// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Fixed spaces, the decomposition `X = Fix S ⊕ closed span rg(I - S)`, the
//! mean ergodic projection and the battery that checks the equivalent
//! characterisations of mean ergodicity against one another.

mod battery;

use serde::Serialize;

use crate::error::{contract, Error, Result};
use crate::linalg::{singular_values, svd};
use crate::operators::{spectral_norm, DenseOperator, Matrix, RepKind, SemigroupRep};
use crate::space::{Vector, C64};

pub use battery::{
    default_paths, equivalence_battery, BatteryOptions, Condition, MeanErgodicReport, NetPath, PathOutcome,
    PerVectorReport,
};

/// Relative singular-value threshold for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;
/// Smallest principal angle accepted between `Fix S` and the range space.
pub const PRINCIPAL_ANGLE_TOL: f64 = 1e-6;

/// Orthonormal basis of a subspace of `C^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubspaceBasis {
    pub ambient: usize,
    pub vectors: Vec<Vector>,
    /// Rank tolerance used to cut the spectrum.
    pub tol: f64,
}

impl SubspaceBasis {
    pub fn empty(ambient: usize, tol: f64) -> Self {
        SubspaceBasis { ambient, vectors: Vec::new(), tol }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// The basis as the columns of a `d x k` matrix.
    pub fn matrix(&self) -> Matrix {
        if self.vectors.is_empty() {
            return Matrix::zeros(self.ambient, 0);
        }
        Matrix::from_columns(&self.vectors)
    }

    /// Orthogonal projection onto the subspace.
    pub fn orthogonal_projector(&self) -> Matrix {
        let b = self.matrix();
        &b * b.adjoint()
    }

    /// `||v - Q Q* v||`.
    pub fn distance(&self, v: &Vector) -> f64 {
        let b = self.matrix();
        (v - &b * (b.adjoint() * v)).norm()
    }
}

fn sigma_max(s: &[f64]) -> f64 {
    s.first().copied().unwrap_or(0.0)
}

/// Orthonormal basis of `ker m`, cutting singular values at
/// `tol * max(sigma_max, floor)`. The floor keeps a numerically zero `m` from
/// having its roundoff read as rank.
pub fn null_space(m: &Matrix, tol: f64, floor: f64) -> SubspaceBasis {
    let d = m.ncols();
    let padded = if m.nrows() < d {
        let mut p = Matrix::zeros(d, d);
        p.view_mut((0, 0), (m.nrows(), d)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let f = svd(&padded);
    let top = sigma_max(&f.s).max(floor);
    let vectors = f
        .s
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol * top)
        .map(|(i, _)| f.v.column(i).into_owned())
        .collect();
    SubspaceBasis { ambient: d, vectors, tol }
}

/// Orthonormal basis of the column space of `m`, same cut as [`null_space`].
pub fn column_space(m: &Matrix, tol: f64, floor: f64) -> SubspaceBasis {
    let d = m.nrows();
    if m.ncols() == 0 {
        return SubspaceBasis::empty(d, tol);
    }
    let f = svd(m);
    let top = sigma_max(&f.s).max(floor);
    if top == 0.0 {
        return SubspaceBasis::empty(d, tol);
    }
    let vectors = f
        .s
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol * top)
        .map(|(i, _)| f.u.column(i).into_owned())
        .collect();
    SubspaceBasis { ambient: d, vectors, tol }
}

fn stacked(blocks: &[Matrix]) -> Matrix {
    let d = blocks[0].ncols();
    let mut m = Matrix::zeros(d * blocks.len(), d);
    for (i, b) in blocks.iter().enumerate() {
        m.view_mut((i * d, 0), (d, d)).copy_from(b);
    }
    m
}

/// `Fix S`: joint kernel of the `S_g - I` over the generators.
pub fn fix_space(rep: &SemigroupRep, tol: f64) -> Result<SubspaceBasis> {
    let d = rep.dim();
    let id = Matrix::identity(d, d);
    let blocks: Vec<Matrix> = rep.generator_matrices()?.iter().map(|s| s - &id).collect();
    Ok(null_space(&stacked(&blocks), tol, 1.0))
}

/// `Fix S'`: joint kernel of the `S_g^* - I`; functionals act as `y -> y* x`.
pub fn dual_fix_space(rep: &SemigroupRep, tol: f64) -> Result<SubspaceBasis> {
    let d = rep.dim();
    let id = Matrix::identity(d, d);
    let blocks: Vec<Matrix> = rep.generator_matrices()?.iter().map(|s| s.adjoint() - &id).collect();
    Ok(null_space(&stacked(&blocks), tol, 1.0))
}

/// Span of `(I - S_g) e_j` over generators `g` and coordinates `j`.
pub fn range_space(rep: &SemigroupRep, tol: f64) -> Result<SubspaceBasis> {
    let d = rep.dim();
    let id = Matrix::identity(d, d);
    let gens = rep.generator_matrices()?;
    let mut m = Matrix::zeros(d, d * gens.len());
    for (i, s) in gens.iter().enumerate() {
        m.view_mut((0, i * d), (d, d)).copy_from(&(&id - s));
    }
    Ok(column_space(&m, tol, 1.0))
}

/// Outcome of testing whether a fixed space separates a dual fixed space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationResult {
    pub separates: bool,
    pub pairing_rank: usize,
    pub dual_dim: usize,
    /// Coefficients, in the dual basis, of a nonzero dual fixed vector that
    /// vanishes on the fixed space. Largest entry normalised to `1`.
    pub witness_coefficients: Option<Vector>,
    /// `max_b |<witness, fix_b>|`.
    pub witness_pairing: Option<f64>,
}

/// Separation test on a pairing matrix `G[a, b] = <dual_a, fix_b>`.
pub fn separation_from_pairing(g: &Matrix, tol: f64) -> SeparationResult {
    let (dual_dim, fix_dim) = g.shape();
    let rank = if dual_dim == 0 || fix_dim == 0 {
        0
    } else {
        let s = singular_values(g);
        let top = sigma_max(&s).max(1.0);
        s.iter().filter(|&&v| v > tol * top).count()
    };
    if rank == dual_dim {
        return SeparationResult {
            separates: true,
            pairing_rank: rank,
            dual_dim,
            witness_coefficients: None,
            witness_pairing: None,
        };
    }
    // a left null vector of G: c with sum_a conj(c_a) G[a, b] = 0
    let gh = if fix_dim == 0 { Matrix::zeros(1, dual_dim) } else { g.adjoint() };
    let ns = null_space(&gh, tol, 1.0);
    let mut c = ns.vectors.last().cloned().unwrap_or_else(|| {
        let mut e = Vector::zeros(dual_dim);
        e[0] = C64::new(1.0, 0.0);
        e
    });
    let peak = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lead = c.iter().copied().find(|z| z.norm() >= peak * (1.0 - 1e-12)).expect("nonzero");
    c /= lead;
    // snap roundoff so exact witnesses come out exact
    for z in c.iter_mut() {
        if z.re.abs() < 1e-15 {
            z.re = 0.0;
        }
        if z.im.abs() < 1e-15 {
            z.im = 0.0;
        }
    }
    let pairing = (g.adjoint() * &c).iter().map(|z| z.norm()).fold(0.0, f64::max);
    SeparationResult {
        separates: false,
        pairing_rank: rank,
        dual_dim,
        witness_coefficients: Some(c),
        witness_pairing: Some(if fix_dim == 0 { 0.0 } else { pairing }),
    }
}

/// Does `Fix S` separate `Fix S'`? The witness, when there is one, is
/// returned in dual-basis coordinates.
pub fn separation_check(rep: &SemigroupRep, tol: f64) -> Result<(SeparationResult, SubspaceBasis, SubspaceBasis)> {
    let fix = fix_space(rep, tol)?;
    let dual = dual_fix_space(rep, tol)?;
    let g = dual.matrix().adjoint() * fix.matrix();
    Ok((separation_from_pairing(&g, tol), fix, dual))
}

/// The decomposition check `dim Fix + dim range = d` with a positive angle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Decomposition {
    pub fix_dim: usize,
    pub range_dim: usize,
    pub dim: usize,
    /// Smallest principal angle between the two subspaces, in radians.
    pub min_angle: f64,
    pub holds: bool,
}

pub fn min_principal_angle(a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
    if a.is_empty() || b.is_empty() {
        return std::f64::consts::FRAC_PI_2;
    }
    // sin of the smallest angle = smallest singular value of (I - QQ*) R
    let q = a.matrix();
    let r = b.matrix();
    let resid = &r - &q * (q.adjoint() * &r);
    let s = singular_values(&resid);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    // more vectors than the complement can hold: they must intersect
    if b.dim() > a.ambient - a.dim() {
        return 0.0;
    }
    smin.clamp(0.0, 1.0).asin()
}

pub fn decomposition(fix: &SubspaceBasis, range: &SubspaceBasis, angle_tol: f64) -> Decomposition {
    let min_angle = min_principal_angle(fix, range);
    let dim = fix.ambient;
    Decomposition {
        fix_dim: fix.dim(),
        range_dim: range.dim(),
        dim,
        min_angle,
        holds: fix.dim() + range.dim() == dim && min_angle > angle_tol,
    }
}

/// The projection onto `fix` along `range`; they must decompose `C^d`.
pub fn oblique_projection(fix: &SubspaceBasis, range: &SubspaceBasis) -> Result<Matrix> {
    let d = fix.ambient;
    let p = fix.dim();
    if p + range.dim() != d {
        return Err(contract("fixed and range spaces do not have complementary dimensions"));
    }
    if p == 0 {
        return Ok(Matrix::zeros(d, d));
    }
    let mut b = Matrix::zeros(d, d);
    b.view_mut((0, 0), (d, p)).copy_from(&fix.matrix());
    if p < d {
        b.view_mut((0, p), (d, d - p)).copy_from(&range.matrix());
    }
    let inv = b
        .try_inverse()
        .ok_or_else(|| Error::NotMeanErgodic("fixed and range spaces intersect".into()))?;
    Ok(fix.matrix() * inv.rows(0, p))
}

/// The mean ergodic projection onto `Fix S` along the range space.
pub fn mean_ergodic_projection(rep: &SemigroupRep, tol: f64) -> Result<DenseOperator> {
    let fix = fix_space(rep, tol)?;
    let range = range_space(rep, tol)?;
    let dec = decomposition(&fix, &range, PRINCIPAL_ANGLE_TOL);
    if !dec.holds {
        return Err(Error::NotMeanErgodic(format!(
            "dim Fix = {}, dim range = {}, d = {}, smallest principal angle = {:e}",
            dec.fix_dim, dec.range_dim, dec.dim, dec.min_angle
        )));
    }
    DenseOperator::new(oblique_projection(&fix, &range)?)
}

/// Defects of the zero-element criterion `P S_g = S_g P = P = P^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroElementReport {
    /// `max_g ||P S_g - P||`.
    pub right: f64,
    /// `max_g ||S_g P - P||`.
    pub left: f64,
    /// `||P^2 - P||`.
    pub idempotence: f64,
    pub tol: f64,
    pub passes: bool,
}

pub fn zero_element_check(p: &Matrix, rep: &SemigroupRep, tol: f64) -> Result<ZeroElementReport> {
    let d = rep.dim();
    if p.shape() != (d, d) {
        return Err(contract(format!("P is {:?}, representation acts on C^{d}", p.shape())));
    }
    let mut right: f64 = 0.0;
    let mut left: f64 = 0.0;
    for s in rep.generator_matrices()? {
        right = right.max(spectral_norm(&(p * &s - p)));
        left = left.max(spectral_norm(&(&s * p - p)));
    }
    let idempotence = spectral_norm(&(p * p - p));
    let passes = right <= tol && left <= tol && idempotence <= tol;
    Ok(ZeroElementReport { right, left, idempotence, tol, passes })
}

/// Matrices whose joint invariant subspaces are the `S`-invariant ones.
fn krylov_generators(rep: &SemigroupRep) -> Result<Vec<Matrix>> {
    match rep.kind() {
        RepKind::OneParameter { generator, .. } => Ok(vec![generator.matrix().clone()]),
        _ => rep.generator_matrices(),
    }
}

/// `Y_x`: the smallest invariant subspace containing `x`.
pub fn orbit_subspace(rep: &SemigroupRep, x: &Vector, tol: f64) -> Result<SubspaceBasis> {
    let d = rep.dim();
    crate::operators::dense::check_dim(d, x)?;
    let gens = krylov_generators(rep)?;
    let mut basis = column_space(&Matrix::from_columns(std::slice::from_ref(x)), tol, 0.0);
    loop {
        let mut cols = basis.vectors.clone();
        for g in &gens {
            cols.extend(basis.vectors.iter().map(|v| g * v));
        }
        if cols.is_empty() {
            return Ok(basis);
        }
        let next = column_space(&Matrix::from_columns(&cols), tol, 0.0);
        if next.dim() == basis.dim() {
            return Ok(basis);
        }
        basis = next;
    }
}

/// The restriction `Q* S Q` of the representation to an invariant subspace
/// with orthonormal basis `Q`.
pub fn restrict(rep: &SemigroupRep, sub: &SubspaceBasis) -> Result<SemigroupRep> {
    if sub.is_empty() {
        return Err(contract("cannot restrict to the zero subspace"));
    }
    let q = sub.matrix();
    let cut = |m: &Matrix| DenseOperator::new(q.adjoint() * m * &q);
    let restricted = match rep.kind() {
        RepKind::Powers { op } => SemigroupRep::powers(cut(op.matrix())?),
        RepKind::Abelian { generators } => {
            SemigroupRep::abelian(generators.iter().map(|g| cut(g.matrix())).collect::<Result<_>>()?)?
        }
        RepKind::OneParameter { generator, t_max } => SemigroupRep::one_parameter(cut(generator.matrix())?, *t_max)?,
        RepKind::FiniteGroup { elements, .. } => {
            SemigroupRep::finite_group(elements.iter().map(|g| cut(g.matrix())).collect::<Result<_>>()?)?
        }
    };
    restricted.modulated(rep.character().clone())?.with_bound(rep.bound())
}

#[cfg(test)]
mod tests;
