// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Seeded generators for random finite-dimensional models with known
//! spectral structure. Each generator that promises a mean ergodic
//! projection returns it from the construction, independently of the
//! fixed-space and range-space computations it is later compared with.

use rand::Rng;

use crate::operators::{operator_norm, spectral_norm, DenseOperator, Matrix};
use crate::space::{NormContext, PNorm, Vector, C64};

pub fn complex_entry<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    Matrix::from_fn(d, d, |_, _| complex_entry(rng))
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| complex_entry(rng))
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    let qr = random_matrix(rng, d).qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so that diag(r) is positive
    let mut q = q;
    for j in 0..d {
        let z = r[(j, j)];
        if z.norm() > 0.0 {
            let phase = z / z.norm();
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// Random matrix rescaled so its induced `p`-norm is in `[0.5, 1]`.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, d: usize, p: PNorm) -> DenseOperator {
    let m = random_matrix(rng, d);
    let n = operator_norm(&DenseOperator::new(m.clone()).expect("finite"), &NormContext::Coord(p));
    let target = rng.random_range(0.5..=1.0);
    DenseOperator::new(m * C64::new(target / n, 0.0)).expect("finite")
}

/// Unimodular number `e^{2 pi i t}` with `t` at least `gap` away from 0 mod 1.
fn unimodular_away_from_one<R: Rng + ?Sized>(rng: &mut R, gap: f64) -> C64 {
    let t = rng.random_range(gap..1.0 - gap);
    C64::from_polar(1.0, std::f64::consts::TAU * t)
}

/// A 2-norm contraction with semisimple peripheral spectrum, together with
/// its mean ergodic projection.
#[derive(Clone, Debug)]
pub struct PeripheralModel {
    pub op: DenseOperator,
    pub projection: Matrix,
    pub fixed_dim: usize,
}

/// `W (D + C) W*` with `W` unitary, `D` a diagonal of unimodular entries
/// (`fixed` of them equal to 1, the rest bounded away from 1) and `C` a
/// contraction block of norm at most `0.9`.
pub fn peripheral_contraction<R: Rng + ?Sized>(rng: &mut R, d: usize) -> PeripheralModel {
    assert!(d >= 2);
    let peripheral = rng.random_range(1..=d.div_ceil(2));
    let fixed = rng.random_range(0..=peripheral.min(2));
    let mut core = Matrix::zeros(d, d);
    for j in 0..peripheral {
        core[(j, j)] = if j < fixed { C64::new(1.0, 0.0) } else { unimodular_away_from_one(rng, 0.08) };
    }
    let rest = d - peripheral;
    if rest > 0 {
        let c = random_matrix(rng, rest);
        let c = &c * C64::new(rng.random_range(0.3..0.9) / spectral_norm(&c), 0.0);
        core.view_mut((peripheral, peripheral), (rest, rest)).copy_from(&c);
    }
    let w = random_unitary(rng, d);
    let mut e = Matrix::zeros(d, d);
    for j in 0..fixed {
        e[(j, j)] = C64::new(1.0, 0.0);
    }
    PeripheralModel {
        op: DenseOperator::new(&w * core * w.adjoint()).expect("finite"),
        projection: &w * e * w.adjoint(),
        fixed_dim: fixed,
    }
}

/// Commuting, simultaneously diagonalisable generators `V D_i V^{-1}` with a
/// common eigenbasis of condition number at most 4, so every product of
/// powers has 2-norm at most 4.
#[derive(Clone, Debug)]
pub struct AbelianModel {
    pub generators: Vec<DenseOperator>,
    pub projection: Matrix,
    pub bound: f64,
    pub fixed_dim: usize,
}

pub fn bounded_abelian<R: Rng + ?Sized>(rng: &mut R, d: usize, k: usize) -> AbelianModel {
    assert!(d >= 1 && k >= 1);
    let u1 = random_unitary(rng, d);
    let u2 = random_unitary(rng, d);
    let scales = Matrix::from_diagonal(&Vector::from_fn(d, |_, _| C64::new(rng.random_range(0.5..2.0), 0.0)));
    let v = &u1 * scales * &u2;
    let v_inv = v.clone().try_inverse().expect("well conditioned");
    let sv = crate::linalg::singular_values(&v);
    let cond = sv[0] / sv[sv.len() - 1];

    let mut diags = vec![vec![C64::new(1.0, 0.0); d]; k];
    let mut fixed_dim = 0;
    let mut e = Matrix::zeros(d, d);
    for j in 0..d {
        let is_fixed = rng.random_bool(0.35);
        if is_fixed {
            fixed_dim += 1;
            e[(j, j)] = C64::new(1.0, 0.0);
            continue;
        }
        // one generator is guaranteed to move this direction
        let mover = rng.random_range(0..k);
        for (i, diag) in diags.iter_mut().enumerate() {
            let kind = if i == mover { rng.random_range(0..2) } else { rng.random_range(0..3) };
            diag[j] = match kind {
                0 => unimodular_away_from_one(rng, 0.08),
                1 => C64::from_polar(rng.random_range(0.0..0.85), rng.random_range(0.0..std::f64::consts::TAU)),
                _ => C64::new(1.0, 0.0),
            };
        }
    }
    let generators = diags
        .iter()
        .map(|diag| {
            let dm = Matrix::from_diagonal(&Vector::from_vec(diag.clone()));
            DenseOperator::new(&v * dm * &v_inv).expect("finite")
        })
        .collect();
    AbelianModel { generators, projection: &v * e * &v_inv, bound: cond, fixed_dim }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(&mut rng, 6);
        assert!((u.adjoint() * &u - Matrix::identity(6, 6)).norm() < 1e-12);
    }

    #[test]
    fn peripheral_model_is_a_contraction_with_its_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = peripheral_contraction(&mut rng, 6);
            assert!(spectral_norm(m.op.matrix()) <= 1.0 + 1e-12);
            let p = &m.projection;
            assert!((p * p - p).norm() < 1e-12);
            assert!((m.op.matrix() * p - p).norm() < 1e-12);
        }
    }

    #[test]
    fn abelian_model_commutes() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = bounded_abelian(&mut rng, 5, 3);
        let (a, b) = (m.generators[0].matrix(), m.generators[2].matrix());
        assert!((a * b - b * a).norm() < 1e-10);
        assert!(m.bound <= 4.0 + 1e-9);
    }
}
