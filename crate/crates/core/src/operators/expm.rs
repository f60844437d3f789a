// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponential by scaling and squaring with diagonal Padé
//! approximants of degree 3, 5, 7, 9 or 13, chosen from the 1-norm.

use crate::error::{Error, Result};
use crate::operators::dense::{check_dim, DenseOperator, Matrix};
use crate::space::{Vector, C64};

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(m: &Matrix) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `(U, V)` with `U` odd and `V` even in `A`, for the low-degree approximants.
fn pade_uv(a: &Matrix, b: &[f64]) -> (Matrix, Matrix) {
    let d = a.nrows();
    let a2 = a * a;
    let mut pow = Matrix::identity(d, d);
    let mut u = Matrix::zeros(d, d);
    let mut v = Matrix::zeros(d, d);
    for j in 0..b.len() / 2 {
        u += &pow * real(b[2 * j + 1]);
        v += &pow * real(b[2 * j]);
        pow = &pow * &a2;
    }
    (a * u, v)
}

fn pade13_uv(a: &Matrix) -> (Matrix, Matrix) {
    let d = a.nrows();
    let id = Matrix::identity(d, d);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &B13;
    let inner_u = &a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]);
    let u = a * (&a6 * inner_u + &a6 * real(b[7]) + &a4 * real(b[5]) + &a2 * real(b[3]) + &id * real(b[1]));
    let inner_v = &a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]);
    let v = &a6 * inner_v + &a6 * real(b[6]) + &a4 * real(b[4]) + &a2 * real(b[2]) + &id * real(b[0]);
    (u, v)
}

/// `exp(A)`.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    let norm = one_norm(a);
    if !norm.is_finite() {
        return Err(Error::Overflow("matrix has non-finite entries".into()));
    }
    if norm > 1e14 {
        return Err(Error::Overflow(format!("1-norm {norm:e} is beyond the scaling range")));
    }
    for (deg, theta) in THETA {
        if norm <= theta {
            let (u, v) = match deg {
                3 => pade_uv(a, &B3),
                5 => pade_uv(a, &B5),
                7 => pade_uv(a, &B7),
                _ => pade_uv(a, &B9),
            };
            return solve_pade(u, v);
        }
    }
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let scaled = a * real((-s as f64).exp2());
    let (u, v) = pade13_uv(&scaled);
    let mut r = solve_pade(u, v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Overflow("exponential is not representable in double precision".into()));
    }
    Ok(r)
}

fn solve_pade(u: Matrix, v: Matrix) -> Result<Matrix> {
    let p = &v + &u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .ok_or_else(|| Error::Overflow("singular Padé denominator".into()))
}

/// `exp(tA)`, refusing negative `t`.
pub fn expm_t(a: &DenseOperator, t: f64) -> Result<Matrix> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("semigroup time must be finite and >= 0, got {t}")));
    }
    expm(&(a.matrix() * real(t)))
}

/// `exp(tA) x`.
pub fn matrix_exponential_apply(a: &DenseOperator, t: f64, x: &Vector) -> Result<Vector> {
    check_dim(a.dim(), x)?;
    Ok(expm_t(a, t)? * x)
}
