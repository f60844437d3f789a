// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{contract, Error, Result};
use crate::operators::{expm_t, turn, Character, DenseOperator, RepKind, SemigroupRep};
use crate::space::{pairwise_sum_vectors, Vector, C64};

/// Default quadrature tolerance, relative to `M ||x||`.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

const MAX_HALVINGS: u32 = 20;
const MAX_PANELS: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeAverage {
    pub value: Vector,
    /// Step-halving estimate `|I_{h/2} - I_h| / 15` of the quadrature error.
    pub error_estimate: f64,
    /// Step actually used for `value`.
    pub step: f64,
}

/// `(1/s) int_0^s chi(t) S(t) x dt` by composite Simpson with step `<= h`,
/// halved until the error estimate is below [`DEFAULT_QUAD_TOL`].
pub fn time_average(rep: &SemigroupRep, s: f64, h: f64, x: &Vector) -> Result<TimeAverage> {
    time_average_with_tol(rep, s, h, x, DEFAULT_QUAD_TOL)
}

pub fn time_average_with_tol(rep: &SemigroupRep, s: f64, h: f64, x: &Vector, tol: f64) -> Result<TimeAverage> {
    let generator = match rep.kind() {
        RepKind::OneParameter { generator, .. } => generator,
        _ => return Err(contract("time averages need a one-parameter representation")),
    };
    crate::operators::dense::check_dim(generator.dim(), x)?;
    if !(s > 0.0 && h > 0.0 && h <= s) || !s.is_finite() {
        return Err(contract("time average needs 0 < h <= s"));
    }
    if !(tol > 0.0) {
        return Err(contract("quadrature tolerance must be > 0"));
    }
    let freq = match rep.character() {
        Character::Trivial => 0.0,
        Character::Frequency { r } => *r,
        c => return Err(contract(format!("character {c:?} does not act on R_+"))),
    };
    let scale = rep.bound() * x.norm();
    if scale == 0.0 {
        return Ok(TimeAverage { value: Vector::zeros(x.len()), error_estimate: 0.0, step: h });
    }

    let mut panels = ((s / h).ceil() as usize).max(2);
    panels += panels % 2;
    let mut coarse = simpson(generator, freq, s, panels, x)?;
    for _ in 0..MAX_HALVINGS {
        if panels * 2 > MAX_PANELS {
            break;
        }
        panels *= 2;
        let fine = simpson(generator, freq, s, panels, x)?;
        let err = (&fine - &coarse).norm() / 15.0;
        if err <= tol * scale {
            return Ok(TimeAverage { value: fine, error_estimate: err, step: s / panels as f64 });
        }
        coarse = fine;
    }
    Err(Error::NonConvergence(format!(
        "step halving stalled at {panels} panels on [0, {s}] (tolerance {tol:e})"
    )))
}

fn simpson(generator: &DenseOperator, freq: f64, s: f64, panels: usize, x: &Vector) -> Result<Vector> {
    let step = s / panels as f64;
    let e = expm_t(generator, step)? * turn((freq * step).rem_euclid(1.0));
    let mut terms = Vec::with_capacity(panels + 1);
    let mut v = x.clone();
    for j in 0..=panels {
        let w = if j == 0 || j == panels {
            1.0
        } else if j % 2 == 1 {
            4.0
        } else {
            2.0
        };
        terms.push(&v * C64::new(w, 0.0));
        if j < panels {
            v = &e * v;
        }
    }
    let sum = pairwise_sum_vectors(&terms).expect("nonempty");
    Ok(sum * C64::new(step / (3.0 * s), 0.0))
}
