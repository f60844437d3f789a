// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ergodic nets `A_alpha` in the convex hull of a representation, and their
//! asymptotic-invariance defects.
//!
//! Every discrete net is built as an explicit finite convex combination of
//! the `S_g` (weights can be recorded); continuous time averages are Simpson
//! quadratures of the defining integral.

mod chain;
mod discrete;
mod folner;
pub mod koopman;
mod time;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operators::{GroupElement, Matrix, RepKind, SemigroupRep};
use crate::space::{NormContext, Normed, Vector, C64};

pub use chain::{chain_matrix, chain_weights, convex_chain, ChainRule, ChainTrace, ConvexWeights, MAX_RECORDED_SUPPORT};
pub use discrete::{abel, abel_terms, cesaro, cesaro_direct, cesaro_operator, AbelValue, DIRECT_CESARO_MAX};
pub use folner::{box_matrix, folner_average, FolnerSequence, FolnerSet};
pub use time::{time_average, time_average_with_tol, TimeAverage, DEFAULT_QUAD_TOL};

/// Which ergodic net, with its index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum NetScheme {
    Cesaro { n: u64 },
    Abel { r: f64, tail_eps: f64 },
    TimeAverage { s: f64, h: f64 },
    ConvexChain { rule: ChainRule, length: usize },
    Folner { set: FolnerSet },
}

impl NetScheme {
    pub fn validate(&self) -> Result<()> {
        use crate::error::contract;
        match self {
            NetScheme::Cesaro { n } if *n == 0 => Err(contract("Cesàro length must be >= 1")),
            NetScheme::Abel { r, .. } if !(*r > 0.0 && *r < 1.0) => Err(contract("Abel parameter must lie in (0,1)")),
            NetScheme::Abel { tail_eps, .. } if !(*tail_eps > 0.0) => Err(contract("Abel tail tolerance must be > 0")),
            NetScheme::TimeAverage { s, h } if !(*s > 0.0 && *h > 0.0 && h <= s) => {
                Err(contract("time average needs 0 < h <= s"))
            }
            NetScheme::Folner { set } => set.validate(),
            _ => Ok(()),
        }
    }
}

/// `A x` for the given scheme.
pub fn evaluate(scheme: &NetScheme, rep: &SemigroupRep, x: &Vector) -> Result<Vector> {
    scheme.validate()?;
    match scheme {
        NetScheme::Cesaro { n } => cesaro(rep, *n, x),
        NetScheme::Abel { r, tail_eps } => Ok(abel(rep, *r, *tail_eps, x)?.value),
        NetScheme::TimeAverage { s, h } => Ok(time_average(rep, *s, *h, x)?.value),
        NetScheme::ConvexChain { rule, length } => {
            let trace = convex_chain(rep, *rule, *length, x, false)?;
            Ok(trace.values.last().cloned().expect("chain has A_0"))
        }
        NetScheme::Folner { set } => folner_average(rep, set, x),
    }
}

/// The operator `A` as a matrix.
///
/// Long Cesàro nets use binary splitting, Abel nets the resolvent
/// `(1-r)(I - rS)^{-1}` (the untruncated series), boxes and chains products of
/// per-generator Cesàro matrices. Everything else is evaluated columnwise.
pub fn net_matrix(scheme: &NetScheme, rep: &SemigroupRep) -> Result<Matrix> {
    scheme.validate()?;
    match (scheme, rep.kind()) {
        (NetScheme::Cesaro { n }, _) if *n > DIRECT_CESARO_MAX => {
            return Ok(cesaro_operator(rep.single_operator()?.matrix(), *n));
        }
        (NetScheme::Abel { r, .. }, RepKind::Powers { .. }) => {
            let s = rep.single_operator()?;
            let d = s.dim();
            let m = Matrix::identity(d, d) - s.matrix() * C64::new(*r, 0.0);
            let inv = m
                .try_inverse()
                .ok_or_else(|| crate::error::Error::Domain("I - rS is singular".into()))?;
            return Ok(inv * C64::new(1.0 - r, 0.0));
        }
        (NetScheme::Folner { set: FolnerSet::Box { start, lens } }, RepKind::Abelian { .. }) => {
            return box_matrix(rep, start, lens);
        }
        (NetScheme::ConvexChain { rule, length }, RepKind::Powers { .. } | RepKind::Abelian { .. }) => {
            return chain_matrix(rep, *rule, *length);
        }
        _ => {}
    }
    let d = rep.dim();
    let mut m = Matrix::zeros(d, d);
    for j in 0..d {
        let mut e = Vector::zeros(d);
        e[j] = C64::new(1.0, 0.0);
        m.set_column(j, &evaluate(scheme, rep, &e)?);
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

/// Right: `||A x - A S_g x||`; left: `||A x - S_g A x||`.
pub fn invariance_defect(
    scheme: &NetScheme,
    rep: &SemigroupRep,
    g: &GroupElement,
    x: &Vector,
    side: Side,
    ctx: &NormContext,
) -> Result<f64> {
    let ax = evaluate(scheme, rep, x)?;
    let other = match side {
        Side::Right => evaluate(scheme, rep, &rep.apply(g, x)?)?,
        Side::Left => rep.apply(g, &ax)?,
    };
    (ax - other).norm_in(ctx)
}

/// A net evaluated at one input, with optional invariance diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct NetEvaluation {
    pub scheme: NetScheme,
    pub input: Vector,
    pub output: Vector,
    pub defect_right: Option<f64>,
    pub defect_left: Option<f64>,
}

impl NetEvaluation {
    /// Evaluates the net and, when `g` is given, both invariance defects.
    pub fn run(scheme: &NetScheme, rep: &SemigroupRep, x: &Vector, g: Option<&GroupElement>, ctx: &NormContext) -> Result<Self> {
        let output = evaluate(scheme, rep, x)?;
        let (defect_right, defect_left) = match g {
            Some(g) => (
                Some(invariance_defect(scheme, rep, g, x, Side::Right, ctx)?),
                Some(invariance_defect(scheme, rep, g, x, Side::Left, ctx)?),
            ),
            None => (None, None),
        };
        Ok(NetEvaluation { scheme: scheme.clone(), input: x.clone(), output, defect_right, defect_left })
    }
}

#[cfg(test)]
mod tests;
