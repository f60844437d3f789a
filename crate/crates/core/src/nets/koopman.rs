// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Nets of Koopman operators on function spaces, kept as lazy observables so
//! that nested averages never interpolate between grids.

use std::sync::Arc;

use crate::error::{contract, Result};
use crate::nets::discrete::abel_terms;
use crate::operators::{turn, KoopmanOperator, Observable};
use crate::space::C64;

/// Weights `lambda^j / n`, `j < n`, with `lambda = e^{2 pi i theta}`.
pub fn cesaro_weights(n: u64, theta: f64) -> Result<Vec<C64>> {
    if n == 0 {
        return Err(contract("Cesàro length must be >= 1"));
    }
    let inv = 1.0 / n as f64;
    // each power from its own angle: no drift from repeated multiplication
    Ok((0..n).map(|j| turn((theta * j as f64).rem_euclid(1.0)) * inv).collect())
}

/// `(1/n) sum_{j<n} (lambda gamma S)^j f`.
pub fn koopman_cesaro(s: &Arc<KoopmanOperator>, n: u64, theta: f64, f: &Observable) -> Result<Observable> {
    s.weighted_orbit(f, 0, cesaro_weights(n, theta)?)
}

/// `(1/n) sum_{j<n} (lambda gamma S)^{start+j} f`, the average over the
/// interval `{start, .., start+n-1}`.
pub fn koopman_folner(s: &Arc<KoopmanOperator>, start: u64, n: u64, theta: f64, f: &Observable) -> Result<Observable> {
    let lead = turn((theta * start as f64).rem_euclid(1.0));
    let weights = cesaro_weights(n, theta)?.into_iter().map(|w| w * lead).collect();
    s.weighted_orbit(f, start, weights)
}

/// `(1-r) sum_{j<N} r^j (lambda gamma S)^j f` with `N` the smallest count
/// whose tail bound `sup|f| r^N` is at most `tail_eps`.
pub fn koopman_abel(
    s: &Arc<KoopmanOperator>,
    r: f64,
    tail_eps: f64,
    theta: f64,
    f: &Observable,
    sup_f: f64,
) -> Result<(Observable, u64)> {
    if !(r > 0.0 && r < 1.0) {
        return Err(contract("Abel parameter must lie in (0,1)"));
    }
    if !(tail_eps > 0.0) {
        return Err(contract("Abel tail tolerance must be > 0"));
    }
    let terms = abel_terms(r, tail_eps, sup_f).max(1);
    let weights = (0..terms)
        .map(|j| turn((theta * j as f64).rem_euclid(1.0)) * ((1.0 - r) * r.powf(j as f64)))
        .collect();
    Ok((s.weighted_orbit(f, 0, weights)?, terms))
}
