// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ergodic operator nets for bounded semigroup representations.
//!
//! The crate builds Cesàro, Abel, continuous time-average, convex-chain and
//! Følner averages, computes fixed spaces and mean ergodic projections of
//! finite-dimensional models, checks the equivalent characterisations of mean
//! ergodicity against each other, and measures uniform (Wiener-Wintner type)
//! convergence of modulated families.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN along with the rest
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod mean_ergodic;
pub mod nets;
pub mod operators;
pub mod random;
pub mod space;
pub mod uniform;

pub use error::{Error, Result};
