// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Bounded representations `{S_g : g in G}`: dense matrices, one-parameter
//! semigroups via the matrix exponential, finite groups, and Koopman
//! operators with unitary cocycles.

pub mod dense;
pub mod expm;
pub mod koopman;
pub mod rep;

pub use dense::{matrix_power, operator_norm, power_apply, spectral_norm, DenseOperator, Matrix};
pub use expm::{expm, expm_t, matrix_exponential_apply};
pub use koopman::{Cocycle, DynamicsMap, Formula, KoopmanOperator, MapRule, Observable};
pub use rep::{turn, Character, GroupElement, RepKind, SemigroupRep};
