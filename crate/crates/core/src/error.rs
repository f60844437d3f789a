// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("not mean ergodic: {0}")]
    NotMeanErgodic(String),

    #[error("inconsistent equivalence verdicts: {0}")]
    Inconsistent(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
