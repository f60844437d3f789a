// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a versioned JSON document naming a subcommand, a model
//! and whatever that subcommand needs to evaluate it.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::experiments::{SkewProductModel, DEFAULT_SUP_SLACK};
use crate::mean_ergodic::{BatteryOptions, DEFAULT_RANK_TOL, PRINCIPAL_ANGLE_TOL};
use crate::nets::NetScheme;
use crate::operators::{DenseOperator, GroupElement, MapRule, Matrix};
use crate::space::{PNorm, C64};
use crate::uniform::{FamilyKind, IndexGrid, Targets};

/// Version of the config layout; bumped on any incompatible change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Subcommand {
    Analyze,
    Net,
    Uniform,
    Ww,
    Equivalence,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Analyze => "analyze",
            Subcommand::Net => "net",
            Subcommand::Uniform => "uniform",
            Subcommand::Ww => "ww",
            Subcommand::Equivalence => "equivalence",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub subcommand: Subcommand,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Default output directory; `--out` wins. Not part of the hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schemes: Vec<NetScheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<IndexGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Targets>,
    /// Input vector; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<GroupElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Expectations::is_empty")]
    pub expect: Expectations,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative singular-value cutoff for ranks and null spaces.
    pub rank_tol: f64,
    pub angle_tol: f64,
    /// Convergence threshold for nets, relative to the bound `M`.
    pub net_tol: f64,
    /// Agreement with an independently constructed projection.
    pub oracle_tol: f64,
    /// Relative slack of certified sup norms.
    pub sup_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: DEFAULT_RANK_TOL,
            angle_tol: PRINCIPAL_ANGLE_TOL,
            net_tol: 1e-3,
            oracle_tol: 1e-8,
            sup_slack: DEFAULT_SUP_SLACK,
        }
    }
}

impl Tolerances {
    pub fn battery(&self) -> BatteryOptions {
        BatteryOptions { rank_tol: self.rank_tol, angle_tol: self.angle_tol, net_tol: self.net_tol }
    }
}

/// A complex matrix as real and (optional) imaginary row lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixSpec {
    pub fn to_operator(&self) -> Result<DenseOperator, String> {
        let d = self.re.len();
        if d == 0 || self.re.iter().any(|r| r.len() != d) {
            return Err("matrix must be square and non-empty".into());
        }
        if let Some(im) = &self.im {
            if im.len() != d || im.iter().any(|r| r.len() != d) {
                return Err("imaginary part has a different shape".into());
            }
        }
        let m = Matrix::from_fn(d, d, |i, j| {
            C64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        });
        DenseOperator::new(m).map_err(|e| e.to_string())
    }
}

/// A scalar phase cocycle `e^{2 pi i (freq x + shift)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub freq: i64,
    pub shift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Powers {
        matrix: MatrixSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<f64>,
    },
    Abelian {
        generators: Vec<MatrixSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<f64>,
    },
    OneParameter {
        generator: MatrixSpec,
        t_max: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bound: Option<f64>,
    },
    FiniteGroup {
        elements: Vec<MatrixSpec>,
    },
    /// Powers of seeded random contractions in the given induced norm.
    RandomContractions { count: usize, dim: usize, norm: PNorm },
    /// Seeded contractions with semisimple peripheral spectrum and known
    /// mean ergodic projection.
    RandomPeripheral { count: usize, dim: usize },
    /// Seeded commuting, simultaneously diagonalisable generators.
    RandomAbelian { count: usize, dim: usize, generators: usize },
    /// `x -> x^2` on `[0,1]`: `points` equispaced samples plus `depth`
    /// points accumulating at 1; Cesàro means compared at `n1` and `n2`.
    SquareMap { points: usize, depth: u32, n1: u64, n2: u64 },
    /// Koopman operators of a map twisted by phase cocycles, sampled on a
    /// grid of `grid_points` per axis, applied to `function` whose sup norm
    /// is at most `sup`.
    Koopman {
        map: MapRule,
        cocycles: Vec<PhaseSpec>,
        grid_points: usize,
        function: crate::operators::Formula,
        sup: f64,
    },
    SkewProduct(SkewProductModel),
}

impl ModelSpec {
    pub fn is_matrix_model(&self) -> bool {
        !matches!(self, ModelSpec::SquareMap { .. } | ModelSpec::Koopman { .. } | ModelSpec::SkewProduct(_))
    }

    pub fn is_batch(&self) -> bool {
        matches!(
            self,
            ModelSpec::RandomContractions { .. } | ModelSpec::RandomPeripheral { .. } | ModelSpec::RandomAbelian { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    Cesaro { ns: Vec<u64> },
    /// Abel means at `r = 1 - 2^-j`.
    Abel { js: Vec<u32>, tail_eps: f64 },
    /// Scalar Cesàro means of `lambda^n` on an `oversample * N` circle grid.
    Dirichlet { ns: Vec<u64>, oversample: usize },
}

/// Acceptance checks; each one present becomes a verdict.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_ergodic: Option<bool>,
    /// Last net of the sweep within `net_tol` of the projection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converges: Option<bool>,
    /// Last sup defect of a profile below `sup_tol`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_convergence: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_tol: Option<f64>,
    /// Inclusive range for a log-log slope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_sup_below: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_sup: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_cauchy_defect: Option<f64>,
}

impl Expectations {
    pub fn is_empty(&self) -> bool {
        *self == Expectations::default()
    }
}

/// An invalid config, anchored to a line of the source when possible.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(text: &str, key: &str, message: impl Into<String>) -> Self {
        let needle = format!("\"{key}\"");
        let line = text.lines().position(|l| l.contains(&needle)).map(|i| i + 1);
        ConfigError { line, column: None, message: message.into() }
    }

    /// `path:line:col: message`, omitting what is unknown.
    pub fn render(&self, path: &str) -> String {
        match (self.line, self.column) {
            (Some(l), Some(c)) => format!("{path}:{l}:{c}: {}", self.message),
            (Some(l), None) => format!("{path}:{l}: {}", self.message),
            _ => format!("{path}: {}", self.message),
        }
    }
}

impl RunConfig {
    /// Parses and validates; errors carry the offending line.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError {
            line: Some(e.line()).filter(|&l| l > 0),
            column: Some(e.column()).filter(|&c| c > 0),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|(key, msg)| ConfigError::at(text, key, msg))?;
        Ok(cfg)
    }

    /// Pretty JSON; parsing it back yields an equal config.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 over the tool version and the canonical config, without the
    /// output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = None;
        let mut h = Sha256::new();
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update([0]);
        h.update(serde_json::to_vec(&c).expect("config serializes"));
        hex::encode(h.finalize())
    }

    /// `Err((key, message))`, `key` being the config field to point at.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(("schema_version", format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        let t = &self.tolerances;
        for (key, v) in [
            ("rank_tol", t.rank_tol),
            ("angle_tol", t.angle_tol),
            ("net_tol", t.net_tol),
            ("oracle_tol", t.oracle_tol),
            ("sup_slack", t.sup_slack),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err((key, format!("tolerance {key} must be finite and > 0, got {v}")));
            }
        }
        if let Some(v) = self.expect.sup_tol {
            if !(v > 0.0 && v.is_finite()) {
                return Err(("sup_tol", format!("sup_tol must be finite and > 0, got {v}")));
            }
        }
        if let Some([lo, hi]) = self.expect.slope_range {
            if !(lo <= hi) {
                return Err(("slope_range", "slope_range must be [lo, hi] with lo <= hi".into()));
            }
        }
        for s in &self.schemes {
            s.validate().map_err(|e| ("schemes", e.to_string()))?;
        }
        if let Some(ix) = &self.index {
            ix.validate().map_err(|e| ("index", e.to_string()))?;
        }
        if let Some(m) = &self.model {
            validate_model(m).map_err(|e| ("model", e))?;
        }
        let need = |present: bool, key: &'static str| {
            if present {
                Ok(())
            } else {
                Err((key, format!("subcommand {} needs \"{key}\"", self.subcommand.name())))
            }
        };
        let model = self.model.as_ref();
        match self.subcommand {
            Subcommand::Analyze => {
                need(model.is_some(), "model")?;
                let m = model.unwrap();
                if !(m.is_matrix_model() || matches!(m, ModelSpec::SquareMap { .. })) {
                    return Err(("model", "analyze takes a matrix model or the square map".into()));
                }
            }
            Subcommand::Equivalence => {
                need(model.is_some_and(ModelSpec::is_matrix_model), "model")?;
            }
            Subcommand::Net => {
                need(model.is_some_and(|m| m.is_matrix_model() && !m.is_batch()), "model")?;
                need(!self.schemes.is_empty(), "schemes")?;
            }
            Subcommand::Uniform => {
                need(model.is_some_and(|m| !m.is_batch() && !matches!(m, ModelSpec::SkewProduct(_) | ModelSpec::SquareMap { .. })), "model")?;
                need(self.family.is_some(), "family")?;
                need(self.index.is_some(), "index")?;
                need(!self.schemes.is_empty(), "schemes")?;
            }
            Subcommand::Ww => {
                need(self.experiment.is_some(), "experiment")?;
                if model.is_some_and(|m| !matches!(m, ModelSpec::SkewProduct(_))) {
                    return Err(("model", "ww takes a skew_product model".into()));
                }
            }
        }
        if let Some(p) = &self.probe {
            if p.is_empty() || p.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(("probe", "probe must be a non-empty finite vector".into()));
            }
        }
        match &self.experiment {
            Some(Experiment::Cesaro { ns }) if ns.is_empty() || ns.contains(&0) => {
                Err(("ns", "ns must be non-empty lengths >= 1".into()))
            }
            Some(Experiment::Abel { js, tail_eps }) => {
                if js.is_empty() || js.iter().any(|&j| j == 0 || j > 52) {
                    Err(("js", "js must be non-empty exponents in 1..=52".into()))
                } else if !(*tail_eps > 0.0 && tail_eps.is_finite()) {
                    Err(("tail_eps", "tail_eps must be finite and > 0".into()))
                } else {
                    Ok(())
                }
            }
            Some(Experiment::Dirichlet { ns, oversample }) if ns.is_empty() || ns.contains(&0) || *oversample < 8 => {
                Err(("ns", "dirichlet needs lengths >= 1 and oversample >= 8".into()))
            }
            _ => Ok(()),
        }
    }
}

fn validate_model(m: &ModelSpec) -> Result<(), String> {
    let positive = |v: Option<f64>| match v {
        Some(b) if !(b > 0.0 && b.is_finite()) => Err(format!("bound must be finite and > 0, got {b}")),
        _ => Ok(()),
    };
    match m {
        ModelSpec::Powers { matrix, bound } => {
            matrix.to_operator()?;
            positive(*bound)
        }
        ModelSpec::Abelian { generators, bound } => {
            if generators.is_empty() {
                return Err("at least one generator".into());
            }
            generators.iter().try_for_each(|g| g.to_operator().map(drop))?;
            positive(*bound)
        }
        ModelSpec::OneParameter { generator, t_max, bound } => {
            generator.to_operator()?;
            if !(*t_max > 0.0 && t_max.is_finite()) {
                return Err("t_max must be finite and > 0".into());
            }
            positive(*bound)
        }
        ModelSpec::FiniteGroup { elements } => {
            if elements.is_empty() {
                return Err("at least one element".into());
            }
            elements.iter().try_for_each(|g| g.to_operator().map(drop))
        }
        ModelSpec::RandomContractions { count, dim, .. } | ModelSpec::RandomPeripheral { count, dim } => {
            if *count == 0 || !(2..=64).contains(dim) {
                return Err("random models need count >= 1 and 2 <= dim <= 64".into());
            }
            Ok(())
        }
        ModelSpec::RandomAbelian { count, dim, generators } => {
            if *count == 0 || !(1..=64).contains(dim) || !(1..=4).contains(generators) {
                return Err("random abelian models need count >= 1, 1 <= dim <= 64, 1 <= generators <= 4".into());
            }
            Ok(())
        }
        ModelSpec::SquareMap { points, n1, n2, .. } => {
            if *points < 2 || *n1 == 0 || *n2 == 0 {
                return Err("square map needs points >= 2 and lengths >= 1".into());
            }
            Ok(())
        }
        ModelSpec::Koopman { map, cocycles, grid_points, sup, .. } => {
            crate::operators::DynamicsMap::new(map.clone()).map_err(|e| e.to_string())?;
            if cocycles.is_empty() || *grid_points < 2 || !(*sup > 0.0 && sup.is_finite()) {
                return Err("koopman model needs cocycles, grid_points >= 2 and a finite sup > 0".into());
            }
            Ok(())
        }
        ModelSpec::SkewProduct(s) => s.validate().map_err(|e| e.to_string()),
    }
}
