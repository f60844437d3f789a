// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Batch runner behind the `ergonet` binary.
//!
//! `ergonet <subcommand> --config path [--out dir] [--jobs n] [--no-cache]`
//! writes `report.csv`, `report.json` and `plot_*.csv` into the output
//! directory. Exit status: 0 when every verdict passes, 1 when one fails (or
//! the computation itself fails), 2 when the config is unreadable or invalid.

pub mod cache;
pub mod config;
pub mod report;
pub mod tasks;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::{json, Value};

pub use cache::{cache_root, Cache, CACHE_ENV};
pub use config::{RunConfig, Subcommand, SCHEMA_VERSION};
pub use report::{Cell, Plot, Report, Verdict};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const DEFAULT_OUT: &str = "ergonet-out";

#[derive(Debug, Parser)]
#[command(name = "ergonet", version, about = "Ergodic nets, mean ergodic projections and uniform families")]
pub struct Args {
    #[arg(value_enum)]
    pub subcommand: Subcommand,
    /// JSON run config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Neither read nor write the result cache.
    #[arg(long)]
    pub no_cache: bool,
}

/// What a run did, for the binary to print and exit with.
#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub out_dir: Option<PathBuf>,
    pub cached: bool,
    pub verdicts: Vec<Verdict>,
    pub message: Option<String>,
}

impl Outcome {
    fn fail(code: i32, message: String) -> Self {
        Outcome { code, out_dir: None, cached: false, verdicts: vec![], message: Some(message) }
    }
}

fn timestamp() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn report_json(cfg: &RunConfig, hash: &str, r: &Report) -> Value {
    json!({
        "tool": "ergonet",
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
        "subcommand": cfg.subcommand,
        "config_hash": hash,
        "timestamp": timestamp(),
        "cached": false,
        "passed": r.passed(),
        "config": cfg,
        "columns": r.columns,
        "rows": r.rows_json(),
        "verdicts": r.verdicts,
        "plots": r.plots.iter().map(Plot::file_name).collect::<Vec<_>>(),
        "details": r.details,
    })
}

/// Output file name to contents.
type Files = BTreeMap<String, Vec<u8>>;

fn artifacts(cfg: &RunConfig, hash: &str, r: &Report) -> Files {
    let mut files = BTreeMap::new();
    files.insert("report.csv".to_string(), r.to_csv().into_bytes());
    let js = serde_json::to_vec_pretty(&report_json(cfg, hash, r)).expect("report serializes");
    files.insert("report.json".to_string(), js);
    for p in &r.plots {
        files.insert(p.file_name(), p.to_csv().into_bytes());
    }
    files
}

fn write_out(dir: &Path, files: &Files) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, dir.join(name))?;
    }
    Ok(())
}

/// A cached entry with its report.json re-stamped; `None` if unusable.
fn from_cache(mut files: Files) -> Option<(Files, Vec<Verdict>)> {
    let mut js: Value = serde_json::from_slice(files.get("report.json")?).ok()?;
    let verdicts: Vec<Verdict> = serde_json::from_value(js.get("verdicts")?.clone()).ok()?;
    files.get("report.csv")?;
    js["cached"] = json!(true);
    js["timestamp"] = json!(timestamp());
    files.insert("report.json".into(), serde_json::to_vec_pretty(&js).ok()?);
    Some((files, verdicts))
}

/// Runs one config end to end.
pub fn execute(args: &Args) -> Outcome {
    let path = args.config.display().to_string();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return Outcome::fail(EXIT_CONFIG, format!("{path}: cannot read config: {e}")),
    };
    let cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => return Outcome::fail(EXIT_CONFIG, e.render(&path)),
    };
    if cfg.subcommand != args.subcommand {
        let line = text.lines().position(|l| l.contains("\"subcommand\"")).map_or(0, |i| i + 1);
        return Outcome::fail(
            EXIT_CONFIG,
            format!("{path}:{line}: config is for `{}`, not `{}`", cfg.subcommand.name(), args.subcommand.name()),
        );
    }
    let out = args.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let hash = cfg.hash();
    let cache = (!args.no_cache).then(|| Cache::new(cache_root()));

    if let Some(hit) = cache.as_ref().and_then(|c| c.lookup(&hash)) {
        match from_cache(hit) {
            Some((files, verdicts)) => {
                if let Err(e) = write_out(&out, &files) {
                    return Outcome::fail(EXIT_VERDICT, format!("{}: {e}", out.display()));
                }
                let code = if verdicts.iter().all(|v| v.passed) { EXIT_OK } else { EXIT_VERDICT };
                return Outcome { code, out_dir: Some(out), cached: true, verdicts, message: None };
            }
            None => log::warn!("ignoring unreadable cached report for {hash}"),
        }
    }

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.jobs).build() {
        Ok(p) => p,
        Err(e) => return Outcome::fail(EXIT_VERDICT, format!("cannot start workers: {e}")),
    };
    let report = match pool.install(|| tasks::run(&cfg)) {
        Ok(r) => r,
        Err(e @ (Error::Config(_) | Error::Contract(_) | Error::Refused(_) | Error::Domain(_))) => {
            return Outcome::fail(EXIT_CONFIG, format!("{path}: {e}"))
        }
        Err(e) => return Outcome::fail(EXIT_VERDICT, format!("{path}: run failed: {e}")),
    };
    let files = artifacts(&cfg, &hash, &report);
    if let Err(e) = write_out(&out, &files) {
        return Outcome::fail(EXIT_VERDICT, format!("{}: {e}", out.display()));
    }
    if let Some(c) = &cache {
        if let Err(e) = c.store(&hash, &files) {
            log::warn!("could not cache results under {}: {e}", c.root().display());
        }
    }
    let code = if report.passed() { EXIT_OK } else { EXIT_VERDICT };
    Outcome { code, out_dir: Some(out), cached: false, verdicts: report.verdicts, message: None }
}

/// Parses `argv`, runs, prints a summary and returns the exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let o = execute(&args);
    if let Some(m) = &o.message {
        eprintln!("error: {m}");
    }
    for v in &o.verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    if let Some(d) = &o.out_dir {
        println!("{}{}", d.display(), if o.cached { " (cached)" } else { "" });
    }
    o.code
}
