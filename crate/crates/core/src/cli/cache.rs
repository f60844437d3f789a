// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

//! Content-addressed result cache.
//!
//! An entry is a directory named by the config hash holding the report
//! files and a manifest of their SHA-256 digests. Entries are assembled in
//! a scratch directory and renamed into place, so an interrupted run never
//! leaves a readable partial entry; an entry whose manifest does not match
//! its files is skipped with a warning.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Overrides the cache root.
pub const CACHE_ENV: &str = "ERGONET_CACHE_DIR";

const MANIFEST: &str = "manifest.json";

#[derive(Serialize, Deserialize)]
struct Manifest {
    hash: String,
    files: BTreeMap<String, String>,
}

/// `$ERGONET_CACHE_DIR`, else `$XDG_CACHE_HOME/ergonet`, else
/// `$HOME/.cache/ergonet`, else `.ergonet-cache`.
pub fn cache_root() -> PathBuf {
    let env = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
    if let Some(p) = env(CACHE_ENV) {
        return p;
    }
    if let Some(p) = env("XDG_CACHE_HOME") {
        return p.join("ergonet");
    }
    env("HOME").map_or_else(|| PathBuf::from(".ergonet-cache"), |h| h.join(".cache").join("ergonet"))
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn entry(&self, hash: &str) -> PathBuf {
        self.root.join(hash)
    }

    /// The files of a complete, intact entry; `None` on a miss.
    pub fn lookup(&self, hash: &str) -> Option<BTreeMap<String, Vec<u8>>> {
        let dir = self.entry(hash);
        if !dir.is_dir() {
            return None;
        }
        match read_entry(&dir, hash) {
            Ok(files) => Some(files),
            Err(e) => {
                log::warn!("ignoring corrupt cache entry {}: {e}", dir.display());
                None
            }
        }
    }

    /// Stores `files` under `hash`, replacing nothing: if another run got
    /// there first its entry is kept.
    pub fn store(&self, hash: &str, files: &BTreeMap<String, Vec<u8>>) -> io::Result<()> {
        fs::create_dir_all(&self.root)?;
        let tmp = self.root.join(format!(".tmp-{hash}-{}", std::process::id()));
        if tmp.exists() {
            fs::remove_dir_all(&tmp)?;
        }
        fs::create_dir(&tmp)?;
        let manifest = Manifest {
            hash: hash.to_string(),
            files: files.iter().map(|(k, v)| (k.clone(), digest(v))).collect(),
        };
        for (name, bytes) in files {
            fs::write(tmp.join(name), bytes)?;
        }
        fs::write(tmp.join(MANIFEST), serde_json::to_vec_pretty(&manifest)?)?;
        let dest = self.entry(hash);
        if dest.exists() && read_entry(&dest, hash).is_err() {
            fs::remove_dir_all(&dest)?;
        }
        match fs::rename(&tmp, &dest) {
            Ok(()) => Ok(()),
            Err(_) if dest.is_dir() => fs::remove_dir_all(&tmp),
            Err(e) => {
                let _ = fs::remove_dir_all(&tmp);
                Err(e)
            }
        }
    }
}

fn read_entry(dir: &Path, hash: &str) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let raw = fs::read(dir.join(MANIFEST)).map_err(|e| format!("manifest: {e}"))?;
    let m: Manifest = serde_json::from_slice(&raw).map_err(|e| format!("manifest: {e}"))?;
    if m.hash != hash {
        return Err(format!("manifest names hash {}", m.hash));
    }
    let mut out = BTreeMap::new();
    for (name, want) in m.files {
        if name.contains(['/', '\\']) || name == MANIFEST {
            return Err(format!("bad file name {name:?}"));
        }
        let bytes = fs::read(dir.join(&name)).map_err(|e| format!("{name}: {e}"))?;
        if digest(&bytes) != want {
            return Err(format!("{name}: digest mismatch"));
        }
        out.insert(name, bytes);
    }
    Ok(out)
}
