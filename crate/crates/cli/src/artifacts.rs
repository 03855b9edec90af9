use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// Provenance stamped into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Meta {
    pub fn new(cfg: &RunConfig) -> Self {
        Self {
            tool: "lingprior",
            version: env!("CARGO_PKG_VERSION"),
            command: cfg.command.clone(),
            config_hash: cfg.hash(),
            seed: cfg.seed,
        }
    }
}

/// Collects the files a command writes and records them in a manifest.
pub struct Artifacts {
    dir: PathBuf,
    meta: Meta,
    files: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: &'a T,
}

impl Artifacts {
    pub fn create(cfg: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
        Ok(Self {
            dir: cfg.out.clone(),
            meta: Meta::new(cfg),
            files: BTreeMap::new(),
        })
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        let digest: String = Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect();
        self.files.insert(name.to_string(), digest);
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// Pretty JSON with a leading `meta` object merged into `body`'s fields.
    pub fn write_json<T: Serialize>(&mut self, name: &str, body: &T) -> Result<Vec<u8>> {
        let mut bytes = serde_json::to_vec_pretty(&Stamped { meta: &self.meta, body })?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)?;
        Ok(bytes)
    }

    pub fn write_jsonl<T: Serialize>(&mut self, name: &str, lines: &[T]) -> Result<Vec<u8>> {
        let mut bytes = Vec::new();
        for l in lines {
            serde_json::to_writer(&mut bytes, l)?;
            bytes.push(b'\n');
        }
        self.write_bytes(name, &bytes)?;
        Ok(bytes)
    }

    /// Writes `<command>.manifest.json` listing every file's SHA-256, so
    /// JSONL outputs carry the same provenance as the JSON ones.
    pub fn finish(self) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            files: &'a BTreeMap<String, String>,
        }
        let name = format!("{}.manifest.json", self.meta.command);
        let mut bytes = serde_json::to_vec_pretty(&Stamped {
            meta: &self.meta,
            body: &Manifest { files: &self.files },
        })?;
        bytes.push(b'\n');
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Echoes the resolved configuration next to the outputs.
pub fn write_effective_config(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let mut bytes = serde_json::to_vec_pretty(cfg)?;
    bytes.push(b'\n');
    let path: &Path = &cfg.out.join(format!("{}.effective_config.json", cfg.command));
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
