use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lingprior_core::corpus::DEFAULT_OPEN_CLASS;
use lingprior_core::{Method, PerturbConfig, RemoteConfig, Smoothing};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Opts;

pub const ENV_REMOTE_URL: &str = "LINGPRIOR_REMOTE_URL";

/// Contents of a `--config` TOML file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub scorers: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub open_class: Option<Vec<String>>,
    #[serde(default)]
    pub perturb: FilePerturb,
    #[serde(default)]
    pub metrics: FileMetrics,
    #[serde(default)]
    pub ngram: FileNgram,
    pub remote: Option<RemoteConfig>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilePerturb {
    pub method: Option<Method>,
    pub assist_trials: Option<usize>,
    pub replace_trials: Option<usize>,
    pub replace_k: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileMetrics {
    pub bins: Option<usize>,
    pub min_count: Option<usize>,
    pub min_hard: Option<usize>,
    pub first_caption_only: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileNgram {
    pub order: Option<usize>,
    pub smoothing: Option<Smoothing>,
    pub vocab_min_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsOptions {
    pub bins: usize,
    pub min_count: usize,
    pub min_hard: usize,
    pub first_caption_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NgramOptions {
    pub order: usize,
    pub smoothing: Smoothing,
    pub vocab_min_count: u64,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub dataset: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub scorers: Vec<String>,
    pub method: Method,
    pub perturb: PerturbConfig,
    pub metrics: MetricsOptions,
    pub ngram: NgramOptions,
    pub remote: RemoteConfig,
    pub open_class: BTreeSet<String>,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub stdout: bool,
}

pub fn parse_smoothing(s: &str) -> Result<Smoothing> {
    let (kind, param) = match s.split_once(':') {
        Some((k, p)) => (
            k,
            Some(
                p.parse::<f64>()
                    .with_context(|| format!("bad smoothing parameter in {s:?}"))?,
            ),
        ),
        None => (s, None),
    };
    Ok(match (kind, param) {
        ("mle", None) => Smoothing::Mle,
        ("additive", p) => Smoothing::Additive {
            alpha: p.unwrap_or(1.0),
        },
        ("absolute-discount", p) => Smoothing::AbsoluteDiscount {
            discount: p.unwrap_or(0.75),
        },
        _ => bail!("unknown smoothing {s:?} (mle | additive[:alpha] | absolute-discount[:d])"),
    })
}

impl RunConfig {
    /// Merges flags over the config file over defaults.
    pub fn resolve(command: &str, opts: &Opts) -> Result<Self> {
        let file = match &opts.config {
            Some(p) => load_file_config(p)?,
            None => FileConfig::default(),
        };
        let defaults = PerturbConfig::default();
        let smoothing = match &opts.smoothing {
            Some(s) => parse_smoothing(s)?,
            None => file.ngram.smoothing.unwrap_or_default(),
        };
        let mut remote = file.remote.clone().unwrap_or_default();
        if remote.url.is_empty() {
            remote.url = std::env::var(ENV_REMOTE_URL).unwrap_or_default();
        }
        let open_class = match &file.open_class {
            Some(v) => v.iter().cloned().collect(),
            None => DEFAULT_OPEN_CLASS.iter().map(|s| s.to_string()).collect(),
        };
        let out = pick(opts.out.clone(), file.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
        let cache = opts
            .use_cache
            .clone()
            .map(|p| p.unwrap_or_else(|| out.join("perplexities.jsonl")));
        let cfg = Self {
            command: command.to_string(),
            dataset: pick(opts.dataset.clone(), file.dataset),
            corpus: pick(opts.corpus.clone(), file.corpus),
            lexicon: pick(opts.lexicon.clone(), file.lexicon),
            scores: pick(opts.scores.clone(), file.scores),
            embeddings: pick(opts.embeddings.clone(), file.embeddings),
            cache,
            scorers: if opts.scorers.is_empty() {
                file.scorers.unwrap_or_default()
            } else {
                opts.scorers.clone()
            },
            method: pick(opts.method, file.perturb.method).unwrap_or(Method::Swap),
            perturb: PerturbConfig {
                assist_trials: pick(opts.assist_trials, file.perturb.assist_trials).unwrap_or(defaults.assist_trials),
                replace_trials: pick(opts.replace_trials, file.perturb.replace_trials)
                    .unwrap_or(defaults.replace_trials),
                replace_k: pick(opts.replace_k, file.perturb.replace_k).unwrap_or(defaults.replace_k),
                seed: pick(opts.seed, file.seed).unwrap_or(0),
            },
            metrics: MetricsOptions {
                bins: pick(opts.bins, file.metrics.bins).unwrap_or(10),
                min_count: pick(opts.min_count, file.metrics.min_count).unwrap_or(10),
                min_hard: pick(opts.min_hard, file.metrics.min_hard).unwrap_or(10),
                first_caption_only: opts.first_caption_only || file.metrics.first_caption_only.unwrap_or(false),
            },
            ngram: NgramOptions {
                order: pick(opts.order, file.ngram.order).unwrap_or(3),
                smoothing,
                vocab_min_count: pick(opts.vocab_min_count, file.ngram.vocab_min_count).unwrap_or(1),
            },
            remote,
            open_class,
            seed: pick(opts.seed, file.seed).unwrap_or(0),
            out,
            workers: pick(opts.workers, file.workers),
            stdout: opts.stdout,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        self.perturb.validate()?;
        if self.metrics.bins == 0 {
            bail!("--bins must be at least 1");
        }
        if self.ngram.order == 0 {
            bail!("--order must be at least 1");
        }
        if self.workers == Some(0) {
            bail!("--workers must be at least 1");
        }
        if self.scores.is_some() && self.embeddings.is_some() {
            bail!("give either --scores or --embeddings, not both");
        }
        for p in [
            &self.dataset,
            &self.corpus,
            &self.lexicon,
            &self.scores,
            &self.embeddings,
            &self.cache,
        ]
        .into_iter()
        .flatten()
        {
            if !p.exists() {
                bail!("input path {} does not exist", p.display());
            }
        }
        Ok(())
    }

    /// Hash over everything that can change an artifact's content. Worker
    /// count, output location, stdout echo and the perplexity cache path
    /// (a cache holds exactly what rescoring would produce) are left out.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        let obj = v.as_object_mut().expect("config is an object");
        for k in ["workers", "out", "stdout", "cache"] {
            obj.remove(k);
        }
        let digest = Sha256::digest(serde_json::to_vec(&v).expect("value serializes"));
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn require<'a>(&self, p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        match p {
            Some(p) => Ok(p.as_path()),
            None => bail!("{} needs {flag}", self.command),
        }
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn load_file_config(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
