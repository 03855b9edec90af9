use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use lingprior_core::corpus::{read_lines, tokenize};
use lingprior_core::scorer::train_ngram;
use lingprior_core::{EnsembleScorer, NGramModel, PerplexityScorer, RemoteConfig, RemoteScorerClient};

use crate::config::{RunConfig, ENV_REMOTE_URL};

/// One parsed `--scorer` value.
#[derive(Debug, Clone, PartialEq)]
pub enum ScorerSpec {
    NgramFile(String),
    NgramOrder(usize),
    Remote(Option<String>),
}

impl std::str::FromStr for ScorerSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        Ok(match (kind, arg) {
            ("ngram", Some(p)) if !p.is_empty() => ScorerSpec::NgramFile(p.to_string()),
            ("ngram-order", Some(n)) => {
                let n: usize = n.parse().with_context(|| format!("bad order in {s:?}"))?;
                if n == 0 {
                    bail!("n-gram order must be at least 1");
                }
                ScorerSpec::NgramOrder(n)
            }
            ("remote", None) => ScorerSpec::Remote(None),
            ("remote", Some(u)) if !u.is_empty() => ScorerSpec::Remote(Some(u.to_string())),
            _ => bail!("unknown scorer {s:?} (ngram:<file> | ngram-order:<n> | remote[:<url>])"),
        })
    }
}

/// Reads and tokenizes a caption corpus.
pub fn tokenized_corpus(path: &Path) -> Result<Vec<Vec<String>>> {
    let lines = read_lines(path)?;
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| tokenize(l).with_context(|| format!("{}:{}", path.display(), i + 1)))
        .collect()
}

pub fn train(cfg: &RunConfig, corpus: &[Vec<String>], order: usize) -> Result<NGramModel> {
    Ok(train_ngram(
        corpus,
        order,
        cfg.ngram.smoothing,
        cfg.ngram.vocab_min_count,
    )?)
}

/// Builds the averaged scorer from every `--scorer`. A corpus is tokenized
/// at most once, and only if some member trains on it.
pub fn build_ensemble(cfg: &RunConfig) -> Result<EnsembleScorer> {
    if cfg.scorers.is_empty() {
        bail!("{} needs at least one --scorer", cfg.command);
    }
    let specs: Vec<ScorerSpec> = cfg.scorers.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    let mut corpus: Option<Vec<Vec<String>>> = None;
    let mut members: Vec<Arc<dyn PerplexityScorer>> = Vec::new();
    for spec in specs {
        let member: Arc<dyn PerplexityScorer> = match spec {
            ScorerSpec::NgramFile(p) => {
                Arc::new(NGramModel::load(Path::new(&p)).with_context(|| format!("loading {p}"))?)
            }
            ScorerSpec::NgramOrder(n) => {
                if corpus.is_none() {
                    let path = cfg.require(&cfg.corpus, "--corpus to train ngram-order scorers")?;
                    corpus = Some(tokenized_corpus(path)?);
                }
                Arc::new(train(cfg, corpus.as_deref().unwrap(), n)?)
            }
            ScorerSpec::Remote(url) => {
                let url = url.unwrap_or_else(|| cfg.remote.url.clone());
                if url.is_empty() {
                    bail!("remote scorer needs a URL (remote:<url> or {ENV_REMOTE_URL})");
                }
                Arc::new(RemoteScorerClient::new(RemoteConfig {
                    url,
                    ..cfg.remote.clone()
                })?)
            }
        };
        log::info!("scorer member {}", member.name());
        members.push(member);
    }
    Ok(EnsembleScorer::new(members)?)
}
