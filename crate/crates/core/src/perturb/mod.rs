//! Hard-negative caption generation.
//!
//! Four generators share one record type:
//!
//! * **swap** exchanges two content words that carry the same tag;
//! * **assist** draws several swaps and keeps the one the scorer finds most fluent;
//! * **replace** substitutes `k` content words with same-tag words drawn from
//!   corpus frequencies, again keeping the lowest-perplexity trial;
//! * **double** emits one assist and one replace negative per caption.
//!
//! Every generator is driven by a `u64` seed, so a caption, a configuration
//! and a seed fully determine the output.

mod diagnostics;
mod generate;
mod seed;

use std::collections::BTreeSet;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Caption, WordStats};
use crate::scorer::{PerplexityScorer, ScorerError};

pub use diagnostics::{negative_stats, DiagnosticsReport};
pub use generate::{DoubleOutcome, Perturber};
pub use seed::{derive_seed, instance_seed, rng_from_seed};

/// Upper bound on redraws when a sampled replacement equals the original word.
pub const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerturbError {
    #[error("no valid perturbation: {0}")]
    NoValidPerturbation(String),
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error("invalid perturbation config: {0}")]
    InvalidConfig(String),
    #[error("replace generation needs word statistics")]
    MissingStats,
    #[error("no caption/negative pairs given")]
    EmptyInput,
}

/// Method tag carried by each generated record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeMethod {
    Swap,
    Assist,
    Replace,
    DoubleAssist,
    DoubleReplace,
}

impl NegativeMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NegativeMethod::Swap => "swap",
            NegativeMethod::Assist => "assist",
            NegativeMethod::Replace => "replace",
            NegativeMethod::DoubleAssist => "double-assist",
            NegativeMethod::DoubleReplace => "double-replace",
        }
    }
}

/// Generation strategy requested by a caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Swap,
    Assist,
    Replace,
    Double,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "swap" => Ok(Method::Swap),
            "assist" => Ok(Method::Assist),
            "replace" => Ok(Method::Replace),
            "double" => Ok(Method::Double),
            other => Err(format!("unknown method {other:?} (swap|assist|replace|double)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbConfig {
    pub assist_trials: usize,
    pub replace_trials: usize,
    pub replace_k: usize,
    pub seed: u64,
}

impl Default for PerturbConfig {
    fn default() -> Self {
        Self {
            assist_trials: 10,
            replace_trials: 15,
            replace_k: 1,
            seed: 0,
        }
    }
}

impl PerturbConfig {
    pub fn validate(&self) -> Result<(), PerturbError> {
        if self.assist_trials == 0 || self.replace_trials == 0 {
            return Err(PerturbError::InvalidConfig("trial counts must be at least 1".into()));
        }
        if self.replace_k == 0 {
            return Err(PerturbError::InvalidConfig("replace_k must be at least 1".into()));
        }
        Ok(())
    }
}

/// A generated hard negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeRecord {
    pub method: NegativeMethod,
    pub text: String,
    #[serde(skip)]
    pub tokens: Vec<String>,
    pub perplexity: f64,
    pub trials: usize,
    pub edits: Vec<usize>,
    pub seed: u64,
}

/// An edited token sequence and the positions that changed (ascending).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub tokens: Vec<String>,
    pub edits: Vec<usize>,
}

/// A candidate together with its score.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub candidate: Candidate,
    pub perplexity: f64,
}

/// All unordered position pairs `(i, j)`, `i < j`, whose tokens share an
/// open-class tag and differ.
pub fn swap_pairs(caption: &Caption, open_class: &BTreeSet<String>) -> Vec<(usize, usize)> {
    let (tokens, tags) = (caption.tokens(), caption.tags());
    let mut pairs = Vec::new();
    for i in 0..tokens.len() {
        if !open_class.contains(&tags[i]) {
            continue;
        }
        for j in i + 1..tokens.len() {
            if tags[j] == tags[i] && tokens[j] != tokens[i] {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Applies one uniformly chosen valid swap.
pub fn swap_candidate<R: Rng + ?Sized>(
    caption: &Caption,
    open_class: &BTreeSet<String>,
    rng: &mut R,
) -> Result<Candidate, PerturbError> {
    let pairs = swap_pairs(caption, open_class);
    if pairs.is_empty() {
        return Err(PerturbError::NoValidPerturbation(
            "no two distinct content words share a tag".into(),
        ));
    }
    Ok(apply_swap(caption, pairs[rng.random_range(0..pairs.len())]))
}

pub(crate) fn apply_swap(caption: &Caption, (i, j): (usize, usize)) -> Candidate {
    let mut tokens = caption.tokens().to_vec();
    tokens.swap(i, j);
    Candidate {
        tokens,
        edits: vec![i, j],
    }
}

/// Positions a replace trial may edit: open-class tokens whose tag has at
/// least one other word in `stats`.
pub fn replaceable_positions(caption: &Caption, open_class: &BTreeSet<String>, stats: &WordStats) -> Vec<usize> {
    caption
        .tokens()
        .iter()
        .zip(caption.tags())
        .enumerate()
        .filter(|(_, (tok, tag))| {
            open_class.contains(*tag) && stats.tag(tag).is_some_and(|t| t.has_alternative_to(tok))
        })
        .map(|(i, _)| i)
        .collect()
}

/// One replace trial: `k` distinct positions, each given a same-tag word drawn
/// from corpus frequencies and different from the original. Returns `None`
/// when a position keeps drawing its original word past [`MAX_RESAMPLES`].
pub fn replace_candidate<R: Rng + ?Sized>(
    caption: &Caption,
    positions: &[usize],
    stats: &WordStats,
    k: usize,
    rng: &mut R,
) -> Option<Candidate> {
    debug_assert!(positions.len() >= k);
    let mut edits: Vec<usize> = sample_indices(rng, positions.len(), k)
        .into_iter()
        .map(|i| positions[i])
        .collect();
    edits.sort_unstable();
    let mut tokens = caption.tokens().to_vec();
    for &pos in &edits {
        let table = stats.tag(&caption.tags()[pos])?;
        let original = &caption.tokens()[pos];
        let replacement = (0..MAX_RESAMPLES).map(|_| table.sample(rng)).find(|w| *w != original)?;
        tokens[pos] = replacement.to_string();
    }
    Some(Candidate { tokens, edits })
}

/// Earliest trial with the minimum perplexity.
pub fn best_trial(trials: &[Trial]) -> Option<&Trial> {
    let mut best: Option<&Trial> = None;
    for t in trials {
        if best.is_none_or(|b| t.perplexity < b.perplexity) {
            best = Some(t);
        }
    }
    best
}

/// Draws `n` swap candidates and scores them in one batch.
pub fn assist_trials<R: Rng + ?Sized>(
    caption: &Caption,
    open_class: &BTreeSet<String>,
    scorer: &dyn PerplexityScorer,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Trial>, PerturbError> {
    let pairs = swap_pairs(caption, open_class);
    if pairs.is_empty() {
        return Err(PerturbError::NoValidPerturbation(
            "no two distinct content words share a tag".into(),
        ));
    }
    let candidates: Vec<Candidate> = (0..n)
        .map(|_| apply_swap(caption, pairs[rng.random_range(0..pairs.len())]))
        .collect();
    score_trials(candidates, scorer)
}

/// Runs `n` replace trials and scores the ones that succeeded.
pub fn replace_trials<R: Rng + ?Sized>(
    caption: &Caption,
    open_class: &BTreeSet<String>,
    stats: &WordStats,
    scorer: &dyn PerplexityScorer,
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Trial>, PerturbError> {
    let positions = replaceable_positions(caption, open_class, stats);
    if positions.len() < k {
        return Err(PerturbError::NoValidPerturbation(format!(
            "{} replaceable position(s), {k} needed",
            positions.len()
        )));
    }
    let candidates: Vec<Candidate> = (0..n)
        .filter_map(|_| replace_candidate(caption, &positions, stats, k, rng))
        .collect();
    if candidates.is_empty() {
        return Err(PerturbError::NoValidPerturbation(
            "every trial exhausted its replacement draws".into(),
        ));
    }
    score_trials(candidates, scorer)
}

fn score_trials(candidates: Vec<Candidate>, scorer: &dyn PerplexityScorer) -> Result<Vec<Trial>, PerturbError> {
    let batch: Vec<&[String]> = candidates.iter().map(|c| c.tokens.as_slice()).collect();
    let scores = scorer.perplexity_batch(&batch)?;
    Ok(candidates
        .into_iter()
        .zip(scores)
        .map(|(candidate, perplexity)| Trial { candidate, perplexity })
        .collect())
}
