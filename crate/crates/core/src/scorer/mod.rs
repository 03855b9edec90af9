//! Caption perplexity scoring.
//!
//! Perplexity here is the average negative natural-log likelihood of tokens
//! `2..=n`, each conditioned on its full prefix; the first token is context
//! only. It is not exponentiated.

mod ensemble;
mod ngram;
mod remote;

use crate::corpus::Caption;

pub use ensemble::EnsembleScorer;
pub use ngram::{train_ngram, NGramModel, Smoothing, NGRAM_FORMAT_VERSION, UNK_TOKEN};
pub use remote::{RemoteConfig, RemoteScorerClient, PERPLEXITY_PATH};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScorerError {
    #[error("sequence of {len} token(s) is too short to score (need at least 2)")]
    TooShort { len: usize },
    #[error("scorer unavailable: {0}")]
    Unavailable(String),
    #[error("candidate {index}: {source}")]
    Candidate {
        index: usize,
        #[source]
        source: Box<ScorerError>,
    },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("need at least 2 candidates, got {0}")]
    TooFewCandidates(usize),
}

/// Anything that can assign a perplexity to a token sequence.
///
/// Implementations must be deterministic and reject sequences shorter than
/// two tokens with [`ScorerError::TooShort`].
pub trait PerplexityScorer: Send + Sync {
    fn name(&self) -> &str;

    fn perplexity(&self, tokens: &[String]) -> Result<f64, ScorerError>;

    /// Scores several sequences. Output order matches input order.
    fn perplexity_batch(&self, batch: &[&[String]]) -> Result<Vec<f64>, ScorerError> {
        batch.iter().map(|t| self.perplexity(t)).collect()
    }
}

impl<S: PerplexityScorer + ?Sized> PerplexityScorer for &S {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn perplexity(&self, tokens: &[String]) -> Result<f64, ScorerError> {
        (**self).perplexity(tokens)
    }
    fn perplexity_batch(&self, batch: &[&[String]]) -> Result<Vec<f64>, ScorerError> {
        (**self).perplexity_batch(batch)
    }
}

impl<S: PerplexityScorer + ?Sized> PerplexityScorer for std::sync::Arc<S> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn perplexity(&self, tokens: &[String]) -> Result<f64, ScorerError> {
        (**self).perplexity(tokens)
    }
    fn perplexity_batch(&self, batch: &[&[String]]) -> Result<Vec<f64>, ScorerError> {
        (**self).perplexity_batch(batch)
    }
}

pub(crate) fn check_len(tokens: &[String]) -> Result<(), ScorerError> {
    if tokens.len() < 2 {
        Err(ScorerError::TooShort { len: tokens.len() })
    } else {
        Ok(())
    }
}

/// Averages the negative log-probabilities of the scored tokens (positions
/// `2..=n`). `log_probs` must hold exactly `n - 1` entries.
pub fn mean_negative_log_prob(log_probs: &[f64]) -> f64 {
    -log_probs.iter().sum::<f64>() / log_probs.len() as f64
}

pub fn perplexity(scorer: &dyn PerplexityScorer, caption: &Caption) -> Result<f64, ScorerError> {
    check_len(caption.tokens())?;
    scorer.perplexity(caption.tokens())
}

/// Index of the minimum, ties to the smallest index; the flag reports whether
/// another entry shares the minimum.
pub fn argmin_with_tie(values: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = i;
        }
    }
    let tie = values.iter().enumerate().any(|(i, &v)| i != best && v == values[best]);
    (best, tie)
}

/// Result of picking the lowest-perplexity caption.
#[derive(Debug, Clone, PartialEq)]
pub struct PerplexityPrediction {
    pub index: usize,
    pub perplexities: Vec<f64>,
    pub tie: bool,
}

/// Predicts the true caption as the one with the smallest perplexity.
pub fn predict_true_caption(
    scorer: &dyn PerplexityScorer,
    captions: &[Caption],
) -> Result<PerplexityPrediction, ScorerError> {
    let perplexities = score_candidates(scorer, captions)?;
    let (index, tie) = argmin_with_tie(&perplexities);
    Ok(PerplexityPrediction {
        index,
        perplexities,
        tie,
    })
}

/// Scores every candidate in one batch. On failure the candidates are
/// rescored one by one so the error names the offending index.
pub fn score_candidates(scorer: &dyn PerplexityScorer, captions: &[Caption]) -> Result<Vec<f64>, ScorerError> {
    if captions.len() < 2 {
        return Err(ScorerError::TooFewCandidates(captions.len()));
    }
    for (index, c) in captions.iter().enumerate() {
        check_len(c.tokens()).map_err(|e| ScorerError::Candidate {
            index,
            source: Box::new(e),
        })?;
    }
    let batch: Vec<&[String]> = captions.iter().map(|c| c.tokens()).collect();
    match scorer.perplexity_batch(&batch) {
        Ok(v) => Ok(v),
        Err(batch_err) => {
            for (index, tokens) in batch.iter().enumerate() {
                if let Err(e) = scorer.perplexity(tokens) {
                    return Err(ScorerError::Candidate {
                        index,
                        source: Box::new(e),
                    });
                }
            }
            Err(batch_err)
        }
    }
}
