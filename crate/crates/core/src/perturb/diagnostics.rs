use serde::{Deserialize, Serialize};

use crate::scorer::PerplexityScorer;

use super::{NegativeRecord, PerturbError};

/// How much more perplexing negatives are than their source captions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub count: usize,
    /// Fraction of negatives scoring strictly higher than their original.
    pub frac_higher: f64,
    /// Mean of `PP(negative) - PP(original)`.
    pub mean_diff: f64,
}

/// Rescores each original and negative with `scorer` and summarizes the gap.
pub fn negative_stats<'a, I>(pairs: I, scorer: &dyn PerplexityScorer) -> Result<DiagnosticsReport, PerturbError>
where
    I: IntoIterator<Item = (&'a [String], &'a NegativeRecord)>,
{
    let mut batch: Vec<&[String]> = Vec::new();
    for (orig, neg) in pairs {
        batch.push(orig);
        batch.push(&neg.tokens);
    }
    if batch.is_empty() {
        return Err(PerturbError::EmptyInput);
    }
    let scores = scorer.perplexity_batch(&batch)?;
    let count = scores.len() / 2;
    let mut higher = 0usize;
    let mut diff_sum = 0.0;
    for pair in scores.chunks_exact(2) {
        let (orig, neg) = (pair[0], pair[1]);
        if neg > orig {
            higher += 1;
        }
        diff_sum += neg - orig;
    }
    Ok(DiagnosticsReport {
        count,
        frac_higher: higher as f64 / count as f64,
        mean_diff: diff_sum / count as f64,
    })
}
