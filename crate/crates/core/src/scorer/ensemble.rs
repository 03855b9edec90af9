use std::sync::Arc;

use super::{check_len, PerplexityScorer, ScorerError};

/// Unweighted average of several scorers' perplexities.
///
/// Each member tokenizes and scores on its own terms; only the resulting
/// values are averaged, summed left to right in member order.
#[derive(Clone)]
pub struct EnsembleScorer {
    name: String,
    members: Vec<Arc<dyn PerplexityScorer>>,
}

impl std::fmt::Debug for EnsembleScorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EnsembleScorer").field("name", &self.name).finish()
    }
}

impl EnsembleScorer {
    pub fn new(members: Vec<Arc<dyn PerplexityScorer>>) -> Result<Self, ScorerError> {
        if members.is_empty() {
            return Err(ScorerError::InvalidConfig("ensemble needs at least one member".into()));
        }
        let names: Vec<&str> = members.iter().map(|m| m.name()).collect();
        let name = format!("avg({})", names.join(","));
        Ok(Self { name, members })
    }

    pub fn members(&self) -> &[Arc<dyn PerplexityScorer>] {
        &self.members
    }

    /// Per-member perplexities for every item, `[member][item]`.
    pub fn member_perplexities(&self, batch: &[&[String]]) -> Result<Vec<Vec<f64>>, ScorerError> {
        for t in batch {
            check_len(t)?;
        }
        self.members.iter().map(|m| m.perplexity_batch(batch)).collect()
    }

    /// Per-member values (`[member][item]`) together with their mean.
    pub fn score_with_members(&self, batch: &[&[String]]) -> Result<(Vec<Vec<f64>>, Vec<f64>), ScorerError> {
        let per_member = self.member_perplexities(batch)?;
        for m in &per_member {
            if m.len() != batch.len() {
                return Err(ScorerError::Unavailable(format!(
                    "member returned {} values for {} inputs",
                    m.len(),
                    batch.len()
                )));
            }
        }
        let mean = mean_over_members(&per_member, batch.len());
        Ok((per_member, mean))
    }
}

/// Mean of per-member values for each item, summing members left to right.
pub(crate) fn mean_over_members(per_member: &[Vec<f64>], items: usize) -> Vec<f64> {
    let n = per_member.len() as f64;
    (0..items)
        .map(|i| per_member.iter().fold(0.0, |acc, m| acc + m[i]) / n)
        .collect()
}

impl PerplexityScorer for EnsembleScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn perplexity(&self, tokens: &[String]) -> Result<f64, ScorerError> {
        Ok(self.perplexity_batch(&[tokens])?[0])
    }

    fn perplexity_batch(&self, batch: &[&[String]]) -> Result<Vec<f64>, ScorerError> {
        Ok(self.score_with_members(batch)?.1)
    }
}
