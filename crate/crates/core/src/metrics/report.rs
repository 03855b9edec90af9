use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::EvalInstance;

use super::{
    binned_grid, hard_relationships, predict_from_scores, BinnedGrid, HardSet, MetricsError, RelationReport,
    ScoreMatrix,
};

/// Accuracy summary for one model against one hard set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub hard_scorer: String,
    pub overall_accuracy: f64,
    pub hard_test_accuracy: f64,
    /// `overall_accuracy - hard_test_accuracy`.
    pub linguistic_gap: f64,
    /// Accuracy on the non-hard instances; absent when every instance is hard.
    pub easy_accuracy: Option<f64>,
    pub total_count: usize,
    pub correct_count: usize,
    pub hard_count: usize,
    pub hard_correct_count: usize,
    /// Instances where the perplexity scorer tied on the true caption.
    pub ties: usize,
    /// Instances where the model's top score was shared.
    pub model_ties: usize,
    /// Instances dropped because the perplexity scorer could not score them.
    pub excluded: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relations: Option<RelationReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<BinnedGrid>,
}

/// Per-instance view joining the dataset, the model scores and the hard set.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOutcome {
    pub id: String,
    pub true_index: usize,
    pub prediction: usize,
    pub model_tie: bool,
    pub hard: bool,
    pub relation: Option<String>,
    pub perplexities: Vec<f64>,
}

impl InstanceOutcome {
    pub fn correct(&self) -> bool {
        self.prediction == self.true_index
    }
}

/// Every scorable instance, in id order, ready for the individual metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub outcomes: Vec<InstanceOutcome>,
    pub hard_scorer: String,
    pub ties: usize,
    pub excluded: usize,
}

impl Evaluation {
    pub fn new(dataset: &[EvalInstance], scores: &ScoreMatrix, hard: &HardSet) -> Result<Self, MetricsError> {
        let mut seen = HashSet::new();
        let mut by_id = BTreeMap::new();
        for inst in dataset {
            if !seen.insert(inst.id.as_str()) {
                return Err(MetricsError::DuplicateId(inst.id.clone()));
            }
            by_id.insert(inst.id.as_str(), inst);
        }
        for (id, _) in scores.iter() {
            if !by_id.contains_key(id) {
                return Err(MetricsError::UnknownId(id.to_string()));
            }
        }
        for id in hard
            .hard
            .iter()
            .chain(hard.perplexities.keys())
            .chain(hard.excluded.keys())
        {
            if !by_id.contains_key(id.as_str()) {
                return Err(MetricsError::UnknownId(id.clone()));
            }
        }
        let mut outcomes = Vec::new();
        let mut excluded = 0;
        for (id, inst) in by_id {
            let Some(pps) = hard.perplexities.get(id) else {
                excluded += 1;
                continue;
            };
            let s = scores
                .get(id)
                .ok_or_else(|| MetricsError::MissingScores(id.to_string()))?;
            if s.len() != inst.captions.len() {
                return Err(MetricsError::ScoreLength {
                    id: id.to_string(),
                    expected: inst.captions.len(),
                    got: s.len(),
                });
            }
            let (prediction, model_tie) = predict_from_scores(s)?;
            outcomes.push(InstanceOutcome {
                id: id.to_string(),
                true_index: inst.true_index,
                prediction,
                model_tie,
                hard: hard.contains(id),
                relation: inst.relation.clone(),
                perplexities: pps.clone(),
            });
        }
        Ok(Self {
            outcomes,
            hard_scorer: hard.scorer.clone(),
            ties: hard.ties,
            excluded,
        })
    }

    pub fn report(&self) -> Result<MetricsReport, MetricsError> {
        let total = self.outcomes.len();
        if total == 0 {
            return Err(MetricsError::NoInstances);
        }
        let correct = self.outcomes.iter().filter(|o| o.correct()).count();
        let hard_count = self.outcomes.iter().filter(|o| o.hard).count();
        if hard_count == 0 {
            return Err(MetricsError::HardSetEmpty);
        }
        let hard_correct = self.outcomes.iter().filter(|o| o.hard && o.correct()).count();
        let overall = correct as f64 / total as f64;
        let hard_acc = hard_correct as f64 / hard_count as f64;
        let easy_count = total - hard_count;
        Ok(MetricsReport {
            hard_scorer: self.hard_scorer.clone(),
            overall_accuracy: overall,
            hard_test_accuracy: hard_acc,
            linguistic_gap: overall - hard_acc,
            easy_accuracy: (easy_count > 0).then(|| (correct - hard_correct) as f64 / easy_count as f64),
            total_count: total,
            correct_count: correct,
            hard_count,
            hard_correct_count: hard_correct,
            ties: self.ties,
            model_ties: self.outcomes.iter().filter(|o| o.model_tie).count(),
            excluded: self.excluded,
            relations: None,
            grid: None,
        })
    }
}

/// Fraction of instances whose highest-scoring caption is the true one.
pub fn overall_accuracy(dataset: &[EvalInstance], scores: &ScoreMatrix) -> Result<f64, MetricsError> {
    if dataset.is_empty() {
        return Err(MetricsError::NoInstances);
    }
    let mut correct = 0usize;
    for inst in dataset {
        let s = scores
            .get(&inst.id)
            .ok_or_else(|| MetricsError::MissingScores(inst.id.clone()))?;
        if s.len() != inst.captions.len() {
            return Err(MetricsError::ScoreLength {
                id: inst.id.clone(),
                expected: inst.captions.len(),
                got: s.len(),
            });
        }
        if predict_from_scores(s)?.0 == inst.true_index {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

/// Overall and hard-test accuracy of the model behind `scores`.
pub fn hard_metrics(
    dataset: &[EvalInstance],
    scores: &ScoreMatrix,
    hard: &HardSet,
) -> Result<MetricsReport, MetricsError> {
    Evaluation::new(dataset, scores, hard)?.report()
}

impl MetricsReport {
    /// Attaches a grid computed over the same evaluation.
    pub fn with_grid(mut self, eval: &Evaluation, bins: usize, min_count: usize) -> Result<Self, MetricsError> {
        self.grid = Some(binned_grid(eval, bins, min_count)?);
        Ok(self)
    }

    pub fn with_relations(mut self, eval: &Evaluation, min_hard: usize) -> Result<Self, MetricsError> {
        self.relations = Some(hard_relationships(eval, min_hard)?);
        Ok(self)
    }
}
