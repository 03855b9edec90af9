use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Evaluation, MetricsError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationStats {
    pub relation: String,
    pub total: usize,
    pub hard: usize,
    /// Accuracy over every instance of the relation.
    pub overall_accuracy: f64,
    /// Accuracy over the relation's hard instances.
    pub hard_test_accuracy: f64,
}

/// Accuracy restricted to relations with enough hard instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub min_hard: usize,
    /// Accuracy over all instances of all relations.
    pub overall_accuracy: f64,
    /// Accuracy over all instances of the kept relations.
    pub hard_overall_accuracy: Option<f64>,
    /// Accuracy over the hard instances of the kept relations.
    pub hard_test_accuracy: Option<f64>,
    pub total_relations: usize,
    pub kept_relations: usize,
    pub dropped_fraction: f64,
    /// Kept relations, by name.
    pub relations: Vec<RelationStats>,
}

#[derive(Default)]
struct Tally {
    total: usize,
    correct: usize,
    hard: usize,
    hard_correct: usize,
}

/// Per-relation breakdown keeping relations with at least `min_hard` hard
/// instances.
pub fn hard_relationships(eval: &Evaluation, min_hard: usize) -> Result<RelationReport, MetricsError> {
    if eval.outcomes.is_empty() {
        return Err(MetricsError::NoInstances);
    }
    let mut by_rel: BTreeMap<&str, Tally> = BTreeMap::new();
    for o in &eval.outcomes {
        let rel = o
            .relation
            .as_deref()
            .ok_or_else(|| MetricsError::MissingRelations(o.id.clone()))?;
        let t = by_rel.entry(rel).or_default();
        t.total += 1;
        t.correct += o.correct() as usize;
        if o.hard {
            t.hard += 1;
            t.hard_correct += o.correct() as usize;
        }
    }
    let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
    let mut kept = Tally::default();
    let mut relations = Vec::new();
    for (rel, t) in &by_rel {
        if t.hard < min_hard || t.hard == 0 {
            continue;
        }
        kept.total += t.total;
        kept.correct += t.correct;
        kept.hard += t.hard;
        kept.hard_correct += t.hard_correct;
        relations.push(RelationStats {
            relation: rel.to_string(),
            total: t.total,
            hard: t.hard,
            overall_accuracy: t.correct as f64 / t.total as f64,
            hard_test_accuracy: t.hard_correct as f64 / t.hard as f64,
        });
    }
    let all_correct = eval.outcomes.iter().filter(|o| o.correct()).count();
    Ok(RelationReport {
        min_hard,
        overall_accuracy: all_correct as f64 / eval.outcomes.len() as f64,
        hard_overall_accuracy: ratio(kept.correct, kept.total),
        hard_test_accuracy: ratio(kept.hard_correct, kept.hard),
        total_relations: by_rel.len(),
        kept_relations: relations.len(),
        dropped_fraction: (by_rel.len() - relations.len()) as f64 / by_rel.len() as f64,
        relations,
    })
}
