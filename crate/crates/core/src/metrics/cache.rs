use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::EvalInstance;

use super::{HardSet, MetricsError};

/// Perplexities from one scorer for every candidate of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberPerplexities {
    pub scorer: String,
    pub perplexities: Vec<f64>,
}

/// One line of a perplexity cache: member values, their mean, or the reason
/// the instance could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerplexityLine {
    pub id: String,
    pub scorer: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<MemberPerplexities>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perplexities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn write_perplexity_cache<W: Write>(mut w: W, lines: &[PerplexityLine]) -> std::io::Result<()> {
    for l in lines {
        serde_json::to_writer(&mut w, l)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_perplexity_cache<R: BufRead>(reader: R) -> Result<Vec<PerplexityLine>, MetricsError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let parse = |message: String| MetricsError::Parse { line: i + 1, message };
        let text = line.map_err(|e| parse(e.to_string()))?;
        if text.trim().is_empty() {
            continue;
        }
        let rec: PerplexityLine = serde_json::from_str(&text).map_err(|e| parse(e.to_string()))?;
        if rec.perplexities.is_some() == rec.error.is_some() {
            return Err(parse("exactly one of perplexities/error must be set".into()));
        }
        out.push(rec);
    }
    Ok(out)
}

impl HardSet {
    /// Rebuilds a hard set from cached perplexities. Every dataset instance
    /// must appear in the cache, and all lines must name the same scorer.
    pub fn from_cache(dataset: &[EvalInstance], lines: &[PerplexityLine]) -> Result<Self, MetricsError> {
        let scorer = lines.first().map(|l| l.scorer.clone()).unwrap_or_default();
        let mut perplexities = BTreeMap::new();
        let mut excluded = BTreeMap::new();
        for l in lines {
            if l.scorer != scorer {
                return Err(MetricsError::InvalidConfig(format!(
                    "cache mixes scorers {scorer:?} and {:?}",
                    l.scorer
                )));
            }
            let dup = match (&l.perplexities, &l.error) {
                (Some(p), _) => perplexities.insert(l.id.clone(), p.clone()).is_some(),
                (None, Some(e)) => excluded.insert(l.id.clone(), e.clone()).is_some(),
                (None, None) => false,
            };
            if dup {
                return Err(MetricsError::DuplicateId(l.id.clone()));
            }
        }
        for inst in dataset {
            if !perplexities.contains_key(&inst.id) && !excluded.contains_key(&inst.id) {
                return Err(MetricsError::MissingScores(inst.id.clone()));
            }
        }
        HardSet::from_perplexities(scorer, dataset, perplexities, excluded)
    }

    /// Cache lines for this set, in id order, without member breakdown.
    pub fn to_cache(&self) -> Vec<PerplexityLine> {
        let mut lines: Vec<PerplexityLine> = self
            .perplexities
            .iter()
            .map(|(id, p)| PerplexityLine {
                id: id.clone(),
                scorer: self.scorer.clone(),
                members: Vec::new(),
                perplexities: Some(p.clone()),
                error: None,
            })
            .chain(self.excluded.iter().map(|(id, e)| PerplexityLine {
                id: id.clone(),
                scorer: self.scorer.clone(),
                members: Vec::new(),
                perplexities: None,
                error: Some(e.clone()),
            }))
            .collect();
        lines.sort_by(|a, b| a.id.cmp(&b.id));
        lines
    }
}
