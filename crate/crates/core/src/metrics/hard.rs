use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::EvalInstance;
use crate::scorer::{score_candidates, PerplexityScorer};

use super::{MetricsError, ScoreMatrix};

/// Instances the perplexity scorer gets wrong.
///
/// An instance is hard when its true caption's perplexity is strictly above
/// the minimum over all candidates. When the true caption shares the minimum
/// with another candidate the instance counts as correct and is tallied in
/// `ties`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardSet {
    pub scorer: String,
    pub hard: BTreeSet<String>,
    pub perplexities: BTreeMap<String, Vec<f64>>,
    pub ties: usize,
    /// Instances that could not be scored, with the reason.
    pub excluded: BTreeMap<String, String>,
}

impl HardSet {
    /// Builds the set from precomputed perplexities, e.g. a score cache.
    pub fn from_perplexities(
        scorer: impl Into<String>,
        dataset: &[EvalInstance],
        perplexities: BTreeMap<String, Vec<f64>>,
        excluded: BTreeMap<String, String>,
    ) -> Result<Self, MetricsError> {
        let by_id: HashMap<&str, &EvalInstance> = dataset.iter().map(|i| (i.id.as_str(), i)).collect();
        let mut hard = BTreeSet::new();
        let mut ties = 0;
        for (id, pps) in &perplexities {
            let inst = by_id
                .get(id.as_str())
                .ok_or_else(|| MetricsError::UnknownId(id.clone()))?;
            if pps.len() != inst.captions.len() {
                return Err(MetricsError::ScoreLength {
                    id: id.clone(),
                    expected: inst.captions.len(),
                    got: pps.len(),
                });
            }
            let truth = pps[inst.true_index];
            let min = pps.iter().copied().fold(f64::INFINITY, f64::min);
            if truth > min {
                hard.insert(id.clone());
            } else if pps.iter().filter(|&&p| p == truth).count() > 1 {
                ties += 1;
            }
        }
        for id in excluded.keys() {
            if !by_id.contains_key(id.as_str()) {
                return Err(MetricsError::UnknownId(id.clone()));
            }
            if perplexities.contains_key(id) {
                return Err(MetricsError::DuplicateId(id.clone()));
            }
        }
        Ok(Self {
            scorer: scorer.into(),
            hard,
            perplexities,
            ties,
            excluded,
        })
    }

    pub fn contains(&self, id: &str) -> bool {
        self.hard.contains(id)
    }

    pub fn len(&self) -> usize {
        self.hard.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hard.is_empty()
    }

    /// Number of instances that were scored.
    pub fn scored(&self) -> usize {
        self.perplexities.len()
    }

    /// The scorer's own predictions as a score matrix (negated perplexity,
    /// so the argmax is the lowest-perplexity caption).
    pub fn as_score_matrix(&self) -> ScoreMatrix {
        self.perplexities
            .iter()
            .map(|(id, pps)| (id.clone(), pps.iter().map(|p| -p).collect()))
            .collect()
    }
}

/// Scores every instance with `scorer` in parallel and collects the ones it
/// misclassifies. Unscorable instances are excluded with their error.
pub fn find_hard_instances(dataset: &[EvalInstance], scorer: &dyn PerplexityScorer) -> HardSet {
    let results: Vec<_> = dataset
        .par_iter()
        .map(|inst| (inst.id.clone(), score_candidates(scorer, &inst.captions)))
        .collect();
    let mut perplexities = BTreeMap::new();
    let mut excluded = BTreeMap::new();
    for (id, r) in results {
        match r {
            Ok(p) => {
                perplexities.insert(id, p);
            }
            Err(e) => {
                excluded.insert(id, e.to_string());
            }
        }
    }
    HardSet::from_perplexities(scorer.name(), dataset, perplexities, excluded)
        .expect("perplexities come from the dataset itself")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, PosLexicon};
    use crate::scorer::testing::FixedScorer;
    use crate::scorer::{train_ngram, EnsembleScorer, Smoothing};
    use std::sync::Arc;

    fn inst(id: &str, caps: &[&str], t: usize) -> EvalInstance {
        let lex = PosLexicon::untagged();
        EvalInstance {
            id: id.into(),
            image_id: format!("img-{id}"),
            captions: caps
                .iter()
                .map(|c| crate::corpus::Caption::new(c, &lex).unwrap())
                .collect(),
            true_index: t,
            relation: None,
        }
    }

    #[test]
    fn definition_cases() {
        let s = FixedScorer::new(
            "f",
            &[
                ("a b", 5.0),
                ("b a", 2.0),
                ("c d", 2.0),
                ("d c", 5.0),
                ("e f", 3.0),
                ("f e", 3.0),
            ],
        );
        let data = vec![
            inst("1", &["a b", "b a"], 0),
            inst("2", &["c d", "d c"], 0),
            inst("3", &["e f", "f e"], 1),
        ];
        let h = find_hard_instances(&data, &s);
        assert_eq!(h.hard.iter().collect::<Vec<_>>(), ["1"]);
        assert_eq!(h.ties, 1);
        assert!(h.excluded.is_empty());
        assert_eq!(h.perplexities["1"], [5.0, 2.0]);
    }

    #[test]
    fn unscorable_instances_are_excluded() {
        let s = FixedScorer::new("f", &[("a b", 5.0), ("b a", 2.0)]);
        let data = vec![inst("1", &["a b", "b a"], 0), inst("2", &["x y", "y"], 0)];
        let h = find_hard_instances(&data, &s);
        assert_eq!(h.scored(), 1);
        assert_eq!(h.excluded.len(), 1);
        assert!(h.excluded["2"].contains("candidate 1"));
    }

    /// The corpus repeats "x y" and never shows "y x", so every instance whose
    /// true caption is "y x" is forced into the hard set regardless of
    /// smoothing, and every "x y" instance is forced out.
    #[test]
    fn trigram_ensemble_on_forced_fixture() {
        let corpus: Vec<Vec<String>> = std::iter::repeat_n("x y z", 20)
            .chain(std::iter::repeat_n("z x y", 20))
            .map(|l| tokenize(l).unwrap())
            .collect();
        let members: Vec<Arc<dyn PerplexityScorer>> = (1..=3)
            .map(|o| Arc::new(train_ngram(&corpus, o, Smoothing::default(), 1).unwrap()) as _)
            .collect();
        let ens = EnsembleScorer::new(members).unwrap();
        let mut data = Vec::new();
        for i in 0..30 {
            let hard = i % 3 == 0;
            let t = i % 2;
            let mut caps = ["x y z", "y x z"];
            if hard {
                caps.swap(0, 1);
            }
            if t == 1 {
                caps.swap(0, 1);
            }
            data.push(inst(&format!("{i:02}"), &caps, t));
        }
        let h = find_hard_instances(&data, &ens);
        assert_eq!(h.len(), 10);
        assert_eq!(h.ties, 0);
        for id in &h.hard {
            let n: usize = id.parse().unwrap();
            assert_eq!(n % 3, 0);
        }
        assert!(h.scorer.starts_with("avg("));
    }

    #[test]
    fn self_scores_predict_like_the_scorer() {
        let s = FixedScorer::new("f", &[("a b", 5.0), ("b a", 2.0), ("c d", 1.0), ("d c", 4.0)]);
        let data = vec![inst("1", &["a b", "b a"], 0), inst("2", &["c d", "d c"], 0)];
        let h = find_hard_instances(&data, &s);
        let m = h.as_score_matrix();
        assert_eq!(m.get("1").unwrap(), [-5.0, -2.0]);
    }

    #[test]
    fn from_perplexities_validates() {
        let data = vec![inst("1", &["a b", "b a"], 0)];
        let bad = BTreeMap::from([("2".to_string(), vec![1.0, 2.0])]);
        assert_eq!(
            HardSet::from_perplexities("s", &data, bad, BTreeMap::new()),
            Err(MetricsError::UnknownId("2".into()))
        );
        let short = BTreeMap::from([("1".to_string(), vec![1.0])]);
        assert!(matches!(
            HardSet::from_perplexities("s", &data, short, BTreeMap::new()),
            Err(MetricsError::ScoreLength { .. })
        ));
    }

    #[test]
    fn more_scorer_errors_give_a_superset() {
        let data: Vec<EvalInstance> = (0..40).map(|i| inst(&i.to_string(), &["a b", "b a"], 0)).collect();
        let base: BTreeMap<String, Vec<f64>> = (0..40)
            .map(|i| (i.to_string(), vec![1.0 + (i % 5) as f64, 3.0]))
            .collect();
        let h1 = HardSet::from_perplexities("s", &data, base.clone(), BTreeMap::new()).unwrap();
        let mut worse = base;
        for (k, v) in worse.iter_mut() {
            if k.parse::<usize>().unwrap() % 7 == 0 {
                v[0] = 10.0;
            }
        }
        let h2 = HardSet::from_perplexities("s", &data, worse, BTreeMap::new()).unwrap();
        assert!(h1.hard.is_subset(&h2.hard));
        assert!(h2.len() > h1.len());
    }
}
