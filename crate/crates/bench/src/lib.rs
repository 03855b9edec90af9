//! Shared workloads for the criterion benches.

use std::collections::BTreeMap;

use lingprior_core::corpus::{build_word_stats, captions_from_lines};
use lingprior_core::metrics::Evaluation;
use lingprior_core::scorer::train_ngram;
use lingprior_core::synthetic::{self, AccuracySpec};
use lingprior_core::{Caption, EvalInstance, HardSet, NGramModel, PosLexicon, Smoothing, WordStats};

pub struct Workload {
    pub lexicon: PosLexicon,
    pub captions: Vec<Caption>,
    pub tokens: Vec<Vec<String>>,
    pub stats: WordStats,
    pub model: NGramModel,
    pub dataset: Vec<EvalInstance>,
}

impl Workload {
    /// `lines` synthetic corpus captions, a trigram trained on them and a
    /// swap dataset of `pairs` instances.
    pub fn new(lines: usize, pairs: usize) -> Self {
        let lexicon = synthetic::lexicon();
        let text = synthetic::corpus(lines, 1);
        let captions = captions_from_lines(&text, &lexicon).expect("synthetic corpus tags");
        let tokens: Vec<Vec<String>> = captions.iter().map(|c| c.tokens().to_vec()).collect();
        let stats = build_word_stats(&captions, lexicon.open_class()).expect("stats");
        let model = train_ngram(&tokens, 3, Smoothing::default(), 1).expect("trigram");
        let dataset = synthetic::instances(&synthetic::swap_dataset(pairs, 2), &lexicon).expect("dataset");
        Self {
            lexicon,
            captions,
            tokens,
            stats,
            model,
            dataset,
        }
    }
}

/// A pairwise evaluation of `total` instances with a fixed accuracy split.
pub fn evaluation(total: usize) -> Evaluation {
    let spec = AccuracySpec {
        total,
        hard: total / 3,
        correct: total / 2,
        hard_correct: total / 6,
    };
    let f = synthetic::accuracy_fixture(spec, 3);
    let data = synthetic::instances(&f.dataset, &synthetic::lexicon()).expect("fixture tags");
    let hard = HardSet::from_perplexities("bench", &data, f.perplexities, BTreeMap::new()).expect("hard set");
    Evaluation::new(&data, &f.scores, &hard).expect("evaluation")
}
