use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_len, mean_negative_log_prob, PerplexityScorer, ScorerError};

/// Reserved vocabulary entry for out-of-vocabulary and below-floor words.
pub const UNK_TOKEN: &str = "<unk>";

/// Version stamped into persisted models. Loading any other version fails.
pub const NGRAM_FORMAT_VERSION: u32 = 1;

const FORMAT_NAME: &str = "lingprior-ngram";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Smoothing {
    /// Maximum likelihood. Unseen contexts back off to shorter ones; unseen
    /// events get probability zero.
    Mle,
    /// Add-`alpha` per context; unseen contexts back off to shorter ones.
    Additive { alpha: f64 },
    /// Interpolated absolute discounting down to a uniform distribution over
    /// the vocabulary.
    AbsoluteDiscount { discount: f64 },
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::AbsoluteDiscount { discount: 0.75 }
    }
}

impl Smoothing {
    fn validate(&self) -> Result<(), ScorerError> {
        match *self {
            Smoothing::Mle => Ok(()),
            Smoothing::Additive { alpha } if alpha > 0.0 && alpha.is_finite() => Ok(()),
            Smoothing::AbsoluteDiscount { discount } if discount > 0.0 && discount <= 1.0 => Ok(()),
            other => Err(ScorerError::InvalidConfig(format!(
                "bad smoothing parameters {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ContextStats {
    /// Sum of counts of every n-gram extending this context by one word.
    total: u64,
    /// Number of distinct words seen after this context.
    distinct: u64,
}

/// Word n-gram language model.
#[derive(Debug, Clone)]
pub struct NGramModel {
    name: String,
    order: usize,
    smoothing: Smoothing,
    min_count: u64,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    counts: HashMap<Vec<u32>, u64>,
    contexts: HashMap<Vec<u32>, ContextStats>,
    metadata: BTreeMap<String, String>,
}

/// Trains an n-gram model on tokenized sentences.
///
/// Words seen fewer than `min_count` times are folded into [`UNK_TOKEN`].
/// Sentences are counted without boundary padding, so the first token of a
/// sentence only ever acts as context for higher orders.
pub fn train_ngram(
    corpus: &[Vec<String>],
    order: usize,
    smoothing: Smoothing,
    min_count: u64,
) -> Result<NGramModel, ScorerError> {
    if order == 0 {
        return Err(ScorerError::InvalidConfig("order must be at least 1".into()));
    }
    smoothing.validate()?;
    if corpus.iter().all(|s| s.is_empty()) {
        return Err(ScorerError::EmptyCorpus);
    }

    let mut freq: HashMap<&str, u64> = HashMap::new();
    for tok in corpus.iter().flatten() {
        *freq.entry(tok.as_str()).or_insert(0) += 1;
    }
    let mut kept: Vec<&str> = freq
        .into_iter()
        .filter(|&(w, c)| c >= min_count && w != UNK_TOKEN)
        .map(|(w, _)| w)
        .collect();
    kept.sort_unstable();
    let vocab: Vec<String> = std::iter::once(UNK_TOKEN).chain(kept).map(str::to_string).collect();

    let mut model = NGramModel::empty(order, smoothing, min_count, vocab);
    for sentence in corpus {
        let ids: Vec<u32> = sentence.iter().map(|t| model.id(t)).collect();
        for end in 1..=ids.len() {
            for k in 1..=order.min(end) {
                model.add(&ids[end - k..end], 1);
            }
        }
    }
    Ok(model)
}

impl NGramModel {
    fn empty(order: usize, smoothing: Smoothing, min_count: u64, vocab: Vec<String>) -> Self {
        let index = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        Self {
            name: format!("ngram-{order}"),
            order,
            smoothing,
            min_count,
            vocab,
            index,
            counts: HashMap::new(),
            contexts: HashMap::new(),
            metadata: BTreeMap::new(),
        }
    }

    fn add(&mut self, gram: &[u32], count: u64) {
        let slot = self.counts.entry(gram.to_vec()).or_insert(0);
        let fresh = *slot == 0;
        *slot += count;
        let ctx = self
            .contexts
            .entry(gram[..gram.len() - 1].to_vec())
            .or_insert(ContextStats { total: 0, distinct: 0 });
        ctx.total += count;
        if fresh {
            ctx.distinct += 1;
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    /// Vocabulary in id order; index 0 is [`UNK_TOKEN`].
    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    /// Number of distinct n-grams stored for each order `1..=order`.
    pub fn ngram_counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.order];
        for gram in self.counts.keys() {
            out[gram.len() - 1] += 1;
        }
        out
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut BTreeMap<String, String> {
        &mut self.metadata
    }

    fn id(&self, word: &str) -> u32 {
        self.index.get(word).copied().unwrap_or(0)
    }

    /// Raw count of an n-gram, after UNK mapping.
    pub fn count(&self, gram: &[String]) -> u64 {
        let ids: Vec<u32> = gram.iter().map(|w| self.id(w)).collect();
        self.counts.get(&ids).copied().unwrap_or(0)
    }

    fn prob_ids(&self, ctx: &[u32], word: u32) -> f64 {
        let count = |gram: &[u32]| self.counts.get(gram).copied().unwrap_or(0) as f64;
        let lower = |this: &Self| {
            if ctx.is_empty() {
                1.0 / this.vocab.len() as f64
            } else {
                this.prob_ids(&ctx[1..], word)
            }
        };
        let Some(stats) = self.contexts.get(ctx) else {
            return lower(self);
        };
        let mut gram = Vec::with_capacity(ctx.len() + 1);
        gram.extend_from_slice(ctx);
        gram.push(word);
        let c = count(&gram);
        let total = stats.total as f64;
        match self.smoothing {
            Smoothing::Mle => c / total,
            Smoothing::Additive { alpha } => (c + alpha) / (total + alpha * self.vocab.len() as f64),
            Smoothing::AbsoluteDiscount { discount } => {
                let backoff = discount * stats.distinct as f64 / total;
                (c - discount).max(0.0) / total + backoff * lower(self)
            }
        }
    }

    fn context_ids<'a>(&self, ids: &'a [u32], pos: usize) -> &'a [u32] {
        let start = pos.saturating_sub(self.order - 1);
        &ids[start..pos]
    }

    /// P(word | context), using only the last `order - 1` context words.
    pub fn conditional(&self, context: &[String], word: &str) -> f64 {
        let ids: Vec<u32> = context.iter().map(|w| self.id(w)).collect();
        let start = ids.len().saturating_sub(self.order - 1);
        self.prob_ids(&ids[start..], self.id(word))
    }

    /// Natural-log probabilities of tokens `2..=n` given their prefixes.
    pub fn token_log_probs(&self, tokens: &[String]) -> Vec<f64> {
        let ids: Vec<u32> = tokens.iter().map(|w| self.id(w)).collect();
        (1..ids.len())
            .map(|i| self.prob_ids(self.context_ids(&ids, i), ids[i]).ln())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ScorerError> {
        let probe: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ScorerError::ModelFormat(e.to_string()))?;
        match probe.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == NGRAM_FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(ScorerError::ModelFormat(format!(
                    "format version {v} is not supported (expected {NGRAM_FORMAT_VERSION})"
                )))
            }
            None => return Err(ScorerError::ModelFormat("missing format_version".into())),
        }
        let file: ModelFile = serde_json::from_value(probe).map_err(|e| ScorerError::ModelFormat(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScorerError> {
        std::fs::write(path, self.to_json()).map_err(|e| ScorerError::ModelFormat(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, ScorerError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ScorerError::ModelFormat(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn to_file(&self) -> ModelFile {
        let mut ngrams: Vec<(Vec<u32>, u64)> = self.counts.iter().map(|(g, &c)| (g.clone(), c)).collect();
        ngrams.sort_unstable_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        ModelFile {
            format: FORMAT_NAME.to_string(),
            format_version: NGRAM_FORMAT_VERSION,
            name: self.name.clone(),
            order: self.order,
            smoothing: self.smoothing,
            min_count: self.min_count,
            vocab: self.vocab.clone(),
            ngrams,
            metadata: self.metadata.clone(),
        }
    }

    fn from_file(file: ModelFile) -> Result<Self, ScorerError> {
        let bad = |m: String| Err(ScorerError::ModelFormat(m));
        if file.format != FORMAT_NAME {
            return bad(format!("unexpected format {:?}", file.format));
        }
        if file.order == 0 {
            return bad("order must be at least 1".into());
        }
        file.smoothing
            .validate()
            .map_err(|e| ScorerError::ModelFormat(e.to_string()))?;
        if file.vocab.first().map(String::as_str) != Some(UNK_TOKEN) {
            return bad("vocabulary must start with the UNK token".into());
        }
        let mut model = Self::empty(file.order, file.smoothing, file.min_count, file.vocab);
        if model.index.len() != model.vocab.len() {
            return bad("duplicate vocabulary entries".into());
        }
        model.name = file.name;
        model.metadata = file.metadata;
        for (gram, count) in file.ngrams {
            if gram.is_empty() || gram.len() > model.order {
                return bad(format!(
                    "n-gram of length {} in an order-{} model",
                    gram.len(),
                    model.order
                ));
            }
            if gram.iter().any(|&id| id as usize >= model.vocab.len()) {
                return bad("n-gram id out of vocabulary range".into());
            }
            if count == 0 || model.counts.contains_key(&gram) {
                return bad("zero or duplicate n-gram count".into());
            }
            model.add(&gram, count);
        }
        Ok(model)
    }
}

impl PerplexityScorer for NGramModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn perplexity(&self, tokens: &[String]) -> Result<f64, ScorerError> {
        check_len(tokens)?;
        Ok(mean_negative_log_prob(&self.token_log_probs(tokens)))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    format_version: u32,
    name: String,
    order: usize,
    smoothing: Smoothing,
    min_count: u64,
    vocab: Vec<String>,
    ngrams: Vec<(Vec<u32>, u64)>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}
