use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::Serialize;

use super::{Caption, CorpusError};

/// Word frequencies observed under one tag.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TagCounts {
    words: Vec<String>,
    counts: Vec<u64>,
    // running totals, cumulative[i] = counts[..=i].sum()
    #[serde(skip)]
    cumulative: Vec<u64>,
}

impl TagCounts {
    fn from_map(map: BTreeMap<String, u64>) -> Self {
        let (words, counts): (Vec<_>, Vec<_>) = map.into_iter().unzip();
        let cumulative = counts
            .iter()
            .scan(0u64, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect();
        Self {
            words,
            counts,
            cumulative,
        }
    }

    pub fn total(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    pub fn count(&self, word: &str) -> u64 {
        self.words
            .binary_search_by(|w| w.as_str().cmp(word))
            .map(|i| self.counts[i])
            .unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.count(word) > 0
    }

    /// Words in ascending order with their counts.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.words.iter().map(String::as_str).zip(self.counts.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// True when some word other than `word` has nonzero mass.
    pub fn has_alternative_to(&self, word: &str) -> bool {
        self.words.iter().any(|w| w != word)
    }

    /// Draws a word with probability proportional to its count.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &str {
        let r = rng.random_range(0..self.total());
        let i = self.cumulative.partition_point(|&c| c <= r);
        &self.words[i]
    }
}

/// Per-tag word frequency tables over open-class tags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordStats {
    tables: BTreeMap<String, TagCounts>,
}

impl WordStats {
    pub fn tag(&self, tag: &str) -> Option<&TagCounts> {
        self.tables.get(tag)
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.tables.keys().map(String::as_str)
    }

    pub fn count(&self, tag: &str, word: &str) -> u64 {
        self.tag(tag).map_or(0, |t| t.count(word))
    }

    pub fn total(&self, tag: &str) -> u64 {
        self.tag(tag).map_or(0, TagCounts::total)
    }
}

/// Counts every word observed under each open-class tag.
pub fn build_word_stats<'a, I>(captions: I, open_class: &BTreeSet<String>) -> Result<WordStats, CorpusError>
where
    I: IntoIterator<Item = &'a Caption>,
{
    let mut raw: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for caption in captions {
        for (word, tag) in caption.tokens().iter().zip(caption.tags()) {
            if open_class.contains(tag) {
                *raw.entry(tag.clone()).or_default().entry(word.clone()).or_insert(0) += 1;
            }
        }
    }
    if raw.is_empty() {
        return Err(CorpusError::EmptyStats);
    }
    Ok(WordStats {
        tables: raw
            .into_iter()
            .map(|(tag, words)| (tag, TagCounts::from_map(words)))
            .collect(),
    })
}
