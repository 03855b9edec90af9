use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;

use super::CorpusError;

/// Tag assigned to tokens the lexicon has never seen.
pub const UNKNOWN_TAG: &str = "X";

/// Open-class tags used when the caller does not supply a set.
pub const DEFAULT_OPEN_CLASS: [&str; 4] = ["ADJ", "ADV", "NOUN", "VERB"];

pub fn default_open_class() -> BTreeSet<String> {
    DEFAULT_OPEN_CLASS.iter().map(|t| t.to_string()).collect()
}

/// Unigram most-frequent-tag lexicon.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PosLexicon {
    words: HashMap<String, String>,
    tagset: BTreeSet<String>,
    open_class: BTreeSet<String>,
}

impl PosLexicon {
    /// Builds a lexicon by majority vote over `(word, tag)` observations.
    ///
    /// Words are lowercased so lookups line up with [`tokenize`](super::tokenize).
    /// Ties go to the lexicographically smallest tag. Requested open-class tags
    /// that never occur in the corpus are dropped so the open class stays a
    /// subset of the observed tagset.
    pub fn build<I, W, T>(tagged: I, open_class_tags: &BTreeSet<String>) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (W, T)>,
        W: AsRef<str>,
        T: AsRef<str>,
    {
        if open_class_tags.contains(UNKNOWN_TAG) {
            return Err(CorpusError::InvalidOpenClass(UNKNOWN_TAG.to_string()));
        }
        let mut votes: HashMap<String, BTreeMap<String, u64>> = HashMap::new();
        for (word, tag) in tagged {
            *votes
                .entry(word.as_ref().to_lowercase())
                .or_default()
                .entry(tag.as_ref().to_string())
                .or_insert(0) += 1;
        }
        if votes.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }

        let mut tagset = BTreeSet::new();
        let mut words = HashMap::with_capacity(votes.len());
        for (word, counts) in votes {
            tagset.extend(counts.keys().cloned());
            // BTreeMap iterates tags in ascending order; keep the first maximum.
            let mut best: Option<(&String, u64)> = None;
            for (tag, &n) in &counts {
                if best.is_none_or(|(_, m)| n > m) {
                    best = Some((tag, n));
                }
            }
            words.insert(word, best.unwrap().0.clone());
        }
        let open_class = open_class_tags
            .iter()
            .filter(|t| tagset.contains(*t))
            .cloned()
            .collect();
        Ok(Self {
            words,
            tagset,
            open_class,
        })
    }

    /// A lexicon that knows no words: every token is tagged [`UNKNOWN_TAG`].
    pub fn untagged() -> Self {
        Self::default()
    }

    /// Reads a `word<TAB>tag` file. Blank lines are skipped.
    pub fn from_tsv(path: &Path, open_class_tags: &BTreeSet<String>) -> Result<Self, CorpusError> {
        let file = std::fs::File::open(path).map_err(|e| CorpusError::io(path, e))?;
        Self::from_tsv_reader(std::io::BufReader::new(file), open_class_tags)
    }

    pub fn from_tsv_reader<R: BufRead>(reader: R, open_class_tags: &BTreeSet<String>) -> Result<Self, CorpusError> {
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| CorpusError::parse(i + 1, e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let Some((word, tag)) = line.split_once('\t') else {
                return Err(CorpusError::parse(i + 1, "expected `word<TAB>tag`"));
            };
            let (word, tag) = (word.trim(), tag.trim());
            if word.is_empty() || tag.is_empty() {
                return Err(CorpusError::parse(i + 1, "empty word or tag"));
            }
            pairs.push((word.to_string(), tag.to_string()));
        }
        Self::build(pairs, open_class_tags)
    }

    pub fn lookup(&self, word: &str) -> Option<&str> {
        self.words.get(word).map(String::as_str)
    }

    /// Tags a token sequence; unknown words get [`UNKNOWN_TAG`].
    pub fn tag(&self, tokens: &[String]) -> Vec<String> {
        tokens
            .iter()
            .map(|t| self.lookup(t).unwrap_or(UNKNOWN_TAG).to_string())
            .collect()
    }

    pub fn tagset(&self) -> &BTreeSet<String> {
        &self.tagset
    }

    pub fn open_class(&self) -> &BTreeSet<String> {
        &self.open_class
    }

    pub fn is_open_class(&self, tag: &str) -> bool {
        self.open_class.contains(tag)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Free-function form of [`PosLexicon::tag`].
pub fn tag_caption(tokens: &[String], lexicon: &PosLexicon) -> Vec<String> {
    lexicon.tag(tokens)
}
