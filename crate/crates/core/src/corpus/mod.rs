//! Caption ingestion: tokenization, POS tagging, per-tag word statistics and
//! the dataset JSONL loader.

mod dataset;
mod lexicon;
mod stats;
mod tokenize;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use dataset::{load_dataset, parse_dataset, write_dataset, DatasetLine, EvalInstance};
pub use lexicon::{default_open_class, tag_caption, PosLexicon, DEFAULT_OPEN_CLASS, UNKNOWN_TAG};
pub use stats::{build_word_stats, TagCounts, WordStats};
pub use tokenize::{normalize, tokenize};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("text is empty or whitespace-only")]
    EmptyText,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("no open-class token found in the corpus")]
    EmptyStats,
    #[error("tag {0:?} cannot be an open-class tag")]
    InvalidOpenClass(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("tokens and tags differ in length ({tokens} vs {tags})")]
    TagMismatch { tokens: usize, tags: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Self::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// A tokenized, tagged caption.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caption {
    text: String,
    tokens: Vec<String>,
    tags: Vec<String>,
}

impl Caption {
    pub fn new(text: &str, lexicon: &PosLexicon) -> Result<Self, CorpusError> {
        let tokens = tokenize(text)?;
        let tags = lexicon.tag(&tokens);
        Ok(Self {
            text: text.to_string(),
            tokens,
            tags,
        })
    }

    /// Builds a caption from pre-tokenized input; `text` becomes the joined tokens.
    pub fn from_tagged(tokens: Vec<String>, tags: Vec<String>) -> Result<Self, CorpusError> {
        if tokens.is_empty() {
            return Err(CorpusError::EmptyText);
        }
        if tokens.len() != tags.len() {
            return Err(CorpusError::TagMismatch {
                tokens: tokens.len(),
                tags: tags.len(),
            });
        }
        Ok(Self {
            text: tokens.join(" "),
            tokens,
            tags,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens joined by single spaces.
    pub fn normalized(&self) -> String {
        self.tokens.join(" ")
    }
}

/// Reads a plain-text corpus, one caption per line, skipping blank lines.
pub fn read_lines(path: &Path) -> Result<Vec<String>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect())
}

/// Tokenizes and tags every line of a raw caption corpus.
pub fn captions_from_lines<S: AsRef<str>>(lines: &[S], lexicon: &PosLexicon) -> Result<Vec<Caption>, CorpusError> {
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| Caption::new(l.as_ref(), lexicon).map_err(|e| CorpusError::parse(i + 1, e.to_string())))
        .collect()
}
