//! Accuracy, hard-instance and binned-perplexity metrics.
//!
//! Accuracies are fractions in `[0, 1]`; callers format them as percentages.

mod cache;
mod grid;
mod hard;
mod relations;
mod report;
mod scores;

pub use cache::{read_perplexity_cache, write_perplexity_cache, MemberPerplexities, PerplexityLine};
pub use grid::{bin_index, binned_grid, AxisRange, BinnedGrid, GridCell};
pub use hard::{find_hard_instances, HardSet};
pub use relations::{hard_relationships, RelationReport, RelationStats};
pub use report::{hard_metrics, overall_accuracy, Evaluation, InstanceOutcome, MetricsReport};
pub use scores::{match_score, predict_from_scores, ScoreMatrix};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("embedding is the zero vector")]
    DegenerateEmbedding,
    #[error("embedding dimensions differ ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("need at least 2 scores, got {0}")]
    TooFewScores(usize),
    #[error("score {0} is not finite")]
    NonFiniteScore(f64),
    #[error("hard set is empty")]
    HardSetEmpty,
    #[error("instance {id} has {candidates} candidates; the grid needs exactly 2")]
    NotPairwise { id: String, candidates: usize },
    #[error("instance {0} has no relation label")]
    MissingRelations(String),
    #[error("no scores for instance {0}")]
    MissingScores(String),
    #[error("instance {id}: {got} score(s) for {expected} candidates")]
    ScoreLength { id: String, expected: usize, got: usize },
    #[error("id {0} is not in the dataset")]
    UnknownId(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid option: {0}")]
    InvalidConfig(String),
    #[error("no instances left to evaluate")]
    NoInstances,
}
