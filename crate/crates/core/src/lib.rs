//! Hard-negative caption generation and linguistic-prior evaluation.
//!
//! * [`corpus`] tokenizes, tags and loads captions and datasets.
//! * [`scorer`] assigns perplexities with n-gram models, remote services or
//!   averaged ensembles of either.
//! * [`perturb`] builds swap, assist, replace and double negatives.
//! * [`metrics`] finds hard instances and reports accuracies, gaps and grids.

pub mod corpus;
pub mod metrics;
pub mod perturb;
pub mod scorer;
pub mod synthetic;

pub use corpus::{Caption, CorpusError, DatasetLine, EvalInstance, PosLexicon, WordStats};
pub use metrics::{BinnedGrid, HardSet, MetricsError, MetricsReport, ScoreMatrix};
pub use perturb::{Method, NegativeMethod, NegativeRecord, PerturbConfig, PerturbError, Perturber};
pub use scorer::{
    EnsembleScorer, NGramModel, PerplexityScorer, RemoteConfig, RemoteScorerClient, ScorerError, Smoothing,
};
