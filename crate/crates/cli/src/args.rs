use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lingprior_core::Method;

#[derive(Debug, Parser)]
#[command(
    name = "lingprior",
    version,
    about = "Hard-negative generation and linguistic-prior evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Train an n-gram language model on a caption corpus.
    TrainLm,
    /// Score every candidate caption and cache the perplexities.
    Score,
    /// Generate hard-negative captions for a dataset.
    GenNegatives,
    /// Compute overall and hard test accuracy, the linguistic gap, and
    /// optionally a perplexity grid and per-relation breakdown.
    Evaluate,
    /// Compute only the perplexity-binned accuracy grid.
    Grid,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::TrainLm => "train-lm",
            Command::Score => "score",
            Command::GenNegatives => "gen-negatives",
            Command::Evaluate => "evaluate",
            Command::Grid => "grid",
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Dataset JSONL.
    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,
    /// Plain-text caption corpus, one caption per line.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// Part-of-speech lexicon, `word<TAB>tag` per line.
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Perplexity scorer; repeat to average several. Forms:
    /// `ngram:<model.json>`, `ngram-order:<n>` (trained on --corpus),
    /// `remote` or `remote:<url>`.
    #[arg(long = "scorer", global = true)]
    pub scorers: Vec<String>,
    /// `swap`, `assist`, `replace` or `double`
    #[arg(long, global = true)]
    pub method: Option<Method>,
    /// Swaps scored per assist negative
    #[arg(long, global = true)]
    pub assist_trials: Option<usize>,
    /// Replacements scored per replace negative
    #[arg(long, global = true)]
    pub replace_trials: Option<usize>,
    /// Words changed per replacement
    #[arg(long, global = true)]
    pub replace_k: Option<usize>,
    /// Global seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid intervals per axis.
    #[arg(long, global = true)]
    pub bins: Option<usize>,
    /// Minimum samples for a grid cell's accuracy to be reported.
    #[arg(long, global = true)]
    pub min_count: Option<usize>,
    /// Minimum hard instances for a relation to be kept.
    #[arg(long, global = true)]
    pub min_hard: Option<usize>,
    /// Use only the first caption of each instance as a source.
    #[arg(long, global = true)]
    pub first_caption_only: bool,
    /// Model scores JSONL (`{"id", "scores"}`).
    #[arg(long, global = true)]
    pub scores: Option<PathBuf>,
    /// Embeddings JSONL, converted to scores by normalized inner product.
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Read perplexities from a `score` cache instead of rescoring
    /// (default path: <out>/perplexities.jsonl).
    #[arg(long, global = true, num_args = 0..=1, value_name = "PATH")]
    pub use_cache: Option<Option<PathBuf>>,
    /// Also print the main artifact to standard output.
    #[arg(long, global = true)]
    pub stdout: bool,
    /// N-gram order for `train-lm`.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// `mle`, `additive:<alpha>` or `absolute-discount:<d>`.
    #[arg(long, global = true)]
    pub smoothing: Option<String>,
    /// Words seen fewer times than this become `<unk>`.
    #[arg(long, global = true)]
    pub vocab_min_count: Option<u64>,
}
