mod evaluate;
mod gen_negatives;
mod score;
mod train_lm;

use std::path::Path;

use anyhow::{Context, Result};
use lingprior_core::corpus::load_dataset;
use lingprior_core::metrics::{find_hard_instances, read_perplexity_cache};
use lingprior_core::{EvalInstance, HardSet, PosLexicon, ScoreMatrix};

use crate::args::Command;
use crate::config::RunConfig;
use crate::scorers::build_ensemble;

/// How a command finished. Fatal errors surface as `Err` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    /// Some instances were skipped or partly failed.
    Partial,
}

impl Outcome {
    pub fn from_problems(n: usize) -> Self {
        if n == 0 {
            Outcome::Clean
        } else {
            Outcome::Partial
        }
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::TrainLm => train_lm::run(cfg),
        Command::Score => score::run(cfg),
        Command::GenNegatives => gen_negatives::run(cfg),
        Command::Evaluate => evaluate::run(cfg, false),
        Command::Grid => evaluate::run(cfg, true),
    }
}

fn lexicon(cfg: &RunConfig, required: bool) -> Result<PosLexicon> {
    match &cfg.lexicon {
        Some(p) => Ok(PosLexicon::from_tsv(p, &cfg.open_class)?),
        None if required => anyhow::bail!("{} needs --lexicon", cfg.command),
        None => Ok(PosLexicon::untagged()),
    }
}

fn dataset(cfg: &RunConfig, lex: &PosLexicon) -> Result<Vec<EvalInstance>> {
    let path = cfg.require(&cfg.dataset, "--dataset")?;
    let data = load_dataset(path, lex).with_context(|| format!("loading {}", path.display()))?;
    log::info!("{} instances from {}", data.len(), path.display());
    Ok(data)
}

fn model_scores(cfg: &RunConfig) -> Result<ScoreMatrix> {
    let load = |p: &Path, f: fn(&Path) -> Result<ScoreMatrix, lingprior_core::MetricsError>| {
        f(p).with_context(|| format!("loading {}", p.display()))
    };
    match (&cfg.scores, &cfg.embeddings) {
        (Some(p), _) => load(p, ScoreMatrix::load_scores),
        (None, Some(p)) => load(p, ScoreMatrix::load_embeddings),
        (None, None) => anyhow::bail!("{} needs --scores or --embeddings", cfg.command),
    }
}

/// Hard set from the perplexity cache when one is given, else by scoring.
fn hard_set(cfg: &RunConfig, data: &[EvalInstance]) -> Result<HardSet> {
    if let Some(path) = &cfg.cache {
        let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let lines = read_perplexity_cache(std::io::BufReader::new(file))
            .with_context(|| format!("reading {}", path.display()))?;
        log::info!("perplexities from cache {}", path.display());
        return Ok(HardSet::from_cache(data, &lines)?);
    }
    let ensemble = build_ensemble(cfg)?;
    Ok(find_hard_instances(data, &ensemble))
}

fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}
