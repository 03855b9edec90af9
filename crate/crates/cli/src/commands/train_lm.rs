use anyhow::Result;
use serde::Serialize;

use super::Outcome;
use crate::artifacts::Artifacts;
use crate::config::RunConfig;
use crate::scorers::{tokenized_corpus, train};

#[derive(Serialize)]
struct Summary {
    model: String,
    order: usize,
    lines: usize,
    vocab_size: usize,
    ngram_counts: Vec<usize>,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg.require(&cfg.corpus, "--corpus")?;
    let corpus = tokenized_corpus(path)?;
    let mut model = train(cfg, &corpus, cfg.ngram.order)?;
    let mut art = Artifacts::create(cfg)?;
    let meta = art.meta().clone();
    let md = model.metadata_mut();
    md.insert("tool_version".into(), meta.version.into());
    md.insert("config_hash".into(), meta.config_hash.clone());
    md.insert("seed".into(), meta.seed.to_string());
    md.insert("corpus_lines".into(), corpus.len().to_string());
    art.write_bytes("model.json", model.to_json().as_bytes())?;

    let summary = Summary {
        model: "model.json".into(),
        order: cfg.ngram.order,
        lines: corpus.len(),
        vocab_size: model.vocab_size(),
        ngram_counts: model.ngram_counts(),
    };
    let bytes = art.write_json("train_summary.json", &summary)?;
    art.finish()?;
    eprintln!("vocab size {}", summary.vocab_size);
    for (k, n) in summary.ngram_counts.iter().enumerate() {
        eprintln!("{}-grams {n}", k + 1);
    }
    if cfg.stdout {
        print!("{}", String::from_utf8_lossy(&bytes));
    }
    Ok(Outcome::Clean)
}
