//! Writes the synthetic fixture files shipped under `fixtures/`.
//!
//! Usage: `cargo run -p lingprior-core --example write_fixtures -- <dir>`

use std::fs::{create_dir_all, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use lingprior_core::metrics::HardSet;
use lingprior_core::synthetic::{self, AccuracySpec};

fn write_lines<T: serde::Serialize>(path: &Path, items: &[T]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

fn accuracy(dir: &Path, spec: AccuracySpec, seed: u64) -> Result<(), Box<dyn std::error::Error>> {
    create_dir_all(dir)?;
    let fx = synthetic::accuracy_fixture(spec, seed);
    write_lines(&dir.join("dataset.jsonl"), &fx.dataset)?;
    fx.scores
        .write_scores(BufWriter::new(File::create(dir.join("scores.jsonl"))?))?;
    let data = synthetic::instances(&fx.dataset, &synthetic::lexicon())?;
    let hard = HardSet::from_perplexities("avg(reference)", &data, fx.perplexities, Default::default())?;
    write_lines(&dir.join("perplexities.jsonl"), &hard.to_cache())?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let root = Path::new(&root);
    create_dir_all(root)?;
    std::fs::write(root.join("lexicon.tsv"), synthetic::lexicon_tsv())?;
    std::fs::write(root.join("corpus.txt"), synthetic::corpus(2000, 1).join("\n") + "\n")?;
    write_lines(&root.join("dataset.jsonl"), &synthetic::swap_dataset(200, 2))?;
    write_lines(&root.join("captions.jsonl"), &synthetic::caption_sets(200, 5, 5))?;
    accuracy(
        &root.join("gap-positive"),
        AccuracySpec {
            total: 2000,
            hard: 625,
            correct: 1227,
            hard_correct: 362,
        },
        3,
    )?;
    Ok(())
}
