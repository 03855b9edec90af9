use anyhow::Result;
use lingprior_core::metrics::{binned_grid, hard_relationships, Evaluation};

use super::{dataset, hard_set, lexicon, model_scores, pct, Outcome};
use crate::artifacts::Artifacts;
use crate::config::RunConfig;

/// `evaluate`, or with `grid_only` the `grid` command.
pub fn run(cfg: &RunConfig, grid_only: bool) -> Result<Outcome> {
    let lex = lexicon(cfg, false)?;
    let data = dataset(cfg, &lex)?;
    let scores = model_scores(cfg)?;
    let hard = hard_set(cfg, &data)?;
    let eval = Evaluation::new(&data, &scores, &hard)?;
    if eval.excluded > 0 {
        log::warn!("{} instance(s) could not be scored and were excluded", eval.excluded);
    }
    let mut art = Artifacts::create(cfg)?;

    if grid_only {
        let grid = binned_grid(&eval, cfg.metrics.bins, cfg.metrics.min_count)?;
        let csv = grid.to_csv();
        art.write_bytes("grid.csv", csv.as_bytes())?;
        art.write_json("grid.json", &grid)?;
        art.finish()?;
        eprintln!(
            "{} instances binned into a {}x{} grid",
            grid.included, grid.bins, grid.bins
        );
        if cfg.stdout {
            print!("{csv}");
        }
        return Ok(Outcome::from_problems(eval.excluded));
    }

    let mut report = eval.report()?;
    if eval.outcomes.iter().all(|o| o.perplexities.len() == 2) {
        let grid = binned_grid(&eval, cfg.metrics.bins, cfg.metrics.min_count)?;
        art.write_bytes("grid.csv", grid.to_csv().as_bytes())?;
        report.grid = Some(grid);
    } else {
        log::info!("dataset is not pairwise; no grid");
    }
    if eval.outcomes.iter().all(|o| o.relation.is_some()) {
        let rel = hard_relationships(&eval, cfg.metrics.min_hard)?;
        art.write_json("relations.json", &rel)?;
        report.relations = Some(rel);
    }
    let bytes = art.write_json("report.json", &report)?;
    art.finish()?;

    eprintln!(
        "overall {}%  hard test {}%  gap {}  ({} hard of {}, {} excluded)",
        pct(report.overall_accuracy),
        pct(report.hard_test_accuracy),
        pct(report.linguistic_gap),
        report.hard_count,
        report.total_count,
        report.excluded
    );
    if let Some(r) = &report.relations {
        if let (Some(o), Some(h)) = (r.hard_overall_accuracy, r.hard_test_accuracy) {
            eprintln!(
                "relations kept {}/{}: overall {}%  hard overall {}%  hard test {}%",
                r.kept_relations,
                r.total_relations,
                pct(r.overall_accuracy),
                pct(o),
                pct(h)
            );
        }
    }
    if cfg.stdout {
        print!("{}", String::from_utf8_lossy(&bytes));
    }
    Ok(Outcome::from_problems(report.excluded))
}
