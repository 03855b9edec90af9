use anyhow::Result;
use lingprior_core::metrics::{MemberPerplexities, PerplexityLine};
use lingprior_core::scorer::score_candidates;
use lingprior_core::{EnsembleScorer, EvalInstance, PerplexityScorer};
use rayon::prelude::*;

use super::{dataset, lexicon, Outcome};
use crate::artifacts::Artifacts;
use crate::config::RunConfig;
use crate::scorers::build_ensemble;

fn score_one(ens: &EnsembleScorer, inst: &EvalInstance) -> PerplexityLine {
    let mut line = PerplexityLine {
        id: inst.id.clone(),
        scorer: ens.name().to_string(),
        members: Vec::new(),
        perplexities: None,
        error: None,
    };
    let batch: Vec<&[String]> = inst.captions.iter().map(|c| c.tokens()).collect();
    let scored = if batch.iter().all(|t| t.len() >= 2) {
        ens.score_with_members(&batch).ok()
    } else {
        None
    };
    match scored {
        Some((members, mean)) => {
            line.members = ens
                .members()
                .iter()
                .zip(members)
                .map(|(m, p)| MemberPerplexities {
                    scorer: m.name().to_string(),
                    perplexities: p,
                })
                .collect();
            line.perplexities = Some(mean);
        }
        None => {
            let err = score_candidates(ens, &inst.captions).err();
            line.error = Some(err.map_or_else(|| "scoring failed".to_string(), |e| e.to_string()));
        }
    }
    line
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let lex = lexicon(cfg, false)?;
    let data = dataset(cfg, &lex)?;
    let ens = build_ensemble(cfg)?;
    let lines: Vec<PerplexityLine> = data.par_iter().map(|inst| score_one(&ens, inst)).collect();
    let failed = lines.iter().filter(|l| l.error.is_some()).count();
    let mut art = Artifacts::create(cfg)?;
    let bytes = art.write_jsonl("perplexities.jsonl", &lines)?;
    art.finish()?;
    eprintln!(
        "scored {} of {} instances with {}",
        lines.len() - failed,
        lines.len(),
        ens.name()
    );
    if failed > 0 {
        log::warn!("{failed} instance(s) could not be scored");
    }
    if cfg.stdout {
        print!("{}", String::from_utf8_lossy(&bytes));
    }
    Ok(Outcome::from_problems(failed))
}
