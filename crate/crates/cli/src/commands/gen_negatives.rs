use std::collections::BTreeMap;

use anyhow::{Context, Result};
use lingprior_core::corpus::{build_word_stats, captions_from_lines, read_lines};
use lingprior_core::perturb::{derive_seed, instance_seed, negative_stats, DiagnosticsReport};
use lingprior_core::{Caption, EvalInstance, Method, NegativeRecord, PerturbError, Perturber, WordStats};
use rayon::prelude::*;
use serde::Serialize;

use super::{dataset, lexicon, Outcome};
use crate::artifacts::Artifacts;
use crate::config::RunConfig;
use crate::scorers::build_ensemble;

#[derive(Debug, Serialize)]
struct Failure {
    method: String,
    reason: String,
}

#[derive(Debug, Serialize)]
struct SourceNegatives {
    index: usize,
    original: String,
    negatives: Vec<NegativeRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    skipped: Option<String>,
}

#[derive(Debug, Serialize)]
struct InstanceNegatives {
    id: String,
    image_id: String,
    captions: Vec<SourceNegatives>,
}

#[derive(Debug, Default, Serialize)]
struct Diagnostics {
    instances: usize,
    sources: usize,
    negatives: usize,
    skipped: usize,
    partial: usize,
    overall: Option<DiagnosticsReport>,
    by_method: BTreeMap<String, DiagnosticsReport>,
}

/// Seed for caption `k` of an instance; the first caption uses the instance
/// seed itself.
fn source_seed(global: u64, id: &str, k: usize) -> u64 {
    let base = instance_seed(global, id);
    if k == 0 {
        base
    } else {
        derive_seed(base, &format!("caption-{k}"))
    }
}

fn generate_source(
    p: &Perturber<'_>,
    method: Method,
    caption: &Caption,
    index: usize,
    seed: u64,
) -> Result<SourceNegatives> {
    let mut out = SourceNegatives {
        index,
        original: caption.normalized(),
        negatives: Vec::new(),
        failures: Vec::new(),
        skipped: None,
    };
    match p.generate(method, caption, seed) {
        Ok(o) => {
            out.negatives = o.records;
            out.failures = o
                .failures
                .into_iter()
                .map(|(m, e)| Failure {
                    method: m.as_str().to_string(),
                    reason: e.to_string(),
                })
                .collect();
        }
        Err(e @ (PerturbError::NoValidPerturbation(_) | PerturbError::Scorer(_))) => {
            out.skipped = Some(e.to_string());
        }
        Err(e) => return Err(e).context(format!("caption {index}")),
    }
    Ok(out)
}

fn generate_instance(p: &Perturber<'_>, cfg: &RunConfig, inst: &EvalInstance) -> Result<InstanceNegatives> {
    let n = if cfg.metrics.first_caption_only {
        1
    } else {
        inst.captions.len()
    };
    let captions = inst.captions[..n]
        .iter()
        .enumerate()
        .map(|(k, c)| generate_source(p, cfg.method, c, k, source_seed(cfg.seed, &inst.id, k)))
        .collect::<Result<Vec<_>>>()
        .with_context(|| format!("instance {}", inst.id))?;
    Ok(InstanceNegatives {
        id: inst.id.clone(),
        image_id: inst.image_id.clone(),
        captions,
    })
}

fn load_stats(cfg: &RunConfig, lex: &lingprior_core::PosLexicon) -> Result<Option<WordStats>> {
    if !matches!(cfg.method, Method::Replace | Method::Double) {
        return Ok(None);
    }
    let path = cfg.require(&cfg.corpus, "--corpus for replace word statistics")?;
    let lines = read_lines(path)?;
    let caps = captions_from_lines(&lines, lex).with_context(|| format!("reading {}", path.display()))?;
    Ok(Some(build_word_stats(&caps, lex.open_class())?))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let lex = lexicon(cfg, true)?;
    let data = dataset(cfg, &lex)?;
    let stats = load_stats(cfg, &lex)?;
    let ens = build_ensemble(cfg)?;
    let perturber = Perturber::new(lex.open_class(), stats.as_ref(), &ens, cfg.perturb)?;

    let lines: Vec<InstanceNegatives> = data
        .par_iter()
        .map(|inst| generate_instance(&perturber, cfg, inst))
        .collect::<Result<_>>()?;

    let mut diag = Diagnostics {
        instances: lines.len(),
        ..Default::default()
    };
    let mut pairs: Vec<(Vec<String>, &NegativeRecord)> = Vec::new();
    for (inst, line) in data.iter().zip(&lines) {
        for src in &line.captions {
            diag.sources += 1;
            diag.skipped += src.skipped.is_some() as usize;
            diag.partial += !src.failures.is_empty() as usize;
            for r in &src.negatives {
                pairs.push((inst.captions[src.index].tokens().to_vec(), r));
            }
        }
    }
    diag.negatives = pairs.len();
    if !pairs.is_empty() {
        diag.overall = Some(negative_stats(pairs.iter().map(|(o, r)| (o.as_slice(), *r)), &ens)?);
        let mut methods: Vec<_> = pairs.iter().map(|(_, r)| r.method).collect();
        methods.sort_by_key(|m| m.as_str());
        methods.dedup();
        for m in methods {
            let subset = pairs
                .iter()
                .filter(|(_, r)| r.method == m)
                .map(|(o, r)| (o.as_slice(), *r));
            diag.by_method
                .insert(m.as_str().to_string(), negative_stats(subset, &ens)?);
        }
    }

    let mut art = Artifacts::create(cfg)?;
    let bytes = art.write_jsonl("negatives.jsonl", &lines)?;
    art.write_json("diagnostics.json", &diag)?;
    art.finish()?;

    eprintln!(
        "{} negatives for {} caption(s); {} skipped, {} partial",
        diag.negatives, diag.sources, diag.skipped, diag.partial
    );
    if let Some(o) = &diag.overall {
        eprintln!(
            "negatives above original perplexity: {}% (mean difference {:.4})",
            super::pct(o.frac_higher),
            o.mean_diff
        );
    }
    if cfg.stdout {
        print!("{}", String::from_utf8_lossy(&bytes));
    }
    Ok(Outcome::from_problems(diag.skipped + diag.partial))
}
