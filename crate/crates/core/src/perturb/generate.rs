use std::collections::BTreeSet;

use crate::corpus::{Caption, WordStats};
use crate::scorer::PerplexityScorer;

use super::{
    assist_trials, best_trial, derive_seed, replace_trials, rng_from_seed, swap_candidate, Method, NegativeMethod,
    NegativeRecord, PerturbConfig, PerturbError, Trial,
};

/// Bundles what the generators need: the open-class tagset, corpus word
/// statistics (for replace), a scorer and the trial configuration.
pub struct Perturber<'a> {
    open_class: &'a BTreeSet<String>,
    stats: Option<&'a WordStats>,
    scorer: &'a dyn PerplexityScorer,
    config: PerturbConfig,
}

/// Output of double generation: whichever records succeeded, in
/// assist-then-replace order, plus the constituent that failed, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleOutcome {
    pub records: Vec<NegativeRecord>,
    pub failures: Vec<(NegativeMethod, PerturbError)>,
}

impl<'a> Perturber<'a> {
    pub fn new(
        open_class: &'a BTreeSet<String>,
        stats: Option<&'a WordStats>,
        scorer: &'a dyn PerplexityScorer,
        config: PerturbConfig,
    ) -> Result<Self, PerturbError> {
        config.validate()?;
        Ok(Self {
            open_class,
            stats,
            scorer,
            config,
        })
    }

    pub fn config(&self) -> &PerturbConfig {
        &self.config
    }

    fn record(method: NegativeMethod, trial: &Trial, trials: usize, seed: u64) -> NegativeRecord {
        NegativeRecord {
            method,
            text: trial.candidate.tokens.join(" "),
            tokens: trial.candidate.tokens.clone(),
            perplexity: trial.perplexity,
            trials,
            edits: trial.candidate.edits.clone(),
            seed,
        }
    }

    /// A single random same-tag swap, annotated with its perplexity.
    pub fn swap(&self, caption: &Caption, seed: u64) -> Result<NegativeRecord, PerturbError> {
        let mut rng = rng_from_seed(seed);
        let candidate = swap_candidate(caption, self.open_class, &mut rng)?;
        let perplexity = self.scorer.perplexity(&candidate.tokens)?;
        let trial = Trial { candidate, perplexity };
        Ok(Self::record(NegativeMethod::Swap, &trial, 1, seed))
    }

    /// Every scored trial of an assist run, in draw order.
    pub fn assist_trials(&self, caption: &Caption, seed: u64) -> Result<Vec<Trial>, PerturbError> {
        let mut rng = rng_from_seed(seed);
        assist_trials(
            caption,
            self.open_class,
            self.scorer,
            self.config.assist_trials,
            &mut rng,
        )
    }

    /// Best of `assist_trials` swaps by perplexity.
    pub fn assist(&self, caption: &Caption, seed: u64) -> Result<NegativeRecord, PerturbError> {
        self.assist_as(NegativeMethod::Assist, caption, seed)
    }

    fn assist_as(&self, method: NegativeMethod, caption: &Caption, seed: u64) -> Result<NegativeRecord, PerturbError> {
        let trials = self.assist_trials(caption, seed)?;
        let best = best_trial(&trials).expect("at least one trial");
        Ok(Self::record(method, best, trials.len(), seed))
    }

    /// Every scored trial of a replace run, in draw order. Trials that
    /// exhausted their redraws are absent.
    pub fn replace_trials(&self, caption: &Caption, seed: u64) -> Result<Vec<Trial>, PerturbError> {
        let stats = self.stats.ok_or(PerturbError::MissingStats)?;
        let mut rng = rng_from_seed(seed);
        replace_trials(
            caption,
            self.open_class,
            stats,
            self.scorer,
            self.config.replace_trials,
            self.config.replace_k,
            &mut rng,
        )
    }

    /// Best of `replace_trials` same-tag substitutions by perplexity.
    pub fn replace(&self, caption: &Caption, seed: u64) -> Result<NegativeRecord, PerturbError> {
        self.replace_as(NegativeMethod::Replace, caption, seed)
    }

    fn replace_as(&self, method: NegativeMethod, caption: &Caption, seed: u64) -> Result<NegativeRecord, PerturbError> {
        let trials = self.replace_trials(caption, seed)?;
        let best = best_trial(&trials).expect("at least one trial");
        Ok(Self::record(method, best, trials.len(), seed))
    }

    /// Sub-seeds used by [`Perturber::double`] for its two constituents.
    pub fn double_seeds(seed: u64) -> (u64, u64) {
        (derive_seed(seed, "double-assist"), derive_seed(seed, "double-replace"))
    }

    /// One assist and one replace negative from independent sub-seeds.
    ///
    /// If one constituent has no valid perturbation the other is still
    /// returned and the failure recorded; scorer errors abort the whole call.
    pub fn double(&self, caption: &Caption, seed: u64) -> Result<DoubleOutcome, PerturbError> {
        let (assist_seed, replace_seed) = Self::double_seeds(seed);
        let mut out = DoubleOutcome {
            records: Vec::with_capacity(2),
            failures: Vec::new(),
        };
        let attempts = [
            (
                NegativeMethod::DoubleAssist,
                self.assist_as(NegativeMethod::DoubleAssist, caption, assist_seed),
            ),
            (
                NegativeMethod::DoubleReplace,
                self.replace_as(NegativeMethod::DoubleReplace, caption, replace_seed),
            ),
        ];
        for (method, result) in attempts {
            match result {
                Ok(r) => out.records.push(r),
                Err(e @ (PerturbError::NoValidPerturbation(_) | PerturbError::MissingStats)) => {
                    out.failures.push((method, e))
                }
                Err(e) => return Err(e),
            }
        }
        if out.records.is_empty() {
            let reasons: Vec<String> = out
                .failures
                .iter()
                .map(|(m, e)| format!("{}: {e}", m.as_str()))
                .collect();
            return Err(PerturbError::NoValidPerturbation(reasons.join("; ")));
        }
        Ok(out)
    }

    /// Runs `method` and normalizes the result to [`DoubleOutcome`] shape.
    pub fn generate(&self, method: Method, caption: &Caption, seed: u64) -> Result<DoubleOutcome, PerturbError> {
        let single = |r: NegativeRecord| DoubleOutcome {
            records: vec![r],
            failures: Vec::new(),
        };
        match method {
            Method::Swap => self.swap(caption, seed).map(single),
            Method::Assist => self.assist(caption, seed).map(single),
            Method::Replace => self.replace(caption, seed).map(single),
            Method::Double => self.double(caption, seed),
        }
    }
}
