use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use lingprior_bench::{evaluation, Workload};
use lingprior_core::metrics::{binned_grid, find_hard_instances};
use lingprior_core::scorer::train_ngram;
use lingprior_core::{Method, PerplexityScorer, PerturbConfig, Perturber, Smoothing};

fn ngram(c: &mut Criterion) {
    let w = Workload::new(2000, 200);
    c.bench_function("train trigram 2k lines", |b| {
        b.iter(|| train_ngram(black_box(&w.tokens), 3, Smoothing::default(), 1).unwrap())
    });
    let batch: Vec<&[String]> = w.tokens.iter().take(500).map(|t| t.as_slice()).collect();
    c.bench_function("score 500 captions", |b| {
        b.iter(|| w.model.perplexity_batch(black_box(&batch)).unwrap())
    });
    c.bench_function("hard set 200 pairs", |b| {
        b.iter(|| find_hard_instances(black_box(&w.dataset), &w.model))
    });
}

fn perturb(c: &mut Criterion) {
    let w = Workload::new(2000, 10);
    let p = Perturber::new(
        w.lexicon.open_class(),
        Some(&w.stats),
        &w.model,
        PerturbConfig::default(),
    )
    .unwrap();
    let sources = &w.captions[..100];
    let mut group = c.benchmark_group("negatives for 100 captions");
    for method in [Method::Swap, Method::Assist, Method::Replace, Method::Double] {
        group.bench_function(format!("{method:?}").to_lowercase(), |b| {
            b.iter(|| {
                for (i, cap) in sources.iter().enumerate() {
                    let _ = black_box(p.generate(method, cap, i as u64));
                }
            })
        });
    }
    group.finish();
}

fn metrics(c: &mut Criterion) {
    c.bench_function("report 10k", |b| {
        b.iter_batched(|| evaluation(10_000), |e| e.report().unwrap(), BatchSize::LargeInput)
    });
    let e = evaluation(10_000);
    c.bench_function("grid 10k", |b| b.iter(|| binned_grid(black_box(&e), 10, 10).unwrap()));
}

criterion_group!(benches, ngram, perturb, metrics);
criterion_main!(benches);
