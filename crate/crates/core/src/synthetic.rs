//! Seeded generators for test corpora, lexicons and evaluation fixtures.
//!
//! Captions follow a handful of templates with strong collocations (each
//! animal has its own colours and verbs, each place its own adjective and
//! preposition), so an n-gram model trained on them has a clear notion of
//! which word orders are fluent.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::corpus::{default_open_class, Caption, CorpusError, DatasetLine, EvalInstance, PosLexicon};
use crate::metrics::ScoreMatrix;
use crate::perturb::{instance_seed, rng_from_seed, swap_candidate};

const ANIMALS: &[&str] = &[
    "dog", "cat", "horse", "bird", "cow", "sheep", "giraffe", "zebra", "elephant", "bear", "duck", "goat",
];
const COLOURS: &[&str] = &["brown", "white", "black", "spotted", "grey", "small", "large", "young"];
const VERBS: &[&str] = &["runs", "sits", "stands", "walks", "sleeps", "eats", "rests", "waits"];
const ADVERBS: &[&str] = &["quietly", "slowly", "calmly", "happily"];
const PLACES: &[(&str, &str, &str)] = &[
    ("grass", "green", "on"),
    ("street", "busy", "on"),
    ("field", "open", "in"),
    ("bench", "wooden", "near"),
    ("fence", "tall", "by"),
    ("tree", "shady", "under"),
    ("water", "shallow", "in"),
    ("beach", "sandy", "on"),
    ("road", "dusty", "along"),
    ("barn", "red", "behind"),
];
const FUNCTION_WORDS: &[(&str, &str)] = &[
    ("a", "DET"),
    ("the", "DET"),
    ("and", "CCONJ"),
    ("on", "ADP"),
    ("in", "ADP"),
    ("near", "ADP"),
    ("by", "ADP"),
    ("under", "ADP"),
    ("along", "ADP"),
    ("behind", "ADP"),
];

fn colours_for(animal: usize) -> [&'static str; 2] {
    [COLOURS[animal % COLOURS.len()], COLOURS[(animal + 3) % COLOURS.len()]]
}

fn verbs_for(animal: usize) -> [&'static str; 2] {
    [VERBS[animal % VERBS.len()], VERBS[(animal + 5) % VERBS.len()]]
}

fn places_for(animal: usize) -> [usize; 3] {
    [
        animal % PLACES.len(),
        (animal + 4) % PLACES.len(),
        (animal + 7) % PLACES.len(),
    ]
}

/// Word/tag pairs covering every word the generators emit.
pub fn lexicon_pairs() -> Vec<(&'static str, &'static str)> {
    let mut pairs: Vec<(&str, &str)> = FUNCTION_WORDS.to_vec();
    pairs.extend(ANIMALS.iter().map(|w| (*w, "NOUN")));
    pairs.extend(PLACES.iter().map(|p| (p.0, "NOUN")));
    pairs.extend(COLOURS.iter().map(|w| (*w, "ADJ")));
    pairs.extend(PLACES.iter().map(|p| (p.1, "ADJ")));
    pairs.extend(VERBS.iter().map(|w| (*w, "VERB")));
    pairs.extend(ADVERBS.iter().map(|w| (*w, "ADV")));
    pairs
}

pub fn lexicon() -> PosLexicon {
    PosLexicon::build(lexicon_pairs(), &default_open_class()).expect("static lexicon is valid")
}

/// Lexicon as `word<TAB>tag` lines.
pub fn lexicon_tsv() -> String {
    lexicon_pairs().iter().map(|(w, t)| format!("{w}\t{t}\n")).collect()
}

/// One caption and the preposition that relates its subject to its place.
pub fn caption<R: Rng + ?Sized>(rng: &mut R) -> (String, &'static str) {
    let a = rng.random_range(0..ANIMALS.len());
    let animal = ANIMALS[a];
    let colour = *colours_for(a).choose(rng).unwrap();
    let verb = *verbs_for(a).choose(rng).unwrap();
    let (place, padj, prep) = PLACES[*places_for(a).choose(rng).unwrap()];
    let text = match rng.random_range(0..4) {
        0 => format!("a {colour} {animal} {verb} {prep} the {padj} {place}"),
        1 => {
            let adv = ADVERBS[a % ADVERBS.len()];
            format!("a {animal} {verb} {adv} {prep} the {place}")
        }
        2 => {
            let b = (a + 1 + rng.random_range(0..ANIMALS.len() - 1)) % ANIMALS.len();
            let other = ANIMALS[b];
            let ocolour = colours_for(b)[0];
            format!("a {colour} {animal} and a {ocolour} {other} {prep} the {place}")
        }
        _ => format!("the {colour} {animal} {verb} {prep} a {padj} {place}"),
    };
    (text, prep)
}

/// `n` caption lines, reproducible from `seed`.
pub fn corpus(n: usize, seed: u64) -> Vec<String> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| caption(&mut rng).0).collect()
}

/// Two-candidate instances: a generated true caption against one random
/// same-tag swap of it. The true caption's position alternates. Relations are
/// the caption's preposition.
pub fn swap_dataset(n: usize, seed: u64) -> Vec<DatasetLine> {
    let lex = lexicon();
    let open = lex.open_class().clone();
    let mut rng = rng_from_seed(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (text, prep) = caption(&mut rng);
        let id = format!("syn-{:06}", out.len());
        let cap = Caption::new(&text, &lex).expect("generated caption is non-empty");
        let mut swap_rng = rng_from_seed(instance_seed(seed, &id));
        let Ok(neg) = swap_candidate(&cap, &open, &mut swap_rng) else {
            continue;
        };
        let neg = neg.tokens.join(" ");
        let true_index = out.len() % 2;
        let captions = if true_index == 0 {
            vec![text, neg]
        } else {
            vec![neg, text]
        };
        out.push(DatasetLine {
            image_id: format!("img-{:06}", out.len()),
            id,
            captions,
            true_index,
            relation: Some(prep.to_string()),
        });
    }
    out
}

/// Images with `per_image` genuine captions each, in dataset form (every
/// caption is true; `true_index` is 0). Used as generation sources.
pub fn caption_sets(n: usize, per_image: usize, seed: u64) -> Vec<DatasetLine> {
    assert!(per_image >= 2);
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|i| DatasetLine {
            id: format!("cap-{i:06}"),
            image_id: format!("img-{i:06}"),
            captions: (0..per_image).map(|_| caption(&mut rng).0).collect(),
            true_index: 0,
            relation: None,
        })
        .collect()
}

/// Tags and validates dataset lines.
pub fn instances(lines: &[DatasetLine], lexicon: &PosLexicon) -> Result<Vec<EvalInstance>, CorpusError> {
    let mut buf = Vec::new();
    for l in lines {
        serde_json::to_writer(&mut buf, l).expect("dataset lines serialize");
        buf.push(b'\n');
    }
    crate::corpus::parse_dataset(buf.as_slice(), lexicon)
}

/// Counts behind an engineered accuracy fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccuracySpec {
    pub total: usize,
    pub hard: usize,
    pub correct: usize,
    pub hard_correct: usize,
}

/// Two-candidate data with cached scorer perplexities and model scores that
/// realize an [`AccuracySpec`] exactly, with no ties on either side.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyFixture {
    pub dataset: Vec<DatasetLine>,
    pub perplexities: BTreeMap<String, Vec<f64>>,
    pub scores: ScoreMatrix,
}

/// Builds the fixture. Which instances are hard and which the model gets
/// right is spread out by a seeded shuffle.
pub fn accuracy_fixture(spec: AccuracySpec, seed: u64) -> AccuracyFixture {
    let AccuracySpec {
        total,
        hard,
        correct,
        hard_correct,
    } = spec;
    assert!(hard <= total && hard_correct <= hard && hard_correct <= correct);
    assert!(correct - hard_correct <= total - hard);
    let mut rng = rng_from_seed(seed);
    let mut order: Vec<usize> = (0..total).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let mut dataset = Vec::with_capacity(total);
    let mut perplexities = BTreeMap::new();
    let mut scores = ScoreMatrix::new();
    for (rank, &slot) in order.iter().enumerate() {
        let is_hard = slot < hard;
        let is_correct = if is_hard {
            slot < hard_correct
        } else {
            slot - hard < correct - hard_correct
        };
        let id = format!("fx-{rank:06}");
        let true_index = rank % 2;
        let (pt, pf) = if is_hard {
            (rng.random_range(4.0..8.0), rng.random_range(1.0..3.9))
        } else {
            (rng.random_range(1.0..3.9), rng.random_range(4.0..8.0))
        };
        let (st, sf) = if is_correct {
            (rng.random_range(0.30..0.40), rng.random_range(0.10..0.29))
        } else {
            (rng.random_range(0.10..0.29), rng.random_range(0.30..0.40))
        };
        let order2 = |t: f64, f: f64| if true_index == 0 { vec![t, f] } else { vec![f, t] };
        dataset.push(DatasetLine {
            id: id.clone(),
            image_id: format!("img-{rank:06}"),
            captions: fixture_captions(true_index),
            true_index,
            relation: None,
        });
        perplexities.insert(id.clone(), order2(pt, pf));
        scores.insert(id, order2(st, sf));
    }
    AccuracyFixture {
        dataset,
        perplexities,
        scores,
    }
}

fn fixture_captions(true_index: usize) -> Vec<String> {
    let t = "the dog sits on the grass".to_string();
    let f = "the grass sits on the dog".to_string();
    if true_index == 0 {
        vec![t, f]
    } else {
        vec![f, t]
    }
}
