mod common;

use common::*;
use serde_json::Value;

#[test]
fn train_lm_writes_a_stamped_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(&dir.path().join("lm"));
    let o = lingprior(&[
        "train-lm",
        "--corpus",
        &fixture("corpus.txt"),
        "--order",
        "2",
        "--seed",
        "4",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("vocab size"));
    assert!(o.stdout.is_empty());
    let model = read_json(&dir.path().join("lm/model.json"));
    assert_eq!(model["order"], 2);
    assert_eq!(model["format_version"], 1);
    assert_eq!(model["metadata"]["seed"], "4");
    assert!(model["metadata"]["config_hash"].as_str().unwrap().len() == 16);
    let summary = read_json(&dir.path().join("lm/train_summary.json"));
    assert_eq!(summary["meta"]["seed"], 4);
    assert_eq!(summary["ngram_counts"].as_array().unwrap().len(), 2);
    assert!(dir.path().join("lm/train-lm.manifest.json").exists());
    assert!(dir.path().join("lm/train-lm.effective_config.json").exists());
}

#[test]
fn missing_inputs_are_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let o = lingprior(&["train-lm", "--out", &out]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--corpus"));
    let o = lingprior(&["evaluate", "--dataset", "/nonexistent.jsonl", "--out", &out]);
    assert_eq!(code(&o), 1);
    let o = lingprior(&[
        "score",
        "--dataset",
        &fixture("dataset.jsonl"),
        "--scorer",
        "gpt2",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("unknown scorer"));
}

#[test]
fn shipped_fixture_reports_the_expected_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = s(dir.path());
    let o = lingprior(&[
        "evaluate",
        "--dataset",
        &fixture("gap-positive/dataset.jsonl"),
        "--scores",
        &fixture("gap-positive/scores.jsonl"),
        "--use-cache",
        &fixture("gap-positive/perplexities.jsonl"),
        "--out",
        &out,
        "--stdout",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let pct = |k: &str| format!("{:.2}", report[k].as_f64().unwrap() * 100.0);
    assert_eq!(pct("overall_accuracy"), "61.35");
    assert_eq!(pct("hard_test_accuracy"), "57.92");
    assert_eq!(pct("linguistic_gap"), "3.43");
    assert_eq!(report["hard_count"], 625);
    assert!(stderr(&o).contains("gap 3.43"));
    assert_eq!(read_json(&dir.path().join("report.json")), report);
    let csv = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn gen_negatives_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = s(&dir.path().join(name));
        let o = lingprior(&[
            "gen-negatives",
            "--method",
            "swap",
            "--seed",
            "0",
            "--dataset",
            &fixture("captions.jsonl"),
            "--lexicon",
            &fixture("lexicon.tsv"),
            "--corpus",
            &fixture("corpus.txt"),
            "--scorer",
            "ngram-order:3",
            "--out",
            &out,
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        (
            std::fs::read(dir.path().join(name).join("negatives.jsonl")).unwrap(),
            std::fs::read(dir.path().join(name).join("diagnostics.json")).unwrap(),
        )
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    let first: Value = serde_json::from_slice(a.0.split(|&c| c == b'\n').next().unwrap()).unwrap();
    assert_eq!(first["captions"].as_array().unwrap().len(), 5);
    assert_eq!(first["captions"][0]["negatives"][0]["method"], "swap");
}

#[test]
fn first_caption_only_keeps_one_source() {
    let dir = tempfile::tempdir().unwrap();
    let full = s(&dir.path().join("full"));
    let first = s(&dir.path().join("first"));
    let base = [
        "gen-negatives",
        "--method",
        "assist",
        "--dataset",
        &fixture("captions.jsonl"),
        "--lexicon",
        &fixture("lexicon.tsv"),
        "--corpus",
        &fixture("corpus.txt"),
        "--scorer",
        "ngram-order:2",
    ];
    let o = lingprior(&[&base[..], &["--out", &full]].concat());
    assert_eq!(code(&o), 0);
    let o = lingprior(&[&base[..], &["--out", &first, "--first-caption-only"]].concat());
    assert_eq!(code(&o), 0);
    let lines = |d: &str| -> Vec<Value> {
        std::fs::read_to_string(std::path::Path::new(d).join("negatives.jsonl"))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    };
    let (f, o1) = (lines(&full), lines(&first));
    assert_eq!(f.len(), o1.len());
    for (a, b) in f.iter().zip(&o1) {
        assert_eq!(b["captions"].as_array().unwrap().len(), 1);
        assert_eq!(a["captions"][0], b["captions"][0]);
    }
}

#[test]
fn skipped_captions_give_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(
        dir.path(),
        "d.jsonl",
        concat!(
            r#"{"id":"ok","image_id":"i1","captions":["a brown dog runs on the green grass","a cat sits"],"true_index":0}"#,
            "\n",
            r#"{"id":"noswap","image_id":"i2","captions":["a dog runs","a cat sits"],"true_index":0}"#,
            "\n"
        ),
    );
    let out = s(&dir.path().join("o"));
    let o = lingprior(&[
        "gen-negatives",
        "--first-caption-only",
        "--dataset",
        &data,
        "--lexicon",
        &fixture("lexicon.tsv"),
        "--corpus",
        &fixture("corpus.txt"),
        "--scorer",
        "ngram-order:2",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("o/negatives.jsonl")).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0]["captions"][0].get("skipped").is_none());
    assert!(lines[1]["captions"][0]["skipped"]
        .as_str()
        .unwrap()
        .contains("no valid perturbation"));
    assert_eq!(lines[1]["captions"][0]["negatives"], Value::Array(vec![]));
    let diag = read_json(&dir.path().join("o/diagnostics.json"));
    assert_eq!(diag["skipped"], 1);
}

#[test]
fn double_with_partial_failure_records_it() {
    let dir = tempfile::tempdir().unwrap();
    // "a dog runs" has no same-tag pair to swap but can be replaced.
    let data = write(
        dir.path(),
        "d.jsonl",
        concat!(
            r#"{"id":"x","image_id":"i","captions":["a dog runs","a cat sits"],"true_index":0}"#,
            "\n"
        ),
    );
    let out = s(&dir.path().join("o"));
    let o = lingprior(&[
        "gen-negatives",
        "--method",
        "double",
        "--first-caption-only",
        "--dataset",
        &data,
        "--lexicon",
        &fixture("lexicon.tsv"),
        "--corpus",
        &fixture("corpus.txt"),
        "--scorer",
        "ngram-order:2",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let line: Value = serde_json::from_str(
        std::fs::read_to_string(dir.path().join("o/negatives.jsonl"))
            .unwrap()
            .trim(),
    )
    .unwrap();
    let src = &line["captions"][0];
    assert_eq!(src["negatives"].as_array().unwrap().len(), 1);
    assert_eq!(src["negatives"][0]["method"], "double-replace");
    assert_eq!(src["failures"][0]["method"], "double-assist");
}

/// Corpus of the dataset's true captions, except that every fourth instance
/// contributes its false caption many times over, so those become hard.
fn skewed_corpus(dir: &std::path::Path, dataset: &str) -> String {
    let mut text = String::new();
    for (i, line) in std::fs::read_to_string(dataset).unwrap().lines().enumerate() {
        let v: Value = serde_json::from_str(line).unwrap();
        let t = v["true_index"].as_u64().unwrap() as usize;
        let (k, reps) = if i % 4 == 0 { (1 - t, 20) } else { (t, 1) };
        for _ in 0..reps {
            text.push_str(v["captions"][k].as_str().unwrap());
            text.push('\n');
        }
    }
    write(dir, "corpus.txt", &text)
}

fn scores_for(dir: &std::path::Path, dataset: &str) -> String {
    let mut text = String::new();
    for (i, line) in std::fs::read_to_string(dataset).unwrap().lines().enumerate() {
        let v: Value = serde_json::from_str(line).unwrap();
        let t = v["true_index"].as_u64().unwrap() as usize;
        let right = i % 3 != 0;
        let scores: Vec<f64> = (0..2).map(|k| if (k == t) == right { 0.8 } else { 0.2 }).collect();
        text.push_str(&serde_json::json!({"id": v["id"], "scores": scores}).to_string());
        text.push('\n');
    }
    write(dir, "scores.jsonl", &text)
}

#[test]
fn cached_and_fresh_evaluation_agree() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("dataset.jsonl");
    let scores = scores_for(dir.path(), &data);
    let corpus = skewed_corpus(dir.path(), &data);
    let common = [
        "--dataset",
        &data,
        "--corpus",
        &corpus,
        "--scorer",
        "ngram-order:2",
        "--scorer",
        "ngram-order:3",
        "--min-hard",
        "2",
    ];
    let cache_dir = s(&dir.path().join("cache"));
    let o = lingprior(&[&["score"][..], &common, &["--out", &cache_dir]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let fresh = s(&dir.path().join("fresh"));
    let cached = s(&dir.path().join("cached"));
    let o = lingprior(&[&["evaluate"][..], &common, &["--scores", &scores, "--out", &fresh]].concat());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cache_file = s(&dir.path().join("cache/perplexities.jsonl"));
    let o = lingprior(
        &[
            &["evaluate"][..],
            &common,
            &["--scores", &scores, "--out", &cached, "--use-cache", &cache_file],
        ]
        .concat(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a = std::fs::read(dir.path().join("fresh/report.json")).unwrap();
    let b = std::fs::read(dir.path().join("cached/report.json")).unwrap();
    assert_eq!(a, b);
    let report: Value = serde_json::from_slice(&a).unwrap();
    let hard = report["hard_count"].as_u64().unwrap();
    assert!((50..200).contains(&hard), "{hard}");
    assert!(report["relations"]["total_relations"].as_u64().unwrap() > 1);
    assert!(dir.path().join("fresh/relations.json").exists());
}

#[test]
fn use_cache_defaults_to_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("dataset.jsonl");
    let scores = scores_for(dir.path(), &data);
    let out = s(&dir.path().join("o"));
    let o = lingprior(&[
        "score",
        "--dataset",
        &data,
        "--corpus",
        &fixture("corpus.txt"),
        "--scorer",
        "ngram-order:3",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0);
    let o = lingprior(&[
        "grid",
        "--dataset",
        &data,
        "--scores",
        &scores,
        "--use-cache",
        "--out",
        &out,
        "--bins",
        "4",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let grid = read_json(&dir.path().join("o/grid.json"));
    assert_eq!(grid["bins"], 4);
    assert_eq!(grid["included"], 200);
}

#[test]
fn unscorable_instance_is_excluded_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(
        dir.path(),
        "d.jsonl",
        concat!(
            r#"{"id":"a","image_id":"i","captions":["a dog runs on the grass","a grass runs on the dog"],"true_index":0}"#,
            "\n",
            r#"{"id":"b","image_id":"i","captions":["dog","a dog runs"],"true_index":1}"#,
            "\n",
            r#"{"id":"c","image_id":"i","captions":["a dog runs on the grass","the grass runs on a dog"],"true_index":1}"#,
            "\n"
        ),
    );
    let scores = write(
        dir.path(),
        "s.jsonl",
        "{\"id\":\"a\",\"scores\":[0.9,0.1]}\n{\"id\":\"b\",\"scores\":[0.9,0.1]}\n{\"id\":\"c\",\"scores\":[0.9,0.1]}\n",
    );
    let out = s(&dir.path().join("o"));
    let args = [
        "--dataset",
        &data,
        "--corpus",
        &fixture("corpus.txt"),
        "--scorer",
        "ngram-order:2",
        "--out",
        &out,
    ];
    let o = lingprior(&[&["score"][..], &args].concat());
    assert_eq!(code(&o), 2);
    let cache = std::fs::read_to_string(dir.path().join("o/perplexities.jsonl")).unwrap();
    assert!(cache.lines().nth(1).unwrap().contains("\"error\""));
    let o = lingprior(&[&["evaluate"][..], &args, &["--scores", &scores]].concat());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let report = read_json(&dir.path().join("o/report.json"));
    assert_eq!(report["excluded"], 1);
    assert_eq!(report["total_count"], 2);
}

#[test]
fn grid_rejects_non_pairwise_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(
        dir.path(),
        "d.jsonl",
        concat!(
            r#"{"id":"a","image_id":"i","captions":["a dog runs","a runs dog","dog a runs"],"true_index":0}"#,
            "\n"
        ),
    );
    let scores = write(dir.path(), "s.jsonl", "{\"id\":\"a\",\"scores\":[0.9,0.1,0.3]}\n");
    let out = s(&dir.path().join("o"));
    let o = lingprior(&[
        "grid",
        "--dataset",
        &data,
        "--scores",
        &scores,
        "--corpus",
        &fixture("corpus.txt"),
        "--scorer",
        "ngram-order:2",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("exactly 2"));
}

#[test]
fn embeddings_are_converted_to_scores() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(
        dir.path(),
        "d.jsonl",
        concat!(
            r#"{"id":"a","image_id":"i","captions":["the dog sits on the grass","the grass sits on the dog"],"true_index":0}"#,
            "\n",
            r#"{"id":"b","image_id":"i","captions":["the grass sits on the dog","the dog sits on the grass"],"true_index":1}"#,
            "\n"
        ),
    );
    let emb = write(
        dir.path(),
        "e.jsonl",
        concat!(
            r#"{"id":"a","image_embedding":[1,2,2],"caption_embeddings":[[2,1,2],[-1,0,0]]}"#,
            "\n",
            r#"{"id":"b","image_embedding":[1,0],"caption_embeddings":[[1,0.1],[0,1]]}"#,
            "\n"
        ),
    );
    let out = s(&dir.path().join("o"));
    let o = lingprior(&[
        "evaluate",
        "--dataset",
        &data,
        "--embeddings",
        &emb,
        "--corpus",
        &fixture("corpus.txt"),
        "--scorer",
        "ngram-order:2",
        "--out",
        &out,
    ]);
    // b's image embedding sits closer to its false caption
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report = read_json(&dir.path().join("o/report.json"));
    assert_eq!(report["overall_accuracy"], 0.5);
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        &format!(
            "dataset = {:?}\nlexicon = {:?}\ncorpus = {:?}\nscorers = [\"ngram-order:2\"]\nseed = 3\n[perturb]\nmethod = \"assist\"\nassist_trials = 2\n",
            fixture("captions.jsonl"),
            fixture("lexicon.tsv"),
            fixture("corpus.txt")
        ),
    );
    let out = s(&dir.path().join("o"));
    let o = lingprior(&[
        "gen-negatives",
        "--config",
        &cfg,
        "--first-caption-only",
        "--assist-trials",
        "3",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let eff = read_json(&dir.path().join("o/gen-negatives.effective_config.json"));
    assert_eq!(eff["perturb"]["assist_trials"], 3);
    assert_eq!(eff["method"], "assist");
    assert_eq!(eff["seed"], 3);
    let first = std::fs::read_to_string(dir.path().join("o/negatives.jsonl")).unwrap();
    let v: Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    assert_eq!(v["captions"][0]["negatives"][0]["trials"], 3);
    assert_eq!(v["captions"][0]["negatives"][0]["method"], "assist");
}

#[test]
fn empty_hard_set_is_reported_as_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(
        dir.path(),
        "d.jsonl",
        concat!(
            r#"{"id":"a","image_id":"i","captions":["the dog sits on the grass","the grass sits on the dog"],"true_index":0}"#,
            "\n"
        ),
    );
    let scores = write(dir.path(), "s.jsonl", "{\"id\":\"a\",\"scores\":[0.9,0.1]}\n");
    let corpus = write(dir.path(), "c.txt", "the dog sits on the grass\n");
    let out = s(&dir.path().join("o"));
    let o = lingprior(&[
        "evaluate",
        "--dataset",
        &data,
        "--scores",
        &scores,
        "--corpus",
        &corpus,
        "--scorer",
        "ngram-order:2",
        "--out",
        &out,
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("hard set is empty"));
    assert!(!dir.path().join("o/report.json").exists());
}
