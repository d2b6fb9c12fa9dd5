//! Command-line behaviour: outputs, exit codes, manifests and replay.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tweetlens"))
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn train_sentiment(out: &Path) -> Output {
    run(&[
        "train",
        "--data",
        &fixture("sentiment.csv"),
        "--label-map",
        "0=0,4=1",
        "--out",
        p(out),
    ])
}

fn train_sarcasm(out: &Path) -> Output {
    run(&[
        "train",
        "--task",
        "sarcasm",
        "--data",
        &fixture("sarcasm_train.jsonl"),
        "--test-data",
        &fixture("sarcasm_test.jsonl"),
        "--text-field",
        "headline",
        "--label-field",
        "is_sarcastic",
        "--out",
        p(out),
    ])
}

struct Models {
    _dir: tempfile::TempDir,
    root: PathBuf,
    sentiment: PathBuf,
    sarcasm: PathBuf,
}

fn models() -> Models {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    let sentiment = root.join("sentiment.json");
    let sarcasm = root.join("sarcasm.json");
    assert_eq!(train_sentiment(&sentiment).status.code(), Some(0));
    assert_eq!(train_sarcasm(&sarcasm).status.code(), Some(0));
    Models {
        _dir: dir,
        root,
        sentiment,
        sarcasm,
    }
}

fn analyze(m: &Models, data: &str, extra: &[&str], out_dir: &Path) -> Output {
    let mut args = vec![
        "analyze",
        "--data",
        data,
        "--sentiment-model",
        p(&m.sentiment),
        "--sarcasm-model",
        p(&m.sarcasm),
        "--out-dir",
        p(out_dir),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn train_writes_model_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let o = train_sentiment(&model);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(model.exists());
    let out = stdout(&o);
    assert!(out.contains("confusion matrix"));
    assert!(out.contains("weighted avg"));
    assert!(out.contains("train: 140  test: 60"));

    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m.json.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "train");
    assert_eq!(manifest["args"]["seed"], 42);
    assert_eq!(manifest["args"]["train_fraction"], 0.7);
    assert_eq!(manifest["seeds"]["split"], 42);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["duration_ms"].is_u64());
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 1);
    let digest = manifest["outputs"][model.display().to_string()].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn missing_input_is_a_runtime_failure_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let o = run(&["train", "--data", p(&dir.path().join("nope.csv")), "--out", p(&model)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not found"));
    assert!(!model.exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    let data = fixture("sentiment.csv");
    for args in [
        vec!["train", "--data", &data, "--train-fraction", "0", "--out", p(&model)],
        vec!["train", "--data", &data, "--train-fraction", "1.5", "--out", p(&model)],
        vec!["train", "--data", &data, "--lambda", "0", "--out", p(&model)],
        vec!["train", "--data", &data, "--epochs", "0", "--out", p(&model)],
        vec!["train", "--data", &data, "--label-map", "0=7", "--out", p(&model)],
        vec!["train", "--data", &data, "--format", "xml", "--out", p(&model)],
        vec!["train", "--data", &data],
        vec!["train", "--task", "sarcasm", "--data", &data, "--out", p(&model)],
        vec!["frobnicate"],
        vec![],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!model.exists());
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn tfidf_flags_change_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("sentiment.csv");
    let mut bytes = Vec::new();
    for (i, flag) in [None, Some("--no-l2-norm"), Some("--tfidf-compat")].iter().enumerate() {
        let out = dir.path().join(format!("m{i}.json"));
        let mut args = vec!["train", "--data", &data, "--label-map", "0=0,4=1", "--out", p(&out)];
        args.extend(flag.iter());
        assert_eq!(run(&args).status.code(), Some(0));
        bytes.push(std::fs::read(&out).unwrap());
    }
    assert_ne!(bytes[0], bytes[1]);
    assert_ne!(bytes[0], bytes[2]);
}

#[test]
fn eval_reports_and_writes_metrics() {
    let m = models();
    let metrics = m.root.join("metrics.json");
    let o = run(&[
        "eval",
        "--model",
        p(&m.sentiment),
        "--data",
        &fixture("sentiment.csv"),
        "--label-map",
        "0=0,4=1",
        "--holdout",
        "--out",
        p(&metrics),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy                             1.00"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(v["report"]["accuracy"], 1.0);
    assert_eq!(v["examples"], 60);
    assert!(m.root.join("metrics.json.manifest.json").exists());
}

#[test]
fn eval_failures_exit_one() {
    let m = models();
    let metrics = m.root.join("metrics.json");
    let missing_label = run(&[
        "eval",
        "--model",
        p(&m.sentiment),
        "--data",
        &fixture("sentiment.csv"),
        "--label-field",
        "stars",
        "--out",
        p(&metrics),
    ]);
    assert_eq!(missing_label.status.code(), Some(1));
    assert!(stderr(&missing_label).contains("stars"));

    let empty = m.root.join("empty.csv");
    std::fs::write(&empty, "label,text\n").unwrap();
    let o = run(&["eval", "--model", p(&m.sentiment), "--data", p(&empty), "--out", p(&metrics)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("empty"));

    let garbage = m.root.join("garbage.json");
    std::fs::write(&garbage, "{\"format\": \"tweetlens-model\"").unwrap();
    let o = run(&["eval", "--model", p(&garbage), "--data", &fixture("sentiment.csv"), "--out", p(&metrics)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!metrics.exists());
}

#[test]
fn analyze_writes_all_outputs() {
    let m = models();
    let out = m.root.join("analysis");
    let o = analyze(&m, &fixture("election_tweets.csv"), &[], &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for mode in ["raw", "adjusted"] {
        for chart in ["popularity", "ratio", "positive_share"] {
            assert!(out.join(format!("{chart}_{mode}.svg")).exists());
            assert!(out.join(format!("{chart}_{mode}.dat")).exists());
        }
    }
    let annotated = std::fs::read_to_string(out.join("annotated.csv")).unwrap();
    let header = annotated.lines().next().unwrap();
    assert!(header.starts_with("created_at,tweet_id,full_text,"));
    assert!(header.ends_with(",pred_sentiment,pred_sarcastic,effective_sentiment,parties"));
    assert_eq!(annotated.lines().count(), 501);

    let results: Value = serde_json::from_str(&std::fs::read_to_string(out.join("results.json")).unwrap()).unwrap();
    assert_eq!(results["corpus_total"], 500);
    assert_eq!(results["charts"].as_array().unwrap().len(), 6);
    assert!(stdout(&o).contains("Percentage of positive tweets per party"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn analyze_jsonl_corpus_keeps_format() {
    let m = models();
    let corpus = m.root.join("tweets.jsonl");
    std::fs::write(
        &corpus,
        "{\"tweet_id\": \"1\", \"full_text\": \"Modi great rally\", \"retweet_count\": 3}\n\
         {\"tweet_id\": \"2\", \"full_text\": \"Congress totally awful, wow\"}\n",
    )
    .unwrap();
    let out = m.root.join("a");
    let o = analyze(&m, p(&corpus), &[], &out);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lines: Vec<Value> = std::fs::read_to_string(out.join("annotated.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["retweet_count"], 3);
    assert_eq!(lines[0]["parties"], serde_json::json!(["BJP"]));
    assert_eq!(lines[1]["parties"], serde_json::json!(["INC"]));
}

#[test]
fn analyze_errors() {
    let m = models();
    let out = m.root.join("analysis");

    // Labeled training data has no full_text column.
    let o = analyze(&m, &fixture("sentiment.csv"), &[], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("full_text"));

    let bad = m.root.join("bad.toml");
    std::fs::write(&bad, "[parties]\nBJP = []\nINC = [\"congress\"]\n").unwrap();
    let o = analyze(&m, &fixture("election_tweets.csv"), &["--party-config", p(&bad)], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("BJP"));
    assert!(!out.join("results.json").exists());
}

#[test]
fn failed_analyze_removes_partial_outputs() {
    let m = models();
    let out = m.root.join("analysis");
    // A directory where results.json should go makes that write fail after
    // the annotated corpus has already been written.
    std::fs::create_dir_all(out.join("results.json")).unwrap();
    let o = analyze(&m, &fixture("election_tweets.csv"), &[], &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.join("annotated.csv").exists());
    assert!(!out.join("manifest.json").exists());
}

#[test]
fn replay_reproduces_outputs_byte_for_byte() {
    let m = models();
    let out = m.root.join("analysis");
    assert_eq!(analyze(&m, &fixture("election_tweets.csv"), &[], &out).status.code(), Some(0));
    let results = std::fs::read(out.join("results.json")).unwrap();
    let model = std::fs::read(&m.sentiment).unwrap();

    std::fs::remove_file(out.join("results.json")).unwrap();
    let o = run(&["replay", "--manifest", p(&out.join("manifest.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(out.join("results.json")).unwrap(), results);

    std::fs::remove_file(&m.sentiment).unwrap();
    let manifest = m.root.join("sentiment.json.manifest.json");
    let o = run(&["replay", "--manifest", p(&manifest)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read(&m.sentiment).unwrap(), model);
}

#[test]
fn replay_refuses_changed_inputs() {
    let m = models();
    let data = m.root.join("data.csv");
    std::fs::copy(fixture("sentiment.csv"), &data).unwrap();
    let model = m.root.join("copy.json");
    let o = run(&["train", "--data", p(&data), "--label-map", "0=0,4=1", "--out", p(&model)]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&data, "label,text\n4,good\n0,bad\n").unwrap();
    let o = run(&["replay", "--manifest", p(&m.root.join("copy.json.manifest.json"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("changed"));
}
