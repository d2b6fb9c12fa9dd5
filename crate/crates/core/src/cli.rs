//! Command-line front end: `train`, `eval`, `analyze` and `replay`.
//!
//! Every successful run writes a manifest holding the resolved arguments, the
//! digests of all inputs and outputs, the tool version and the wall-clock
//! duration. `replay` re-runs a manifest and checks that the outputs come out
//! byte-identical.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::analysis::{self, AnalysisError, Mode, PartyConfig};
use crate::corpus::{self, Corpus, Format, LabeledDataset, LabeledSource, RawRow, SplitConfig};
use crate::fsutil::{sha256_file, sha256_hex, write_atomic};
use crate::pipeline::ClassifierPipeline;
use crate::svm::TrainConfig;
use crate::tfidf::{IdfMode, TfidfOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "tweetlens",
    version,
    about = "Sentiment and sarcasm classification of election tweets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Train a sentiment or sarcasm model and report held-out performance.
    Train(TrainArgs),
    /// Evaluate a saved model on labeled data.
    Eval(EvalArgs),
    /// Apply both models to a tweet corpus and summarize per party.
    Analyze(AnalyzeArgs),
    /// Re-run the command recorded in a manifest and verify its outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Sentiment,
    Sarcasm,
}

impl Task {
    fn name(self) -> &'static str {
        match self {
            Task::Sentiment => "sentiment",
            Task::Sarcasm => "sarcasm",
        }
    }

    fn label_names(self) -> [String; 2] {
        match self {
            Task::Sentiment => ["negative".into(), "positive".into()],
            Task::Sarcasm => ["not sarcastic".into(), "sarcastic".into()],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Jsonl => Format::Jsonl,
        }
    }
}

/// Where labeled data comes from and how to read it.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct LabeledDataArgs {
    /// Labeled input file (CSV with header, or JSON lines).
    #[arg(long)]
    pub data: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value = "text")]
    pub text_field: String,
    #[arg(long, default_value = "label")]
    pub label_field: String,
    /// Raw label → class, e.g. `0=0,4=1`. Rows with other labels are skipped.
    #[arg(long, default_value = "0=0,1=1")]
    pub label_map: String,
}

impl LabeledDataArgs {
    fn source_for(&self, path: &Path) -> Result<LabeledSource, CliError> {
        Ok(LabeledSource {
            format: self.format.map(Format::from).unwrap_or_else(|| Format::from_path(path)),
            text_field: self.text_field.clone(),
            label_field: self.label_field.clone(),
            label_map: corpus::parse_label_map(&self.label_map).map_err(usage)?,
        })
    }

    fn load(&self, path: &Path, task: Option<Task>) -> Result<LabeledDataset, CliError> {
        let source = self.source_for(path)?;
        let mut ds = corpus::load_labeled(path, &source)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        if let Some(task) = task {
            ds.label_names = task.label_names();
        }
        if ds.skipped > 0 {
            eprintln!(
                "note: {} rows of {} skipped (empty text or unmapped label)",
                ds.skipped,
                path.display()
            );
        }
        Ok(ds)
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    #[arg(long, value_enum, default_value = "sentiment")]
    pub task: Task,
    #[command(flatten)]
    pub data: LabeledDataArgs,
    /// Held-out labeled file. Required for the sarcasm task; when given for
    /// the sentiment task it replaces the random split.
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    /// Fraction of rows used for training, in (0, 1).
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    /// Seed for the split and for the solver's example order.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Regularization strength of the SVM.
    #[arg(long, default_value_t = 1e-4)]
    pub lambda: f64,
    /// Passes over the training data.
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Keep raw TF-IDF vectors instead of scaling them to unit length.
    #[arg(long)]
    pub no_l2_norm: bool,
    /// Use the smoothed idf `ln((1+N)/(1+df)) + 1`.
    #[arg(long)]
    pub tfidf_compat: bool,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Model file produced by `train`.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: LabeledDataArgs,
    /// Evaluate only the held-out part of the seeded split of `--data`.
    #[arg(long)]
    pub holdout: bool,
    #[arg(long, default_value_t = 0.7)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Metrics file to write (JSON).
    #[arg(long, default_value = "metrics.json")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct AnalyzeArgs {
    /// Tweet corpus (CSV with header, or JSON lines).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value = "full_text")]
    pub text_field: String,
    #[arg(long)]
    pub sentiment_model: PathBuf,
    #[arg(long)]
    pub sarcasm_model: PathBuf,
    /// TOML file with a `[parties]` table of keyword lists. Built-in BJP/INC
    /// keywords are used when omitted.
    #[arg(long)]
    pub party_config: Option<PathBuf>,
    /// Directory for the annotated corpus, results and charts.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    pub manifest: PathBuf,
}

/// Record of a successful run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Value,
    pub seeds: BTreeMap<String, u64>,
    /// Absolute path → SHA-256 of every input read.
    pub inputs: BTreeMap<String, String>,
    /// Absolute path → SHA-256 of every output written.
    pub outputs: BTreeMap<String, String>,
    pub duration_ms: u64,
}

/// What a command produced, before the manifest is written.
struct RunOutcome {
    inputs: Vec<PathBuf>,
    outputs: Vec<(PathBuf, String)>,
    seeds: BTreeMap<String, u64>,
    manifest_path: PathBuf,
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    let command = absolutize(command)?;
    if let Command::Replay(r) = &command {
        return replay(&r.manifest);
    }
    let started = Instant::now();
    let outcome = match &command {
        Command::Train(a) => cmd_train(a)?,
        Command::Eval(a) => cmd_eval(a)?,
        Command::Analyze(a) => cmd_analyze(a)?,
        Command::Replay(_) => unreachable!(),
    };
    write_manifest(&command, outcome, started)
}

/// Resolve every path against the current directory so manifests replay
/// from anywhere.
fn absolutize(mut command: Command) -> Result<Command, CliError> {
    fn abs(p: &mut PathBuf) -> Result<(), CliError> {
        *p = std::path::absolute(&*p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
        Ok(())
    }
    match &mut command {
        Command::Train(a) => {
            abs(&mut a.data.data)?;
            if let Some(t) = &mut a.test_data {
                abs(t)?;
            }
            abs(&mut a.out)?;
        }
        Command::Eval(a) => {
            abs(&mut a.model)?;
            abs(&mut a.data.data)?;
            abs(&mut a.out)?;
        }
        Command::Analyze(a) => {
            abs(&mut a.data)?;
            abs(&mut a.sentiment_model)?;
            abs(&mut a.sarcasm_model)?;
            if let Some(p) = &mut a.party_config {
                abs(p)?;
            }
            abs(&mut a.out_dir)?;
        }
        Command::Replay(a) => abs(&mut a.manifest)?,
    }
    Ok(command)
}

fn manifest_for(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

fn write_manifest(command: &Command, outcome: RunOutcome, started: Instant) -> Result<(), CliError> {
    let mut inputs = BTreeMap::new();
    for p in &outcome.inputs {
        let digest = sha256_file(p).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
        inputs.insert(p.display().to_string(), digest);
    }
    let (name, args) = match serde_json::to_value(command).expect("arguments serialize") {
        Value::Object(m) if m.len() == 1 => m.into_iter().next().unwrap(),
        _ => unreachable!("externally tagged enum"),
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: name,
        args,
        seeds: outcome.seeds,
        inputs,
        outputs: outcome
            .outputs
            .into_iter()
            .map(|(p, d)| (p.display().to_string(), d))
            .collect(),
        duration_ms: started.elapsed().as_millis() as u64,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write_out(&outcome.manifest_path, text.as_bytes())?;
    eprintln!("manifest: {}", outcome.manifest_path.display());
    Ok(())
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<String, CliError> {
    write_atomic(path, bytes).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
    Ok(sha256_hex(bytes))
}

fn validate_split(train_fraction: f64, seed: u64) -> Result<SplitConfig, CliError> {
    let cfg = SplitConfig {
        train_fraction,
        seed,
    };
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn cmd_train(a: &TrainArgs) -> Result<RunOutcome, CliError> {
    let split_cfg = validate_split(a.train_fraction, a.seed)?;
    let train_cfg = TrainConfig {
        lambda: a.lambda,
        epochs: a.epochs,
        seed: a.seed,
        average_weights: true,
    };
    train_cfg.validate().map_err(usage)?;
    if a.task == Task::Sarcasm && a.test_data.is_none() {
        return Err(usage(
            "the sarcasm task trains on the whole --data file; pass the held-out file with --test-data",
        ));
    }
    a.data.source_for(&a.data.data)?;
    let tfidf = TfidfOptions {
        l2_normalize: !a.no_l2_norm,
        idf_mode: if a.tfidf_compat { IdfMode::Smooth } else { IdfMode::Plain },
    };

    let data = a.data.load(&a.data.data, Some(a.task))?;
    let mut inputs = vec![a.data.data.clone()];
    let (train, test) = match &a.test_data {
        Some(path) => {
            inputs.push(path.clone());
            if data.is_empty() {
                return Err(runtime(format!("{}: dataset is empty", a.data.data.display())));
            }
            (data, a.data.load(path, Some(a.task))?)
        }
        None => corpus::split(&data, &split_cfg)
            .map_err(|e| runtime(format!("{}: {e}", a.data.data.display())))?,
    };

    let pipeline = ClassifierPipeline::fit(a.task.name(), &train, &train_cfg, tfidf).map_err(runtime)?;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "task: {}  train: {}  test: {}  vocabulary: {}",
        a.task.name(),
        train.len(),
        test.len(),
        pipeline.vectorizer.dim()
    );
    if test.is_empty() {
        eprintln!("warning: held-out set is empty; no evaluation report");
    } else {
        let (cm, report) = pipeline.evaluate(&test).map_err(runtime)?;
        let _ = writeln!(out, "\nconfusion matrix (rows: true, columns: predicted)\n{cm}");
        let _ = writeln!(out, "{report}");
    }
    drop(out);

    let digest = write_out(&a.out, &pipeline.to_bytes())?;
    eprintln!("model: {}", a.out.display());
    let seeds = [("split".to_string(), a.seed), ("solver".to_string(), a.seed)]
        .into_iter()
        .collect();
    Ok(RunOutcome {
        inputs,
        outputs: vec![(a.out.clone(), digest)],
        seeds,
        manifest_path: manifest_for(&a.out),
    })
}

fn cmd_eval(a: &EvalArgs) -> Result<RunOutcome, CliError> {
    let split_cfg = validate_split(a.train_fraction, a.seed)?;
    a.data.source_for(&a.data.data)?;
    let pipeline = ClassifierPipeline::load(&a.model)
        .map_err(|e| runtime(format!("{}: {e}", a.model.display())))?;
    let mut data = a.data.load(&a.data.data, None)?;
    data.label_names = pipeline.label_names.clone();
    if a.holdout {
        data = corpus::split(&data, &split_cfg)
            .map_err(|e| runtime(format!("{}: {e}", a.data.data.display())))?
            .1;
    }
    if data.is_empty() {
        return Err(runtime(format!(
            "{}: no labeled rows to evaluate (empty input)",
            a.data.data.display()
        )));
    }
    let (cm, report) = pipeline.evaluate(&data).map_err(runtime)?;
    println!("confusion matrix (rows: true, columns: predicted)\n{cm}");
    println!("{report}");

    let metrics = json!({
        "task": pipeline.task_name,
        "examples": data.len(),
        "confusion_matrix": cm,
        "report": report,
    });
    let text = serde_json::to_string_pretty(&metrics).expect("metrics serialize") + "\n";
    let digest = write_out(&a.out, text.as_bytes())?;
    eprintln!("metrics: {}", a.out.display());
    let mut seeds = BTreeMap::new();
    if a.holdout {
        seeds.insert("split".to_string(), a.seed);
    }
    Ok(RunOutcome {
        inputs: vec![a.model.clone(), a.data.data.clone()],
        outputs: vec![(a.out.clone(), digest)],
        seeds,
        manifest_path: manifest_for(&a.out),
    })
}

/// Columns appended to each corpus row.
pub const ANNOTATION_COLUMNS: [&str; 4] =
    ["pred_sentiment", "pred_sarcastic", "effective_sentiment", "parties"];

fn annotated_bytes(corpus: &Corpus, tweets: &[analysis::AnnotatedTweet]) -> Result<Vec<u8>, CliError> {
    let cells = |t: &analysis::AnnotatedTweet| {
        [
            t.sentiment.to_string(),
            t.sarcastic.to_string(),
            t.effective_sentiment.to_string(),
            t.parties.iter().cloned().collect::<Vec<_>>().join(";"),
        ]
    };
    match corpus.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = corpus.header.clone().unwrap_or_default();
            header.extend(ANNOTATION_COLUMNS.iter().map(|s| s.to_string()));
            w.write_record(&header).map_err(runtime)?;
            for (row, t) in corpus.rows.iter().zip(tweets) {
                let RawRow::Csv(fields) = row else {
                    unreachable!("CSV corpus holds CSV rows")
                };
                let mut record = fields.clone();
                record.extend(cells(t));
                w.write_record(&record).map_err(runtime)?;
            }
            w.into_inner().map_err(runtime)
        }
        Format::Jsonl => {
            let mut out = Vec::new();
            for (row, t) in corpus.rows.iter().zip(tweets) {
                let RawRow::Json(fields) = row else {
                    unreachable!("JSONL corpus holds JSON rows")
                };
                let mut obj: Map<String, Value> = fields.clone();
                obj.insert("pred_sentiment".into(), json!(t.sentiment));
                obj.insert("pred_sarcastic".into(), json!(t.sarcastic));
                obj.insert("effective_sentiment".into(), json!(t.effective_sentiment));
                obj.insert("parties".into(), json!(t.parties));
                serde_json::to_writer(&mut out, &obj).map_err(runtime)?;
                out.push(b'\n');
            }
            Ok(out)
        }
    }
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<RunOutcome, CliError> {
    let format = a.format.map(Format::from).unwrap_or_else(|| Format::from_path(&a.data));
    let parties = match &a.party_config {
        Some(p) => PartyConfig::load(p).map_err(|e| match e {
            AnalysisError::InvalidPartyConfig(m) => {
                usage(format!("{}: invalid party configuration: {m}", p.display()))
            }
            other => runtime(other),
        })?,
        None => PartyConfig::default(),
    };
    let load_model = |p: &Path| {
        ClassifierPipeline::load(p).map_err(|e| runtime(format!("{}: {e}", p.display())))
    };
    let sentiment = load_model(&a.sentiment_model)?;
    let sarcasm = load_model(&a.sarcasm_model)?;
    let corpus = corpus::load_corpus(&a.data, format, &a.text_field)
        .map_err(|e| runtime(format!("{}: {e}", a.data.display())))?;
    if corpus.skipped > 0 {
        eprintln!("note: {} rows without text skipped", corpus.skipped);
    }

    let tweets = analysis::annotate(&corpus.records, &sentiment, &sarcasm, &parties)
        .map_err(|e| runtime(format!("{}: {e}", a.data.display())))?;
    let raw = analysis::aggregate(&tweets, &parties, Mode::Raw).map_err(runtime)?;
    let adjusted = analysis::aggregate(&tweets, &parties, Mode::SarcasmAdjusted).map_err(runtime)?;
    let (unattributed, multi) = analysis::attribution_summary(&tweets);
    let report = analysis::build_report(&raw, &adjusted, Some(unattributed));

    // Build every output in memory first so a failure leaves nothing behind.
    let annotated_name = match format {
        Format::Csv => "annotated.csv",
        Format::Jsonl => "annotated.jsonl",
    };
    let mut files: Vec<(String, Vec<u8>)> = vec![(annotated_name.into(), annotated_bytes(&corpus, &tweets)?)];
    let mut results = serde_json::to_value(&report).expect("report serializes");
    results["unattributed"] = json!(unattributed);
    results["multi_attributed"] = json!(multi);
    results["parties"] = json!(parties.parties);
    results["charts"] = report
        .charts
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "title": c.title,
                "svg": c.svg_file_name(),
                "data": c.data_file_name(),
            })
        })
        .collect();
    files.push((
        "results.json".into(),
        (serde_json::to_string_pretty(&results).expect("results serialize") + "\n").into_bytes(),
    ));
    for c in &report.charts {
        files.push((c.svg_file_name(), c.to_svg().into_bytes()));
        files.push((c.data_file_name(), c.to_data().into_bytes()));
    }

    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| runtime(format!("cannot create {}: {e}", a.out_dir.display())))?;
    let mut written: Vec<(PathBuf, String)> = Vec::new();
    for (name, bytes) in &files {
        let path = a.out_dir.join(name);
        match write_out(&path, bytes) {
            Ok(d) => written.push((path, d)),
            Err(e) => {
                for (p, _) in &written {
                    let _ = std::fs::remove_file(p);
                }
                return Err(e);
            }
        }
    }

    let mut summary = report.to_string();
    let _ = writeln!(
        summary,
        "\nUnattributed tweets: {unattributed}   Tweets matching several parties: {multi}"
    );
    print!("{summary}");
    eprintln!("outputs: {}", a.out_dir.display());

    let mut inputs = vec![a.data.clone(), a.sentiment_model.clone(), a.sarcasm_model.clone()];
    inputs.extend(a.party_config.clone());
    Ok(RunOutcome {
        inputs,
        outputs: written,
        seeds: BTreeMap::new(),
        manifest_path: a.out_dir.join("manifest.json"),
    })
}

fn replay(manifest_path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| runtime(format!("{}: {e}", manifest_path.display())))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| runtime(format!("{}: not a run manifest: {e}", manifest_path.display())))?;
    let mut tagged = Map::new();
    tagged.insert(manifest.command.clone(), manifest.args.clone());
    let command: Command = serde_json::from_value(Value::Object(tagged))
        .map_err(|e| runtime(format!("{}: unusable arguments: {e}", manifest_path.display())))?;
    if matches!(command, Command::Replay(_)) {
        return Err(runtime("a manifest cannot record a replay"));
    }
    for (path, digest) in &manifest.inputs {
        let now = sha256_file(Path::new(path)).map_err(|e| runtime(format!("{path}: {e}")))?;
        if &now != digest {
            return Err(runtime(format!("input {path} changed since the recorded run")));
        }
    }
    run(command)?;
    let mut mismatched = Vec::new();
    for (path, digest) in &manifest.outputs {
        match sha256_file(Path::new(path)) {
            Ok(d) if &d == digest => {}
            _ => mismatched.push(path.clone()),
        }
    }
    if mismatched.is_empty() {
        eprintln!("replay: {} outputs byte-identical", manifest.outputs.len());
        Ok(())
    } else {
        Err(runtime(format!("replay produced different outputs: {}", mismatched.join(", "))))
    }
}
