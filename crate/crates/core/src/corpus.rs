//! Loading labeled training data and the unlabeled tweet corpus, plus the
//! seeded train/test split.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::rng::Pcg32;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("field `{0}` not present in input")]
    UnknownField(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid split configuration: {0}")]
    InvalidSplit(String),
}

/// On-disk record layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Guess from the file extension; anything that is not `.jsonl`/`.json` is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => Format::Jsonl,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" | "ndjson" => Ok(Format::Jsonl),
            other => Err(format!("unknown format `{other}` (expected csv or jsonl)")),
        }
    }
}

/// Engagement counters of a tweet. A missing column stays `None`; it is never
/// coerced to zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Engagement {
    pub quote_count: Option<u64>,
    pub reply_count: Option<u64>,
    pub retweet_count: Option<u64>,
    pub favorite_count: Option<u64>,
}

/// A single document or tweet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextRecord {
    pub id: String,
    pub text: String,
    pub label: Option<u8>,
    pub created_at: Option<String>,
    pub last_updated: Option<String>,
    pub engagement: Engagement,
}

impl TextRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        TextRecord {
            id: id.into(),
            text: text.into(),
            label: None,
            created_at: None,
            last_updated: None,
            engagement: Engagement::default(),
        }
    }

    pub fn labeled(id: impl Into<String>, text: impl Into<String>, label: u8) -> Self {
        assert!(label <= 1, "labels are binary");
        TextRecord {
            label: Some(label),
            ..TextRecord::new(id, text)
        }
    }
}

/// Records that all carry a binary label, in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub records: Vec<TextRecord>,
    pub label_names: [String; 2],
    /// Rows dropped during ingestion (empty text or unmappable label).
    pub skipped: usize,
}

impl LabeledDataset {
    pub fn new(records: Vec<TextRecord>, label_names: [String; 2]) -> Self {
        debug_assert!(records.iter().all(|r| r.label.is_some()));
        LabeledDataset {
            records,
            label_names,
            skipped: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.text.as_str())
    }

    pub fn labels(&self) -> Vec<u8> {
        self.records
            .iter()
            .map(|r| r.label.expect("labeled dataset record without label"))
            .collect()
    }
}

/// Field names and label mapping for [`load_labeled`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSource {
    pub format: Format,
    pub text_field: String,
    pub label_field: String,
    /// Raw label string → class. Values not in the map cause the row to be skipped.
    pub label_map: BTreeMap<String, u8>,
}

impl Default for LabeledSource {
    fn default() -> Self {
        LabeledSource {
            format: Format::Csv,
            text_field: "text".into(),
            label_field: "label".into(),
            label_map: [("0".to_string(), 0u8), ("1".to_string(), 1u8)]
                .into_iter()
                .collect(),
        }
    }
}

/// Parse `"0=0,4=1"` into a label map.
pub fn parse_label_map(spec: &str) -> Result<BTreeMap<String, u8>, String> {
    let mut map = BTreeMap::new();
    for pair in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (raw, class) = pair
            .split_once('=')
            .ok_or_else(|| format!("label map entry `{pair}` is not of the form raw=class"))?;
        let class: u8 = match class.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(format!("label map class `{other}` must be 0 or 1")),
        };
        map.insert(raw.trim().to_string(), class);
    }
    if map.is_empty() {
        return Err("label map is empty".into());
    }
    Ok(map)
}

/// One raw input row, kept so annotated output can reproduce the original columns.
#[derive(Debug, Clone, PartialEq)]
pub enum RawRow {
    Csv(Vec<String>),
    Json(serde_json::Map<String, Value>),
}

/// Unlabeled tweets plus the raw rows they came from (parallel vectors).
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub format: Format,
    /// CSV header, `None` for JSONL.
    pub header: Option<Vec<String>>,
    pub records: Vec<TextRecord>,
    pub rows: Vec<RawRow>,
    pub skipped: usize,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn open(path: &Path) -> Result<File, CorpusError> {
    File::open(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CorpusError::FileNotFound(path.to_path_buf())
        } else {
            CorpusError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })
}

/// Uniform view over a CSV record or a JSON object.
trait FieldSource {
    fn get(&self, field: &str) -> Option<String>;
}

struct CsvView<'a> {
    columns: &'a BTreeMap<String, usize>,
    record: &'a [String],
}

impl FieldSource for CsvView<'_> {
    fn get(&self, field: &str) -> Option<String> {
        self.columns
            .get(field)
            .and_then(|&i| self.record.get(i))
            .map(|s| s.to_string())
    }
}

impl FieldSource for serde_json::Map<String, Value> {
    fn get(&self, field: &str) -> Option<String> {
        match self.get(field)? {
            Value::Null => None,
            Value::String(s) => Some(s.clone()),
            Value::Bool(b) => Some(b.to_string()),
            Value::Number(n) => Some(n.to_string()),
            other => Some(other.to_string()),
        }
    }
}

fn non_empty(s: Option<String>) -> Option<String> {
    s.filter(|v| !v.trim().is_empty())
}

fn count(s: Option<String>) -> Option<u64> {
    let s = non_empty(s)?;
    let t = s.trim();
    t.parse::<u64>().ok().or_else(|| {
        // Some exports write counts as floats ("5.0").
        t.parse::<f64>()
            .ok()
            .filter(|v| *v >= 0.0 && v.fract() == 0.0 && *v <= u64::MAX as f64)
            .map(|v| v as u64)
    })
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CorpusError> {
    let file = open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(BufReader::new(file));
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CorpusError::MalformedRow {
            row: 0,
            reason: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_string())
        .collect();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CorpusError::MalformedRow {
            row: i + 1,
            reason: e.to_string(),
        })?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

fn read_jsonl(path: &Path) -> Result<Vec<serde_json::Map<String, Value>>, CorpusError> {
    let file = open(path)?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Value>(&line) {
            Ok(Value::Object(map)) => out.push(map),
            Ok(_) => {
                return Err(CorpusError::MalformedRow {
                    row: i + 1,
                    reason: "line is not a JSON object".into(),
                })
            }
            Err(e) => {
                return Err(CorpusError::MalformedRow {
                    row: i + 1,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

fn column_index(header: &[String]) -> BTreeMap<String, usize> {
    header
        .iter()
        .enumerate()
        .map(|(i, h)| (h.clone(), i))
        .collect()
}

/// Load a labeled dataset. Rows with empty text or a label outside the map
/// are skipped and counted in [`LabeledDataset::skipped`].
pub fn load_labeled(path: &Path, source: &LabeledSource) -> Result<LabeledDataset, CorpusError> {
    let mut records = Vec::new();
    let mut skipped = 0usize;
    let mut push = |row: usize, view: &dyn FieldSource| {
        let text = non_empty(view.get(&source.text_field));
        let label = view
            .get(&source.label_field)
            .and_then(|raw| source.label_map.get(raw.trim()).copied());
        match (text, label) {
            (Some(text), Some(label)) => {
                let id = view.get("id").unwrap_or_else(|| row.to_string());
                records.push(TextRecord::labeled(id, text, label));
            }
            _ => skipped += 1,
        }
    };

    match source.format {
        Format::Csv => {
            let (header, rows) = read_csv(path)?;
            for f in [&source.text_field, &source.label_field] {
                if !header.iter().any(|h| h == f) {
                    return Err(CorpusError::UnknownField(f.clone()));
                }
            }
            let columns = column_index(&header);
            for (i, rec) in rows.iter().enumerate() {
                push(
                    i + 1,
                    &CsvView {
                        columns: &columns,
                        record: rec,
                    },
                );
            }
        }
        Format::Jsonl => {
            let rows = read_jsonl(path)?;
            for f in [&source.text_field, &source.label_field] {
                if !rows.is_empty() && !rows.iter().any(|r| r.contains_key(f.as_str())) {
                    return Err(CorpusError::UnknownField(f.clone()));
                }
            }
            for (i, rec) in rows.iter().enumerate() {
                push(i + 1, rec);
            }
        }
    }

    Ok(LabeledDataset {
        records,
        label_names: ["negative".into(), "positive".into()],
        skipped,
    })
}

/// Load the unlabeled corpus. `text_field` is normally `full_text`; the id is
/// read from `tweet_id` when present and otherwise falls back to the row number.
pub fn load_corpus(path: &Path, format: Format, text_field: &str) -> Result<Corpus, CorpusError> {
    fn record_from(row: usize, view: &dyn FieldSource, text: String) -> TextRecord {
        TextRecord {
            id: non_empty(view.get("tweet_id")).unwrap_or_else(|| row.to_string()),
            text,
            label: None,
            created_at: non_empty(view.get("created_at")),
            last_updated: non_empty(view.get("last_updated")),
            engagement: Engagement {
                quote_count: count(view.get("quote_count")),
                reply_count: count(view.get("reply_count")),
                retweet_count: count(view.get("retweet_count")),
                favorite_count: count(view.get("favorite_count")),
            },
        }
    }

    let mut records = Vec::new();
    let mut kept = Vec::new();
    let mut skipped = 0;
    let header = match format {
        Format::Csv => {
            let (header, rows) = read_csv(path)?;
            if !header.iter().any(|h| h == text_field) {
                return Err(CorpusError::UnknownField(text_field.to_string()));
            }
            let columns = column_index(&header);
            for (i, rec) in rows.into_iter().enumerate() {
                let view = CsvView {
                    columns: &columns,
                    record: &rec,
                };
                match non_empty(view.get(text_field)) {
                    Some(text) => {
                        records.push(record_from(i + 1, &view, text));
                        kept.push(RawRow::Csv(rec));
                    }
                    None => skipped += 1,
                }
            }
            Some(header)
        }
        Format::Jsonl => {
            let rows = read_jsonl(path)?;
            if !rows.is_empty() && !rows.iter().any(|r| r.contains_key(text_field)) {
                return Err(CorpusError::UnknownField(text_field.to_string()));
            }
            for (i, rec) in rows.into_iter().enumerate() {
                match non_empty(FieldSource::get(&rec, text_field)) {
                    Some(text) => {
                        records.push(record_from(i + 1, &rec, text));
                        kept.push(RawRow::Json(rec));
                    }
                    None => skipped += 1,
                }
            }
            None
        }
    };

    Ok(Corpus {
        format,
        header,
        records,
        rows: kept,
        skipped,
    })
}

/// Train/test split parameters. Defaults: 70% train, seed 42.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train_fraction: 0.7,
            seed: 42,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if !(self.train_fraction > 0.0 && self.train_fraction <= 1.0) {
            return Err(CorpusError::InvalidSplit(format!(
                "train fraction {} is outside (0, 1]",
                self.train_fraction
            )));
        }
        Ok(())
    }

    /// Number of training records for a dataset of size `n` (round half up).
    pub fn train_size(&self, n: usize) -> usize {
        let exact = self.train_fraction * n as f64;
        ((exact + 0.5).floor() as usize).min(n)
    }
}

/// Seeded shuffle-then-cut split. Both halves keep the shuffled order.
pub fn split(
    dataset: &LabeledDataset,
    cfg: &SplitConfig,
) -> Result<(LabeledDataset, LabeledDataset), CorpusError> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(CorpusError::EmptyDataset);
    }
    let n = dataset.len();
    let order = Pcg32::new(cfg.seed).permutation(n);
    let cut = cfg.train_size(n);
    let take = |idx: &[usize]| LabeledDataset {
        records: idx.iter().map(|&i| dataset.records[i].clone()).collect(),
        label_names: dataset.label_names.clone(),
        skipped: 0,
    };
    Ok((take(&order[..cut]), take(&order[cut..])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    fn dataset(n: usize) -> LabeledDataset {
        LabeledDataset::new(
            (0..n)
                .map(|i| TextRecord::labeled(i.to_string(), format!("doc {i}"), (i % 2) as u8))
                .collect(),
            ["neg".into(), "pos".into()],
        )
    }

    #[test]
    fn csv_with_label_map() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "text,target\n\"great day\",4\nawful,0\n");
        let src = LabeledSource {
            label_field: "target".into(),
            label_map: parse_label_map("4=1,0=0").unwrap(),
            ..Default::default()
        };
        let ds = load_labeled(&p, &src).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels(), vec![1, 0]);
        assert_eq!(ds.records[0].text, "great day");
        assert_eq!(ds.skipped, 0);
    }

    #[test]
    fn empty_text_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "text,label\n\"\",1\n");
        let ds = load_labeled(&p, &LabeledSource::default()).unwrap();
        assert_eq!(ds.len(), 0);
        assert_eq!(ds.skipped, 1);
    }

    #[test]
    fn unmappable_label_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "text,label\nfine,1\nodd,2\nok,0\n");
        let ds = load_labeled(&p, &LabeledSource::default()).unwrap();
        assert_eq!(ds.len() + ds.skipped, 3);
        assert_eq!(ds.skipped, 1);
    }

    #[test]
    fn quoted_csv_fields() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.csv",
            "text,label\n\"hello, \"\"world\"\"\nline two\",1\n",
        );
        let ds = load_labeled(&p, &LabeledSource::default()).unwrap();
        assert_eq!(ds.records[0].text, "hello, \"world\"\nline two");
    }

    #[test]
    fn missing_file() {
        let err = load_labeled(Path::new("/no/such/file.csv"), &LabeledSource::default())
            .unwrap_err();
        assert!(matches!(err, CorpusError::FileNotFound(_)));
    }

    #[test]
    fn missing_field() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "body,label\nx,1\n");
        let err = load_labeled(&p, &LabeledSource::default()).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownField(f) if f == "text"));
    }

    #[test]
    fn ragged_csv_row_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.csv", "text,label\nx,1\ny,0,extra\n");
        let err = load_labeled(&p, &LabeledSource::default()).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRow { row: 2, .. }));
    }

    #[test]
    fn jsonl_numeric_labels_and_bad_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "a.jsonl",
            "{\"headline\":\"sure, great\",\"is_sarcastic\":1}\n{\"headline\":\"rain today\",\"is_sarcastic\":0}\n",
        );
        let src = LabeledSource {
            format: Format::Jsonl,
            text_field: "headline".into(),
            label_field: "is_sarcastic".into(),
            ..Default::default()
        };
        let ds = load_labeled(&p, &src).unwrap();
        assert_eq!(ds.labels(), vec![1, 0]);

        let bad = write(&dir, "b.jsonl", "{\"headline\":\"x\",\"is_sarcastic\":1}\n{oops\n");
        let err = load_labeled(&bad, &src).unwrap_err();
        assert!(matches!(err, CorpusError::MalformedRow { row: 2, .. }));
    }

    #[test]
    fn corpus_metadata_is_optional() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            &dir,
            "c.csv",
            "tweet_id,full_text,retweet_count\n11,vote!,5\n12,hello,\n",
        );
        let c = load_corpus(&p, Format::Csv, "full_text").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.records[0].text, "vote!");
        assert_eq!(c.records[0].engagement.retweet_count, Some(5));
        assert_eq!(c.records[0].engagement.quote_count, None);
        assert_eq!(c.records[1].engagement.retweet_count, None);
        assert_eq!(c.records[1].id, "12");
    }

    #[test]
    fn corpus_missing_text_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "c.csv", "tweet_id,text\n1,x\n");
        let err = load_corpus(&p, Format::Csv, "full_text").unwrap_err();
        assert!(matches!(err, CorpusError::UnknownField(f) if f == "full_text"));
    }

    #[test]
    fn split_sizes_seventy_thirty() {
        let (train, test) = split(&dataset(100), &SplitConfig::default()).unwrap();
        assert_eq!(train.len(), 70);
        assert_eq!(test.len(), 30);
        let mut ids: Vec<String> = train
            .records
            .iter()
            .chain(&test.records)
            .map(|r| r.id.clone())
            .collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 100);
    }

    #[test]
    fn split_full_fraction() {
        let cfg = SplitConfig {
            train_fraction: 1.0,
            seed: 42,
        };
        let (train, test) = split(&dataset(9), &cfg).unwrap();
        assert_eq!(train.len(), 9);
        assert!(test.is_empty());
    }

    #[test]
    fn split_is_deterministic_and_seed_sensitive() {
        let d = dataset(50);
        let a = split(&d, &SplitConfig::default()).unwrap();
        let b = split(&d, &SplitConfig::default()).unwrap();
        assert_eq!(a, b);
        let c = split(
            &d,
            &SplitConfig {
                seed: 43,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(c.0.len(), a.0.len());
        assert_ne!(c.0.records, a.0.records);
    }

    #[test]
    fn split_rejects_bad_inputs() {
        assert!(matches!(
            split(&dataset(0), &SplitConfig::default()),
            Err(CorpusError::EmptyDataset)
        ));
        let bad = SplitConfig {
            train_fraction: 0.0,
            seed: 1,
        };
        assert!(matches!(
            split(&dataset(3), &bad),
            Err(CorpusError::InvalidSplit(_))
        ));
    }

    #[test]
    fn round_half_up() {
        let cfg = SplitConfig {
            train_fraction: 0.5,
            seed: 0,
        };
        assert_eq!(cfg.train_size(3), 2);
        assert_eq!(cfg.train_size(1), 1);
        assert_eq!(SplitConfig::default().train_size(5), 4); // 3.5 -> 4
    }
}
