//! Text → TF-IDF → linear SVM, fitted as one unit and stored as one file.
//!
//! # Model file
//!
//! A JSON document:
//!
//! ```text
//! {
//!   "format": "tweetlens-model",
//!   "format_version": 1,
//!   "checksum": "sha256:<hex of the compact, key-sorted `model` object>",
//!   "model": {
//!     "task_name": "sentiment",
//!     "label_names": ["negative", "positive"],
//!     "tfidf": { "n_docs": 1120, "l2_normalize": true, "idf_mode": "plain" },
//!     "vocabulary": [["good", 57], ["movie", 212], ...],   // [term, df], index = position
//!     "weights": ["0x1.3f7ced916872bp-2", ...],            // hex floats, one per term
//!     "bias": "-0x1.0624dd2f1a9fcp-10",
//!     "train_config": { "lambda": "0x1.a36e2eb1c432dp-14", "epochs": 10,
//!                       "seed": 42, "average_weights": true }
//!   }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::corpus::LabeledDataset;
use crate::fsutil::{sha256_hex, write_atomic};
use crate::hexfloat;
use crate::metrics::{
    classification_report_named, confusion_matrix, ClassificationReport, ConfusionMatrix,
    MetricsError,
};
use crate::svm::{self, LinearModel, SvmError, TrainConfig};
use crate::textprep::TokenStream;
use crate::tfidf::{FittedVectorizer, IdfMode, TfidfError, TfidfOptions};

pub const FORMAT_TAG: &str = "tweetlens-model";
pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Tfidf(#[from] TfidfError),
    #[error(transparent)]
    Svm(#[from] SvmError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported model format version {found} (this build reads version {FORMAT_VERSION})")]
    VersionMismatch { found: u64 },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
}

/// A fitted vectorizer and classifier for one binary task.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierPipeline {
    pub task_name: String,
    pub label_names: [String; 2],
    pub vectorizer: FittedVectorizer,
    pub model: LinearModel,
}

impl ClassifierPipeline {
    /// Fit the vectorizer on the training texts, then train the SVM on their
    /// encodings.
    pub fn fit(
        task_name: &str,
        train: &LabeledDataset,
        cfg: &TrainConfig,
        tfidf: TfidfOptions,
    ) -> Result<Self, PipelineError> {
        let docs: Vec<TokenStream> = train.texts().map(TokenStream::from_text).collect();
        let vectorizer = FittedVectorizer::fit(&docs, tfidf)?;
        let x = vectorizer.transform_all(&docs);
        let model = svm::train(&x, &train.labels(), cfg)?;
        Ok(ClassifierPipeline {
            task_name: task_name.to_string(),
            label_names: train.label_names.clone(),
            vectorizer,
            model,
        })
    }

    pub fn decision(&self, text: &str) -> f64 {
        let x = self.vectorizer.transform(&TokenStream::from_text(text));
        self.model
            .decision(&x)
            .expect("vectorizer and model dimensions agree by construction")
    }

    /// Class of `text`. A text that encodes to the zero vector (nothing in
    /// the vocabulary carries weight) is class 0 whatever the bias.
    pub fn predict(&self, text: &str) -> u8 {
        let x = self.vectorizer.transform(&TokenStream::from_text(text));
        if x.is_zero() {
            return 0;
        }
        self.model
            .predict(&x)
            .expect("vectorizer and model dimensions agree by construction")
    }

    pub fn predict_texts<S: AsRef<str>>(&self, texts: &[S]) -> Vec<u8> {
        texts.iter().map(|t| self.predict(t.as_ref())).collect()
    }

    /// Predict a labeled dataset and summarize against its labels.
    pub fn evaluate(
        &self,
        data: &LabeledDataset,
    ) -> Result<(ConfusionMatrix, ClassificationReport), PipelineError> {
        let predicted: Vec<u8> = data.texts().map(|t| self.predict(t)).collect();
        let cm = confusion_matrix(&data.labels(), &predicted)?;
        let report = classification_report_named(&cm, self.label_names.clone())?;
        Ok((cm, report))
    }

    fn payload(&self) -> Value {
        let v = &self.vectorizer;
        let opts = v.options();
        let cfg = &self.model.config;
        json!({
            "task_name": self.task_name,
            "label_names": self.label_names,
            "tfidf": {
                "n_docs": v.n_docs(),
                "l2_normalize": opts.l2_normalize,
                "idf_mode": opts.idf_mode,
            },
            "vocabulary": v.terms().iter().zip(v.doc_frequencies())
                .map(|(t, df)| json!([t, df]))
                .collect::<Vec<_>>(),
            "weights": self.model.weights.iter().map(|&w| hexfloat::format(w)).collect::<Vec<_>>(),
            "bias": hexfloat::format(self.model.bias),
            "train_config": {
                "lambda": hexfloat::format(cfg.lambda),
                "epochs": cfg.epochs,
                "seed": cfg.seed,
                "average_weights": cfg.average_weights,
            },
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload();
        let checksum = sha256_hex(payload.to_string().as_bytes());
        let doc = json!({
            "format": FORMAT_TAG,
            "format_version": FORMAT_VERSION,
            "checksum": format!("sha256:{checksum}"),
            "model": payload,
        });
        let mut out = serde_json::to_vec_pretty(&doc).expect("json values always serialize");
        out.push(b'\n');
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, PipelineError> {
        let corrupt = |m: &str| PipelineError::CorruptModel(m.to_string());
        let doc: Value = serde_json::from_slice(bytes)
            .map_err(|e| PipelineError::CorruptModel(format!("not a complete JSON document: {e}")))?;
        if doc.get("format").and_then(Value::as_str) != Some(FORMAT_TAG) {
            return Err(corrupt("missing or wrong format tag"));
        }
        let version = doc
            .get("format_version")
            .and_then(Value::as_u64)
            .ok_or_else(|| corrupt("missing format_version"))?;
        if version != FORMAT_VERSION {
            return Err(PipelineError::VersionMismatch { found: version });
        }
        let payload = doc.get("model").ok_or_else(|| corrupt("missing model"))?;
        let stored = doc
            .get("checksum")
            .and_then(Value::as_str)
            .and_then(|c| c.strip_prefix("sha256:"))
            .ok_or_else(|| corrupt("missing checksum"))?;
        if sha256_hex(payload.to_string().as_bytes()) != stored {
            return Err(corrupt("checksum mismatch"));
        }
        let stored: StoredModel = serde_json::from_value(payload.clone())
            .map_err(|e| PipelineError::CorruptModel(e.to_string()))?;
        stored.into_pipeline()
    }

    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        write_atomic(path, &self.to_bytes()).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let bytes = std::fs::read(path).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

#[derive(Deserialize, Serialize)]
struct StoredTfidf {
    n_docs: u64,
    l2_normalize: bool,
    idf_mode: IdfMode,
}

#[derive(Deserialize, Serialize)]
struct StoredConfig {
    lambda: String,
    epochs: usize,
    seed: u64,
    average_weights: bool,
}

#[derive(Deserialize, Serialize)]
struct StoredModel {
    task_name: String,
    label_names: [String; 2],
    tfidf: StoredTfidf,
    vocabulary: Vec<(String, u64)>,
    weights: Vec<String>,
    bias: String,
    train_config: StoredConfig,
}

impl StoredModel {
    fn into_pipeline(self) -> Result<ClassifierPipeline, PipelineError> {
        let corrupt = |m: String| PipelineError::CorruptModel(m);
        let float = |s: &str| hexfloat::parse(s).ok_or_else(|| corrupt(format!("bad float `{s}`")));
        if self.weights.len() != self.vocabulary.len() {
            return Err(corrupt(format!(
                "{} weights for {} vocabulary terms",
                self.weights.len(),
                self.vocabulary.len()
            )));
        }
        let n_docs = self.tfidf.n_docs;
        if n_docs == 0 {
            return Err(corrupt("n_docs is zero".into()));
        }
        let mut terms = Vec::with_capacity(self.vocabulary.len());
        let mut df = Vec::with_capacity(self.vocabulary.len());
        let mut seen = std::collections::HashSet::new();
        for (term, d) in self.vocabulary {
            if d == 0 || d > n_docs {
                return Err(corrupt(format!("df {d} of `{term}` outside 1..={n_docs}")));
            }
            if !seen.insert(term.clone()) {
                return Err(corrupt(format!("duplicate vocabulary term `{term}`")));
            }
            terms.push(term);
            df.push(d);
        }
        let weights = self
            .weights
            .iter()
            .map(|w| float(w))
            .collect::<Result<Vec<_>, _>>()?;
        let config = TrainConfig {
            lambda: float(&self.train_config.lambda)?,
            epochs: self.train_config.epochs,
            seed: self.train_config.seed,
            average_weights: self.train_config.average_weights,
        };
        let options = TfidfOptions {
            l2_normalize: self.tfidf.l2_normalize,
            idf_mode: self.tfidf.idf_mode,
        };
        Ok(ClassifierPipeline {
            task_name: self.task_name,
            label_names: self.label_names,
            vectorizer: FittedVectorizer::from_parts(terms, df, n_docs, options),
            model: LinearModel::new(weights, float(&self.bias)?, config),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TextRecord;

    pub(crate) fn toy() -> LabeledDataset {
        let good = ["good film", "good plot", "good acting", "really good", "good fun", "so good"];
        let bad = ["bad film", "bad plot", "bad acting", "really bad", "bad fun", "so bad"];
        let mut records = Vec::new();
        for (i, (g, b)) in good.iter().zip(&bad).enumerate() {
            records.push(TextRecord::labeled(format!("g{i}"), *g, 1));
            records.push(TextRecord::labeled(format!("b{i}"), *b, 0));
        }
        LabeledDataset::new(records, ["negative".into(), "positive".into()])
    }

    fn fitted() -> ClassifierPipeline {
        ClassifierPipeline::fit("sentiment", &toy(), &TrainConfig::default(), TfidfOptions::default())
            .unwrap()
    }

    #[test]
    fn toy_corpus_generalizes() {
        let p = fitted();
        assert_eq!(p.predict_texts(&["good movie", "bad movie"]), vec![1, 0]);
        assert_eq!(p.predict("Good!! #good"), 1);
    }

    #[test]
    fn empty_batch_and_oov() {
        let p = fitted();
        assert!(p.predict_texts::<&str>(&[]).is_empty());
        assert_eq!(p.decision("zzz qqq"), p.model.bias);
        let mut biased = p.clone();
        biased.model.bias = 5.0;
        assert_eq!(biased.predict("zzz qqq"), 0);
        assert_eq!(biased.predict(""), 0);
    }

    #[test]
    fn refit_is_byte_identical() {
        assert_eq!(fitted().to_bytes(), fitted().to_bytes());
    }

    #[test]
    fn single_class_is_rejected() {
        let mut d = toy();
        d.records.retain(|r| r.label == Some(1));
        let err = ClassifierPipeline::fit("s", &d, &TrainConfig::default(), TfidfOptions::default())
            .unwrap_err();
        assert!(matches!(err, PipelineError::Svm(SvmError::SingleClassData(1))));
    }

    #[test]
    fn bytes_round_trip() {
        let p = fitted();
        let q = ClassifierPipeline::from_bytes(&p.to_bytes()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn truncation_and_tampering_are_corrupt() {
        let bytes = fitted().to_bytes();
        let cut = &bytes[..bytes.len() / 2];
        assert!(matches!(
            ClassifierPipeline::from_bytes(cut),
            Err(PipelineError::CorruptModel(_))
        ));

        let text = String::from_utf8(bytes).unwrap();
        let tampered = text.replacen("\"seed\": 42", "\"seed\": 43", 1);
        assert_ne!(tampered, text);
        assert!(matches!(
            ClassifierPipeline::from_bytes(tampered.as_bytes()),
            Err(PipelineError::CorruptModel(m)) if m.contains("checksum")
        ));
    }

    #[test]
    fn other_version_is_rejected() {
        let text = String::from_utf8(fitted().to_bytes()).unwrap();
        let v2 = text.replacen("\"format_version\": 1", "\"format_version\": 2", 1);
        assert!(matches!(
            ClassifierPipeline::from_bytes(v2.as_bytes()),
            Err(PipelineError::VersionMismatch { found: 2 })
        ));
    }

    #[test]
    fn prediction_leaves_vocabulary_untouched() {
        let p = fitted();
        let before = p.vectorizer.clone();
        let _ = p.predict_texts(&["brand new words here", "good unseen"]);
        assert_eq!(p.vectorizer, before);
        assert_eq!(p.vectorizer.index_of("unseen"), None);
    }

    #[test]
    fn evaluate_on_training_data() {
        let p = fitted();
        let (cm, report) = p.evaluate(&toy()).unwrap();
        assert_eq!(cm.total(), 12);
        assert_eq!(report.accuracy, 1.0);
    }
}
