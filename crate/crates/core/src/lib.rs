//! Sentiment and sarcasm classification of election tweets with TF-IDF
//! features and a linear SVM, plus per-party polarity aggregation.

pub mod analysis;
pub mod chart;
pub mod cli;
pub mod corpus;
pub mod fsutil;
pub mod hexfloat;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod svm;
pub mod textprep;
pub mod tfidf;

pub use corpus::{Format, LabeledDataset, SplitConfig, TextRecord};
pub use pipeline::ClassifierPipeline;
pub use svm::{LinearModel, TrainConfig};
pub use tfidf::{FittedVectorizer, IdfMode, SparseVector, TfidfOptions};
