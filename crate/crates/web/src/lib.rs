//! WebAssembly bindings behind `www/index.html`.
//!
//! Three operations are exposed, each taking plain strings and returning a
//! JSON document for the page to render:
//!
//! * [`explain_text`] shows how a tweet is normalized, tokenized and weighted
//!   against a small reference corpus.
//! * [`train_and_classify`] trains a sentiment pipeline on labeled lines and
//!   scores query lines with it.
//! * [`party_charts`] turns per-party polarity counts into the summary tables
//!   and SVG charts produced by the command-line `analyze`.
//!
//! The logic lives in [`demo`] so it can be tested natively.

use wasm_bindgen::prelude::*;

pub mod demo;

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Normalization, tokens and TF-IDF weights of `text`, with the vectorizer
/// fitted on `corpus` (one document per line).
#[wasm_bindgen]
pub fn explain_text(text: &str, corpus: &str, l2_normalize: bool) -> Result<String, JsValue> {
    js(demo::explain_text(text, corpus, l2_normalize))
}

/// Train on `labeled` lines (`1 text` or `0 text`) and classify each line of
/// `queries`.
#[wasm_bindgen]
pub fn train_and_classify(
    labeled: &str,
    queries: &str,
    lambda: f64,
    epochs: u32,
) -> Result<String, JsValue> {
    js(demo::train_and_classify(labeled, queries, lambda, epochs as usize))
}

/// Tables and charts for `PARTY POS NEG` lines over a corpus of
/// `corpus_total` tweets.
#[wasm_bindgen]
pub fn party_charts(counts: &str, corpus_total: u32) -> Result<String, JsValue> {
    js(demo::party_charts(counts, corpus_total as u64))
}
