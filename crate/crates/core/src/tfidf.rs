//! TF-IDF vocabulary fitting and sparse document encoding.
//!
//! Weights are `tf(t, d) * idf(t)` with `tf` the raw count of `t` in `d` and
//! `idf(t) = ln(N / (df(t) + 1))`. That form goes to zero when a term occurs in
//! `N - 1` documents and is negative for terms present in every document; both
//! are kept as-is. [`IdfMode::Smooth`] switches to the common
//! `ln((1 + N) / (1 + df)) + 1` weighting instead.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textprep::TokenStream;

#[derive(Debug, Error, PartialEq)]
pub enum TfidfError {
    #[error("cannot fit a vectorizer on an empty corpus")]
    EmptyCorpus,
    #[error("term `{0}` is not in the vocabulary")]
    UnknownTerm(String),
}

/// Which inverse-document-frequency formula to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdfMode {
    /// `ln(N / (df + 1))`
    #[default]
    Plain,
    /// `ln((1 + N) / (1 + df)) + 1`
    Smooth,
}

impl IdfMode {
    pub fn idf(self, n_docs: u64, df: u64) -> f64 {
        let n = n_docs as f64;
        let df = df as f64;
        match self {
            IdfMode::Plain => (n / (df + 1.0)).ln(),
            IdfMode::Smooth => ((1.0 + n) / (1.0 + df)).ln() + 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TfidfOptions {
    pub l2_normalize: bool,
    pub idf_mode: IdfMode,
}

impl Default for TfidfOptions {
    fn default() -> Self {
        TfidfOptions {
            l2_normalize: true,
            idf_mode: IdfMode::Plain,
        }
    }
}

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
    dim: usize,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        SparseVector {
            entries: Vec::new(),
            dim,
        }
    }

    /// Build from arbitrary `(index, value)` pairs. Duplicate indices are
    /// summed and exact zeros dropped.
    ///
    /// Panics if an index is out of range.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut entries: Vec<(usize, f64)> = pairs.into_iter().collect();
        assert!(
            entries.iter().all(|&(i, _)| i < dim),
            "sparse index out of range for dim {dim}"
        );
        entries.sort_by_key(|&(i, _)| i);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (i, v) in entries {
            match merged.last_mut() {
                Some((j, acc)) if *j == i => *acc += v,
                _ => merged.push((i, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        SparseVector {
            entries: merged,
            dim,
        }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector::from_pairs(values.len(), values.iter().copied().enumerate())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> f64 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|k| self.entries[k].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            out[i] = v;
        }
        out
    }

    /// Sparse-dense dot product over stored entries only.
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    fn scale_to_unit(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for (_, v) in &mut self.entries {
                *v /= n;
            }
            self.entries.retain(|&(_, v)| v != 0.0);
        }
    }
}

/// Vocabulary with per-term document frequencies and corpus size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedVectorizer {
    terms: Vec<String>,
    df: Vec<u64>,
    n_docs: u64,
    options: TfidfOptions,
    #[serde(skip)]
    index: HashMap<String, usize>,
    #[serde(skip)]
    idf: Vec<f64>,
}

impl FittedVectorizer {
    /// Count document frequencies over `corpus`. Vocabulary indices follow
    /// first appearance.
    pub fn fit<'a, I>(corpus: I, options: TfidfOptions) -> Result<Self, TfidfError>
    where
        I: IntoIterator<Item = &'a TokenStream>,
    {
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut terms: Vec<String> = Vec::new();
        let mut df: Vec<u64> = Vec::new();
        // Per-term id of the last document that bumped its df.
        let mut last_doc: Vec<u64> = Vec::new();
        let mut n_docs = 0u64;
        for doc in corpus {
            n_docs += 1;
            for tok in doc.iter() {
                let id = match index.get(tok) {
                    Some(&id) => id,
                    None => {
                        let id = terms.len();
                        index.insert(tok.to_string(), id);
                        terms.push(tok.to_string());
                        df.push(0);
                        last_doc.push(0);
                        id
                    }
                };
                if last_doc[id] != n_docs {
                    last_doc[id] = n_docs;
                    df[id] += 1;
                }
            }
        }
        if n_docs == 0 {
            return Err(TfidfError::EmptyCorpus);
        }
        Ok(Self::from_parts(terms, df, n_docs, options))
    }

    /// Reassemble a vectorizer from its serialized state.
    pub(crate) fn from_parts(
        terms: Vec<String>,
        df: Vec<u64>,
        n_docs: u64,
        options: TfidfOptions,
    ) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let idf = df.iter().map(|&d| options.idf_mode.idf(n_docs, d)).collect();
        FittedVectorizer {
            terms,
            df,
            n_docs,
            options,
            index,
            idf,
        }
    }

    pub fn dim(&self) -> usize {
        self.terms.len()
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn options(&self) -> TfidfOptions {
        self.options
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn doc_frequencies(&self) -> &[u64] {
        &self.df
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn df(&self, term: &str) -> Result<u64, TfidfError> {
        self.index_of(term)
            .map(|i| self.df[i])
            .ok_or_else(|| TfidfError::UnknownTerm(term.to_string()))
    }

    pub fn idf(&self, term: &str) -> Result<f64, TfidfError> {
        self.index_of(term)
            .map(|i| self.idf[i])
            .ok_or_else(|| TfidfError::UnknownTerm(term.to_string()))
    }

    /// Encode one document. Out-of-vocabulary tokens are ignored.
    pub fn transform(&self, doc: &TokenStream) -> SparseVector {
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for tok in doc.iter() {
            if let Some(&i) = self.index.get(tok) {
                *counts.entry(i).or_default() += 1;
            }
        }
        let mut v = SparseVector::from_pairs(
            self.dim(),
            counts
                .into_iter()
                .map(|(i, tf)| (i, tf as f64 * self.idf[i])),
        );
        if self.options.l2_normalize {
            v.scale_to_unit();
        }
        v
    }

    pub fn transform_all<'a, I>(&self, docs: I) -> Vec<SparseVector>
    where
        I: IntoIterator<Item = &'a TokenStream>,
    {
        docs.into_iter().map(|d| self.transform(d)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    fn ts(tokens: &[&str]) -> TokenStream {
        TokenStream::from_tokens(tokens.iter().copied())
    }

    fn raw() -> TfidfOptions {
        TfidfOptions {
            l2_normalize: false,
            idf_mode: IdfMode::Plain,
        }
    }

    #[test]
    fn fit_counts_documents_not_occurrences() {
        let v = FittedVectorizer::fit(&[ts(&["a", "b"]), ts(&["b", "c"])], raw()).unwrap();
        assert_eq!(v.n_docs(), 2);
        assert_eq!(v.df("a"), Ok(1));
        assert_eq!(v.df("b"), Ok(2));
        assert_eq!(v.df("c"), Ok(1));
        assert_eq!(v.terms(), ["a", "b", "c"]);

        let v = FittedVectorizer::fit(&[ts(&["a", "a", "a"])], raw()).unwrap();
        assert_eq!(v.df("a"), Ok(1));
    }

    #[test]
    fn fit_empty_corpus() {
        let empty: Vec<TokenStream> = vec![];
        assert_eq!(
            FittedVectorizer::fit(&empty, raw()).unwrap_err(),
            TfidfError::EmptyCorpus
        );
    }

    #[test]
    fn idf_hand_values() {
        // N = 4, df(a) = 1
        let corpus = [ts(&["a"]), ts(&["b"]), ts(&["b"]), ts(&["c"])];
        let v = FittedVectorizer::fit(&corpus, raw()).unwrap();
        assert!((v.idf("a").unwrap() - LN_2).abs() < 1e-15);

        // N = 1, df = 1: negative idf is kept
        let v = FittedVectorizer::fit(&[ts(&["x"])], raw()).unwrap();
        assert!((v.idf("x").unwrap() + LN_2).abs() < 1e-15);

        assert!(matches!(v.idf("zzz"), Err(TfidfError::UnknownTerm(_))));
    }

    #[test]
    fn idf_log_identity() {
        let e = std::f64::consts::E;
        assert!((IdfMode::Plain.idf(1, 1) + LN_2).abs() < 1e-15);
        // N / (df + 1) = e  ->  idf = 1
        let n = e * 2.0;
        assert!(((n / 2.0).ln() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn smooth_mode() {
        assert!((IdfMode::Smooth.idf(4, 1) - ((5.0f64 / 2.0).ln() + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn transform_hand_evaluation() {
        let v = FittedVectorizer::fit(&[ts(&["a", "b"]), ts(&["b", "c"])], raw()).unwrap();
        let x = v.transform(&ts(&["a", "a", "b"]));
        // a: 2 * ln(2/2) = 0, dropped; b: 1 * ln(2/3)
        assert_eq!(x.nnz(), 1);
        assert_eq!(x.get(0), 0.0);
        assert!((x.get(1) - (2.0f64 / 3.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn transform_empty_and_oov() {
        let v = FittedVectorizer::fit(&[ts(&["a", "b"]), ts(&["c"])], TfidfOptions::default())
            .unwrap();
        assert!(v.transform(&ts(&[])).is_zero());
        assert!(v.transform(&ts(&["q", "r"])).is_zero());
    }

    #[test]
    fn l2_unit_norm() {
        let corpus = [ts(&["a", "b"]), ts(&["c"]), ts(&["d"]), ts(&["e", "a"])];
        let v = FittedVectorizer::fit(&corpus, TfidfOptions::default()).unwrap();
        let x = v.transform(&ts(&["a", "c", "c", "d"]));
        assert!((x.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparse_from_pairs_merges_and_drops_zeros() {
        let s = SparseVector::from_pairs(5, [(3, 1.0), (1, 2.0), (3, -1.0), (4, 0.0)]);
        assert_eq!(s.entries(), &[(1, 2.0)]);
        assert_eq!(s.to_dense(), vec![0.0, 2.0, 0.0, 0.0, 0.0]);
    }
}
