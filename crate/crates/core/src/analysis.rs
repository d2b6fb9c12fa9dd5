//! Applying the two classifiers to an unlabeled tweet corpus and summarizing
//! polarity per political party, with and without the sarcasm flip.
//!
//! A tweet's effective sentiment is its predicted sentiment XOR its sarcasm
//! flag: a sarcastic positive counts as negative and vice versa. Tweets are
//! attributed to every party whose keywords appear among its tokens.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::chart::{Chart, ChartKind};
use crate::corpus::TextRecord;
use crate::pipeline::ClassifierPipeline;
use crate::textprep::keyword_tokens;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("invalid party configuration: {0}")]
    InvalidPartyConfig(String),
    #[error("cannot read party configuration {path}: {reason}")]
    PartyConfigIo { path: String, reason: String },
}

/// Party name → keywords, each a single lowercase token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyConfig {
    pub parties: BTreeMap<String, Vec<String>>,
}

impl PartyConfig {
    pub fn new(parties: BTreeMap<String, Vec<String>>) -> Result<Self, AnalysisError> {
        let cfg = PartyConfig { parties };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        let bad = |m: String| Err(AnalysisError::InvalidPartyConfig(m));
        if self.parties.is_empty() {
            return bad("no parties defined".into());
        }
        for (party, keywords) in &self.parties {
            if party.trim().is_empty() {
                return bad("empty party name".into());
            }
            if keywords.is_empty() {
                return bad(format!("party `{party}` has no keywords"));
            }
            for k in keywords {
                if k.is_empty() || k.chars().any(|c| !c.is_alphanumeric()) {
                    return bad(format!(
                        "keyword `{k}` of `{party}` must be a single alphanumeric token"
                    ));
                }
                if k.to_lowercase() != *k {
                    return bad(format!("keyword `{k}` of `{party}` must be lowercase"));
                }
            }
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self, AnalysisError> {
        let cfg: PartyConfig =
            toml::from_str(s).map_err(|e| AnalysisError::InvalidPartyConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, AnalysisError> {
        let text = std::fs::read_to_string(path).map_err(|e| AnalysisError::PartyConfigIo {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    /// Parties whose keywords occur as whole tokens in `text`.
    pub fn attribute(&self, text: &str) -> BTreeSet<String> {
        let tokens: BTreeSet<String> = keyword_tokens(text).tokens().iter().cloned().collect();
        self.parties
            .iter()
            .filter(|(_, kws)| kws.iter().any(|k| tokens.contains(k)))
            .map(|(p, _)| p.clone())
            .collect()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.parties.keys().map(String::as_str)
    }
}

impl Default for PartyConfig {
    /// BJP and INC with party names, abbreviations, leaders and common handles.
    fn default() -> Self {
        Self::from_toml_str(DEFAULT_PARTIES_TOML).expect("bundled party config is valid")
    }
}

pub const DEFAULT_PARTIES_TOML: &str = r#"# Keywords are matched as whole lowercase tokens. Hashtags lose their '#',
# and @handles are matched by name.
[parties]
BJP = ["bjp", "modi", "narendramodi", "namo", "chowkidar", "mainbhichowkidar",
       "amitshah", "bjp4india", "nda", "saffron", "yogi", "jaitley"]
INC = ["inc", "congress", "incindia", "rahul", "rahulgandhi", "raga", "priyanka",
       "priyankagandhi", "sonia", "upa", "pappu", "nyay"]
"#;

/// Per-tweet predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnotatedTweet {
    pub record: TextRecord,
    pub sentiment: u8,
    pub sarcastic: u8,
    pub effective_sentiment: u8,
    pub parties: BTreeSet<String>,
}

impl AnnotatedTweet {
    pub fn new(record: TextRecord, sentiment: u8, sarcastic: u8, parties: BTreeSet<String>) -> Self {
        AnnotatedTweet {
            record,
            sentiment,
            sarcastic,
            effective_sentiment: sentiment ^ sarcastic,
            parties,
        }
    }

    pub fn sentiment_for(&self, mode: Mode) -> u8 {
        match mode {
            Mode::Raw => self.sentiment,
            Mode::SarcasmAdjusted => self.effective_sentiment,
        }
    }
}

/// Classify every tweet with both pipelines and attribute it to parties.
/// Output order follows the corpus.
pub fn annotate(
    corpus: &[TextRecord],
    sentiment: &ClassifierPipeline,
    sarcasm: &ClassifierPipeline,
    parties: &PartyConfig,
) -> Result<Vec<AnnotatedTweet>, AnalysisError> {
    if corpus.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    Ok(corpus
        .iter()
        .map(|r| {
            AnnotatedTweet::new(
                r.clone(),
                sentiment.predict(&r.text),
                sarcasm.predict(&r.text),
                parties.attribute(&r.text),
            )
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Raw,
    SarcasmAdjusted,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Raw => "without sarcasm handling",
            Mode::SarcasmAdjusted => "with sarcasm handling",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Mode::Raw => "raw",
            Mode::SarcasmAdjusted => "adjusted",
        }
    }
}

/// A ratio that may have a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Value(f64),
    /// Positive numerator over zero.
    Infinite,
    /// 0 / 0.
    Undefined,
}

impl Ratio {
    fn of(num: f64, den: f64) -> Ratio {
        if den != 0.0 {
            Ratio::Value(num / den)
        } else if num != 0.0 {
            Ratio::Infinite
        } else {
            Ratio::Undefined
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(v),
            _ => None,
        }
    }

    /// Two decimals, or `∞` / `undefined`.
    pub fn display(self, suffix: &str) -> String {
        match self {
            Ratio::Value(v) => format!("{v:.2}{suffix}"),
            Ratio::Infinite => "∞".into(),
            Ratio::Undefined => "undefined".into(),
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Ratio::Value(v) => s.serialize_f64(*v),
            Ratio::Infinite => s.serialize_str("∞"),
            Ratio::Undefined => s.serialize_str("undefined"),
        }
    }
}

/// Polarity counts and derived percentages for one party in one mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartyAggregate {
    pub party: String,
    pub mode: Mode,
    pub pos: u64,
    pub neg: u64,
    pub attributed_total: u64,
    pub corpus_total: u64,
    /// `100 · pos / corpus_total`
    pub pos_pct: f64,
    /// `100 · neg / corpus_total`
    pub neg_pct: f64,
    /// `pos / neg`
    pub pos_neg_ratio: Ratio,
    /// `100 · pos / (pos + neg)`
    pub pos_share_pct: Ratio,
}

impl PartyAggregate {
    pub fn from_counts(party: &str, mode: Mode, pos: u64, neg: u64, corpus_total: u64) -> Self {
        assert!(corpus_total > 0, "corpus_total must be positive");
        let total = corpus_total as f64;
        PartyAggregate {
            party: party.to_string(),
            mode,
            pos,
            neg,
            attributed_total: pos + neg,
            corpus_total,
            pos_pct: 100.0 * pos as f64 / total,
            neg_pct: 100.0 * neg as f64 / total,
            pos_neg_ratio: Ratio::of(pos as f64, neg as f64),
            pos_share_pct: match Ratio::of(pos as f64, (pos + neg) as f64) {
                Ratio::Value(v) => Ratio::Value(100.0 * v),
                other => other,
            },
        }
    }
}

/// One aggregate per configured party, in party-name order.
pub fn aggregate(
    annotated: &[AnnotatedTweet],
    parties: &PartyConfig,
    mode: Mode,
) -> Result<Vec<PartyAggregate>, AnalysisError> {
    if annotated.is_empty() {
        return Err(AnalysisError::EmptyCorpus);
    }
    let mut counts: BTreeMap<&str, (u64, u64)> = parties.names().map(|p| (p, (0, 0))).collect();
    for t in annotated {
        let positive = t.sentiment_for(mode) == 1;
        for p in &t.parties {
            if let Some(c) = counts.get_mut(p.as_str()) {
                if positive {
                    c.0 += 1;
                } else {
                    c.1 += 1;
                }
            }
        }
    }
    let n = annotated.len() as u64;
    Ok(counts
        .into_iter()
        .map(|(p, (pos, neg))| PartyAggregate::from_counts(p, mode, pos, neg, n))
        .collect())
}

/// Tweets attributed to no party, and to more than one.
pub fn attribution_summary(annotated: &[AnnotatedTweet]) -> (u64, u64) {
    let unattributed = annotated.iter().filter(|t| t.parties.is_empty()).count() as u64;
    let multi = annotated.iter().filter(|t| t.parties.len() > 1).count() as u64;
    (unattributed, multi)
}

/// Tables, charts and structured results for both modes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub corpus_total: u64,
    pub raw: Vec<PartyAggregate>,
    pub adjusted: Vec<PartyAggregate>,
    #[serde(skip)]
    pub charts: Vec<Chart>,
    pub notices: Vec<String>,
}

/// Slices of the popularity pie: party × polarity as a share of all tweets,
/// plus the unattributed remainder.
///
/// If a tweet can belong to several parties the party slices can add up to
/// more than the corpus. In that case every slice is rescaled to the number
/// of (party, tweet) attributions plus `unattributed`, and the returned flag
/// is set.
pub fn popularity_slices(
    aggs: &[PartyAggregate],
    unattributed: Option<u64>,
) -> (Vec<(String, f64)>, bool) {
    let Some(first) = aggs.first() else {
        return (Vec::new(), false);
    };
    let attributed: u64 = aggs.iter().map(|a| a.attributed_total).sum();
    let rest = unattributed.unwrap_or(first.corpus_total.saturating_sub(attributed));
    let overlap = attributed + rest != first.corpus_total;
    let denom = (attributed + rest) as f64;
    let mut slices = Vec::with_capacity(2 * aggs.len() + 1);
    for a in aggs {
        slices.push((format!("{} positive", a.party), 100.0 * a.pos as f64 / denom));
        slices.push((format!("{} negative", a.party), 100.0 * a.neg as f64 / denom));
    }
    slices.push(("other/unattributed".into(), 100.0 * rest as f64 / denom));
    (slices, overlap)
}

fn mode_charts(aggs: &[PartyAggregate], mode: Mode, unattributed: Option<u64>) -> Vec<Chart> {
    let (slices, overlap) = popularity_slices(aggs, unattributed);
    let mut pie_title = format!("Popularity spread of tweets {}", mode.label());
    if overlap {
        pie_title.push_str(" (share of party attributions)");
    }
    vec![
        Chart {
            name: format!("popularity_{}", mode.slug()),
            title: pie_title,
            kind: ChartKind::Pie,
            unit: "%".into(),
            data: slices.into_iter().map(|(k, v)| (k, Some(v))).collect(),
        },
        Chart {
            name: format!("ratio_{}", mode.slug()),
            title: format!("Ratio of positive to negative tweets {}", mode.label()),
            kind: ChartKind::Bar,
            unit: String::new(),
            data: aggs
                .iter()
                .map(|a| (a.party.clone(), a.pos_neg_ratio.value()))
                .collect(),
        },
        Chart {
            name: format!("positive_share_{}", mode.slug()),
            title: format!("Percentage of positive tweets per party {}", mode.label()),
            kind: ChartKind::Bar,
            unit: "%".into(),
            data: aggs
                .iter()
                .map(|a| (a.party.clone(), a.pos_share_pct.value()))
                .collect(),
        },
    ]
}

/// Assemble the report. `unattributed` is the number of tweets matched to no
/// party; it is only consulted when parties overlap.
pub fn build_report(
    raw: &[PartyAggregate],
    adjusted: &[PartyAggregate],
    unattributed: Option<u64>,
) -> AnalysisReport {
    let corpus_total = raw.first().map_or(0, |a| a.corpus_total);
    let mut notices = Vec::new();
    let mut charts = mode_charts(raw, Mode::Raw, unattributed);
    if adjusted.is_empty() {
        notices.push("no sarcasm-adjusted aggregates; showing results without sarcasm handling only".into());
    } else {
        charts.extend(mode_charts(adjusted, Mode::SarcasmAdjusted, unattributed));
    }
    if popularity_slices(raw, unattributed).1 {
        notices.push(
            "some tweets match several parties; pie slices are shares of party attributions".into(),
        );
    }
    AnalysisReport {
        corpus_total,
        raw: raw.to_vec(),
        adjusted: adjusted.to_vec(),
        charts,
        notices,
    }
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |v: f64| format!("{v:.2}%");
        let has_adj = !self.adjusted.is_empty();
        let adj = |party: &str| self.adjusted.iter().find(|a| a.party == party);
        let mut out = String::new();

        writeln!(out, "Tweets analysed: {}", self.corpus_total)?;
        for n in &self.notices {
            writeln!(out, "NOTICE: {n}")?;
        }
        writeln!(out)?;
        writeln!(out, "Polarity percentage of tweets with respect to total tweets")?;
        if has_adj {
            writeln!(
                out,
                "{:<8} {:>12} {:>12} {:>12} {:>12}",
                "Party", "Pos (raw)", "Pos (sarc.)", "Neg (raw)", "Neg (sarc.)"
            )?;
        } else {
            writeln!(out, "{:<8} {:>12} {:>12}", "Party", "Pos (raw)", "Neg (raw)")?;
        }
        for r in &self.raw {
            match adj(&r.party) {
                Some(a) => writeln!(
                    out,
                    "{:<8} {:>12} {:>12} {:>12} {:>12}",
                    r.party,
                    pct(r.pos_pct),
                    pct(a.pos_pct),
                    pct(r.neg_pct),
                    pct(a.neg_pct)
                )?,
                None => writeln!(
                    out,
                    "{:<8} {:>12} {:>12}",
                    r.party,
                    pct(r.pos_pct),
                    pct(r.neg_pct)
                )?,
            }
        }

        let two_col = |out: &mut String, title: &str, get: &dyn Fn(&PartyAggregate) -> String| -> fmt::Result {
            writeln!(out)?;
            writeln!(out, "{title}")?;
            if has_adj {
                writeln!(out, "{:<8} {:>14} {:>14}", "Party", "raw", "sarcasm-adj.")?;
            } else {
                writeln!(out, "{:<8} {:>14}", "Party", "raw")?;
            }
            for r in &self.raw {
                match adj(&r.party) {
                    Some(a) => writeln!(out, "{:<8} {:>14} {:>14}", r.party, get(r), get(a))?,
                    None => writeln!(out, "{:<8} {:>14}", r.party, get(r))?,
                }
            }
            Ok(())
        };
        two_col(&mut out, "Positive : negative polarity ratio", &|a| a.pos_neg_ratio.display(""))?;
        two_col(&mut out, "Percentage of positive tweets per party", &|a| {
            a.pos_share_pct.display("%")
        })?;
        f.write_str(&out)
    }
}
