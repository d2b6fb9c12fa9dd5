//! Platform-independent implementations of the browser operations.

use serde_json::{json, Value};
use tweetlens::analysis::{self, Mode, PartyAggregate};
use tweetlens::corpus::TextRecord;
use tweetlens::textprep::{normalize, TokenStream};
use tweetlens::{ClassifierPipeline, FittedVectorizer, LabeledDataset, TfidfOptions, TrainConfig};

fn to_json(v: Value) -> String {
    serde_json::to_string(&v).expect("json values always serialize")
}

fn lines(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn explain_text(text: &str, corpus: &str, l2_normalize: bool) -> Result<String, String> {
    let docs: Vec<TokenStream> = lines(corpus).map(|(_, l)| TokenStream::from_text(l)).collect();
    let options = TfidfOptions {
        l2_normalize,
        ..TfidfOptions::default()
    };
    let vectorizer = FittedVectorizer::fit(&docs, options)
        .map_err(|e| format!("reference corpus: {e} (enter at least one document)"))?;
    let stream = TokenStream::from_text(text);
    let vector = vectorizer.transform(&stream);

    let mut seen = Vec::new();
    let mut terms = Vec::new();
    let mut oov = Vec::new();
    for t in stream.tokens() {
        if seen.contains(t) {
            continue;
        }
        seen.push(t.clone());
        match vectorizer.index_of(t) {
            Some(i) => terms.push(json!({
                "term": t,
                "tf": stream.iter().filter(|x| *x == t).count(),
                "df": vectorizer.df(t).unwrap_or(0),
                "idf": vectorizer.idf(t).unwrap_or(0.0),
                "weight": vector.get(i),
            })),
            None => oov.push(t.clone()),
        }
    }
    Ok(to_json(json!({
        "normalized": normalize(text),
        "tokens": stream.tokens(),
        "documents": vectorizer.n_docs(),
        "vocabulary": vectorizer.dim(),
        "terms": terms,
        "out_of_vocabulary": oov,
        "norm": vector.norm(),
    })))
}

pub fn train_and_classify(
    labeled: &str,
    queries: &str,
    lambda: f64,
    epochs: usize,
) -> Result<String, String> {
    let mut records = Vec::new();
    for (n, line) in lines(labeled) {
        let (label, text) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| format!("line {n}: expected `<0|1> text`"))?;
        let label = match label {
            "0" => 0,
            "1" => 1,
            other => return Err(format!("line {n}: label `{other}` must be 0 or 1")),
        };
        records.push(TextRecord::labeled(n.to_string(), text.trim(), label));
    }
    if records.is_empty() {
        return Err("no training lines".into());
    }
    let data = LabeledDataset::new(records, ["negative".into(), "positive".into()]);
    let cfg = TrainConfig {
        lambda,
        epochs,
        ..TrainConfig::default()
    };
    let pipeline = ClassifierPipeline::fit("sentiment", &data, &cfg, TfidfOptions::default())
        .map_err(|e| e.to_string())?;
    let (_, report) = pipeline.evaluate(&data).map_err(|e| e.to_string())?;

    let mut weighted: Vec<(&str, f64)> = pipeline
        .vectorizer
        .terms()
        .iter()
        .map(String::as_str)
        .zip(pipeline.model.weights.iter().copied())
        .collect();
    weighted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    let top = |items: &mut dyn Iterator<Item = &(&str, f64)>| -> Vec<Value> {
        items.take(5).map(|(t, w)| json!({"term": t, "weight": w})).collect()
    };
    let positive = top(&mut weighted.iter().filter(|x| x.1 > 0.0));
    let negative = top(&mut weighted.iter().rev().filter(|x| x.1 < 0.0));

    let predictions: Vec<Value> = lines(queries)
        .map(|(_, q)| {
            let label = pipeline.predict(q);
            json!({
                "text": q,
                "score": pipeline.decision(q),
                "label": label,
                "label_name": pipeline.label_names[label as usize],
            })
        })
        .collect();
    Ok(to_json(json!({
        "training_examples": data.len(),
        "training_accuracy": report.accuracy,
        "bias": pipeline.model.bias,
        "top_positive": positive,
        "top_negative": negative,
        "predictions": predictions,
    })))
}

pub fn party_charts(counts: &str, corpus_total: u64) -> Result<String, String> {
    if corpus_total == 0 {
        return Err("corpus total must be positive".into());
    }
    let mut aggs: Vec<PartyAggregate> = Vec::new();
    for (n, line) in lines(counts) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [party, pos, neg] = parts[..] else {
            return Err(format!("line {n}: expected `PARTY POS NEG`"));
        };
        let num = |s: &str| {
            s.parse::<u64>()
                .map_err(|_| format!("line {n}: `{s}` is not a non-negative integer"))
        };
        if aggs.iter().any(|a| a.party == party) {
            return Err(format!("line {n}: party `{party}` listed twice"));
        }
        aggs.push(PartyAggregate::from_counts(party, Mode::Raw, num(pos)?, num(neg)?, corpus_total));
    }
    if aggs.is_empty() {
        return Err("enter at least one party".into());
    }
    let report = analysis::build_report(&aggs, &[], None);
    let charts: Vec<Value> = report
        .charts
        .iter()
        .map(|c| json!({"name": c.name, "title": c.title, "svg": c.to_svg(), "data": c.to_data()}))
        .collect();
    Ok(to_json(json!({
        "table": report.to_string(),
        "charts": charts,
    })))
}
