//! Regenerates the synthetic fixtures in `fixtures/`:
//!
//! ```text
//! cargo run -p tweetlens --example gen_fixtures -- crates/core/fixtures
//! ```
//!
//! The vocabularies are disjoint per class, so the toy tasks are separable
//! and a correctly working pipeline scores perfectly on them.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde_json::json;
use tweetlens::rng::Pcg32;

const POSITIVE: &[&str] = &[
    "great", "love", "happy", "awesome", "wonderful", "excellent", "brilliant", "proud",
    "hope", "win", "fantastic", "good", "best", "amazing", "support",
];
const NEGATIVE: &[&str] = &[
    "bad", "hate", "sad", "awful", "terrible", "worst", "angry", "corrupt", "lies", "fail",
    "shame", "disaster", "poor", "ugly", "fraud",
];
const FILLER: &[&str] = &[
    "today", "the", "people", "vote", "india", "election", "rally", "speech", "news", "again",
    "this", "time", "country", "day", "we",
];
const SARCASTIC: &[&str] = &[
    "totally", "obviously", "yeah", "sure", "genius", "wow", "clearly", "shocking", "surprise",
    "thanks", "brilliantly", "nobody",
];
const SINCERE: &[&str] = &[
    "announces", "report", "officials", "study", "confirms", "meeting", "budget", "minister",
    "plans", "statement", "results", "survey",
];
const NOISE: &[&str] = &["@voter", "#election2019", "https://t.co/abc", "#india", "@news"];
const BJP: &[&str] = &["BJP", "Modi", "#NaMo", "@narendramodi", "@AmitShah"];
const INC: &[&str] = &["Congress", "Rahul", "@INCIndia", "#RahulGandhi", "INC"];

fn pick<'a>(rng: &mut Pcg32, words: &[&'a str]) -> &'a str {
    words[rng.below(words.len() as u64) as usize]
}

fn sentence(rng: &mut Pcg32, core: &[&str], n_core: usize, n_filler: usize) -> Vec<String> {
    let mut words: Vec<String> = (0..n_core).map(|_| pick(rng, core).to_string()).collect();
    words.extend((0..n_filler).map(|_| pick(rng, FILLER).to_string()));
    rng.shuffle(&mut words);
    if rng.below(3) == 0 {
        words.push(pick(rng, NOISE).to_string());
    }
    words
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn main() {
    let dir: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()).into();
    std::fs::create_dir_all(&dir).unwrap();
    let mut rng = Pcg32::new(2019);

    // Sentiment: CSV with Sentiment140-style 0/4 labels.
    let mut s = String::from("id,label,text\n");
    for i in 0..200 {
        let positive = i % 2 == 0;
        let core = if positive { POSITIVE } else { NEGATIVE };
        let n_core = 2 + rng.below(2) as usize;
        let n_filler = 2 + rng.below(4) as usize;
        let text = sentence(&mut rng, core, n_core, n_filler).join(" ");
        writeln!(s, "{},{},{}", i + 1, if positive { 4 } else { 0 }, csv_field(&text)).unwrap();
    }
    std::fs::write(dir.join("sentiment.csv"), s).unwrap();

    // Sarcasm: headline-style JSON lines, separate training and held-out files.
    for (name, count) in [("sarcasm_train.jsonl", 200), ("sarcasm_test.jsonl", 60)] {
        let mut s = String::new();
        for i in 0..count {
            let sarcastic = rng.below(2) as u8;
            let core = if sarcastic == 1 { SARCASTIC } else { SINCERE };
            let n_core = 2 + rng.below(2) as usize;
            let n_filler = 2 + rng.below(3) as usize;
            let headline = sentence(&mut rng, core, n_core, n_filler).join(" ");
            let row = json!({
                "article_link": format!("https://example.org/{name}/{i}"),
                "headline": headline,
                "is_sarcastic": sarcastic,
            });
            writeln!(s, "{row}").unwrap();
        }
        std::fs::write(dir.join(name), s).unwrap();
    }

    // Unlabeled election corpus.
    let mut s = String::from(
        "created_at,tweet_id,full_text,retweet_count,favorite_count,quote_count,reply_count,last_updated\n",
    );
    for i in 0..500u64 {
        let mut words = Vec::new();
        match rng.below(10) {
            0..=4 => words.push(pick(&mut rng, BJP).to_string()),
            5..=7 => words.push(pick(&mut rng, INC).to_string()),
            8 => {
                words.push(pick(&mut rng, BJP).to_string());
                words.push(pick(&mut rng, INC).to_string());
            }
            _ => {}
        }
        let core = if rng.below(5) < 3 { POSITIVE } else { NEGATIVE };
        let n_filler = 2 + rng.below(3) as usize;
        words.extend(sentence(&mut rng, core, 2, n_filler));
        if rng.below(5) == 0 {
            words.push(pick(&mut rng, SARCASTIC).to_string());
            words.push(pick(&mut rng, SARCASTIC).to_string());
        }
        rng.shuffle(&mut words);
        let day = 1 + i % 28;
        writeln!(
            s,
            "2019-03-{day:02} 10:{:02}:00,{},{},{},{},{},{},2019-04-01",
            i % 60,
            1_100_000_000_000_000_000 + i,
            csv_field(&words.join(" ")),
            rng.below(500),
            rng.below(2000),
            rng.below(50),
            rng.below(100),
        )
        .unwrap();
    }
    std::fs::write(dir.join("election_tweets.csv"), s).unwrap();
    std::fs::write(dir.join("parties.toml"), tweetlens::analysis::DEFAULT_PARTIES_TOML).unwrap();
}
