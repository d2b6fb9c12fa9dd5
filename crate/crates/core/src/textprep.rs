//! Tweet normalization and tokenization.
//!
//! Normalization: NFC, lowercase, URLs (`scheme://` followed by non-space
//! characters) become `<url>`, `@handle` becomes `<user>`, and the `#` of a
//! hashtag is dropped while the word is kept. Tokens are maximal runs of
//! alphanumeric characters; the two sentinels survive tokenization intact.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

pub const URL_TOKEN: &str = "<url>";
pub const USER_TOKEN: &str = "<user>";

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[a-z][a-z0-9+.\-]*://\S+").unwrap())
}

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@\w+").unwrap())
}

fn hashtag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"#+(\w)").unwrap())
}

/// Canonical form of a tweet's text. Total and idempotent.
pub fn normalize(text: &str) -> String {
    let lowered: String = text.nfc().collect::<String>().to_lowercase();
    let lowered: String = lowered.nfc().collect();
    let s = url_re().replace_all(&lowered, URL_TOKEN);
    let s = hashtag_re().replace_all(&s, "$1");
    let s = mention_re().replace_all(&s, USER_TOKEN);
    s.into_owned()
}

/// Tokens used for keyword matching: like [`TokenStream::from_text`] except
/// that `@handle` keeps its name (`handle`) instead of becoming `<user>`, so
/// account names can be matched.
pub fn keyword_tokens(text: &str) -> TokenStream {
    let lowered: String = text.nfc().collect::<String>().to_lowercase();
    let lowered: String = lowered.nfc().collect();
    let s = url_re().replace_all(&lowered, URL_TOKEN);
    tokenize(&s)
}

/// Ordered, lowercase, whitespace-free tokens of one document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    tokens: Vec<String>,
}

impl TokenStream {
    /// Normalize then tokenize.
    pub fn from_text(text: &str) -> Self {
        tokenize(&normalize(text))
    }

    /// Wrap pre-split tokens. Empty strings are dropped and case is folded so
    /// the stream invariants hold regardless of the source.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        TokenStream {
            tokens: tokens
                .into_iter()
                .map(|t| t.as_ref().to_lowercase())
                .filter(|t| !t.is_empty() && !t.chars().any(char::is_whitespace))
                .collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.tokens.iter().any(|t| t == token)
    }
}

impl<'a> IntoIterator for &'a TokenStream {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

/// Split already-normalized text into tokens. Punctuation and whitespace are
/// separators; `<url>` and `<user>` are emitted as single tokens.
pub fn tokenize(text: &str) -> TokenStream {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if c == '<' {
            if let Some(sentinel) = [URL_TOKEN, USER_TOKEN]
                .into_iter()
                .find(|s| rest.starts_with(s))
            {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(sentinel.to_string());
                rest = &rest[sentinel.len()..];
                continue;
            }
        }
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
        rest = &rest[c.len_utf8()..];
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    TokenStream { tokens }
}
