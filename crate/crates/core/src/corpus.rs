//! Corpus ingestion, tokenization and the shared vocabulary.
//!
//! A corpus is a JSONL file with one [`Document`] object per line. Every
//! embedding backend works on [`TokenizedDocument`]s and maps tokens to dense
//! indices through a [`Vocabulary`].

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const KNOWN_FIELDS: [&str; 8] = [
    "id",
    "title",
    "body",
    "classification",
    "location",
    "requirements",
    "skills",
    "warm",
];

/// One item's text plus contextual metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub body: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirements: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skills: Vec<String>,
    /// True iff the item has behavioral data.
    #[serde(default)]
    pub warm: bool,
}

impl Document {
    pub fn new(id: impl Into<String>, body: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            title: String::new(),
            body: body.into(),
            classification: None,
            location: None,
            requirements: None,
            skills: Vec::new(),
            warm: false,
        }
    }

    pub fn warm(mut self, warm: bool) -> Self {
        self.warm = warm;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenizedDocument {
    pub id: String,
    pub tokens: Vec<String>,
}

impl TokenizedDocument {
    pub fn new(id: impl Into<String>, tokens: Vec<String>) -> Self {
        TokenizedDocument {
            id: id.into(),
            tokens,
        }
    }

    /// Convenience constructor used heavily in tests.
    pub fn from_strs(id: impl Into<String>, tokens: &[&str]) -> Self {
        TokenizedDocument::new(id, tokens.iter().map(|t| t.to_string()).collect())
    }
}

/// Reads a JSONL corpus. Blank lines are skipped; unknown fields are ignored
/// with a warning.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    let mut warned = HashSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::parse(path, lineno, format!("malformed JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::parse(path, lineno, "expected a JSON object"))?;
        for key in obj.keys() {
            if !KNOWN_FIELDS.contains(&key.as_str()) && warned.insert(key.clone()) {
                warn!("{}:{lineno}: ignoring unknown field {key:?}", path.display());
            }
        }
        for required in ["id", "body"] {
            if !obj.contains_key(required) {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("missing required field {required:?}"),
                ));
            }
        }
        let doc: Document = serde_json::from_value(value)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        if doc.id.is_empty() {
            return Err(Error::parse(path, lineno, "empty id"));
        }
        if doc.body.trim().is_empty() {
            return Err(Error::parse(path, lineno, "empty body"));
        }
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateId(doc.id));
        }
        docs.push(doc);
    }
    Ok(docs)
}

/// Writes documents as JSONL.
pub fn write_corpus(path: impl AsRef<Path>, docs: &[Document]) -> Result<()> {
    let mut out = String::new();
    for doc in docs {
        out.push_str(&serde_json::to_string(doc).expect("document serializes"));
        out.push('\n');
    }
    crate::io::write_atomic(path, out.as_bytes())
}

static STOPWORDS: &[&str] = &[
    "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as",
    "at", "be", "because", "been", "before", "being", "below", "between", "both", "but", "by",
    "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself", "him",
    "himself", "his", "how", "if", "in", "into", "is", "it", "its", "itself", "me", "more",
    "most", "my", "myself", "no", "nor", "not", "of", "off", "on", "once", "only", "or", "other",
    "our", "ours", "ourselves", "out", "over", "own", "same", "she", "should", "so", "some",
    "such", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there",
    "these", "they", "this", "those", "through", "to", "too", "under", "until", "up", "very",
    "was", "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will",
    "with", "would", "you", "your", "yours", "yourself", "yourselves",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Lowercases, splits on non-alphanumeric characters and drops tokens shorter
/// than two characters, optionally filtering the bundled stopword list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tokenizer {
    pub stopwords: bool,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer { stopwords: true }
    }
}

impl Tokenizer {
    pub fn new(stopwords: bool) -> Self {
        Tokenizer { stopwords }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let lowered = text.to_lowercase();
        lowered
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| t.chars().count() >= 2)
            .filter(|t| !(self.stopwords && is_stopword(t)))
            .map(str::to_owned)
            .collect()
    }

    pub fn tokenize_document(&self, doc: &Document) -> TokenizedDocument {
        TokenizedDocument::new(doc.id.clone(), self.tokenize(&doc.body))
    }

    pub fn tokenize_all(&self, docs: &[Document]) -> Vec<TokenizedDocument> {
        docs.par_iter().map(|d| self.tokenize_document(d)).collect()
    }
}

/// Tokenizes with the default configuration (stopwords removed).
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

/// Dense token indexing shared by every backend. Index order is descending
/// corpus frequency, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    counts: Vec<u64>,
    min_count: usize,
}

impl Vocabulary {
    pub fn build(docs: &[TokenizedDocument], min_count: usize) -> Result<Self> {
        if min_count < 1 {
            return Err(Error::InvalidParameter("min_count must be >= 1".into()));
        }
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let counts = docs
            .par_iter()
            .fold(HashMap::<&str, u64>::new, |mut acc, doc| {
                for t in &doc.tokens {
                    *acc.entry(t.as_str()).or_default() += 1;
                }
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (t, c) in b {
                    *a.entry(t).or_default() += c;
                }
                a
            });
        let retained: Vec<(String, u64)> = counts
            .into_iter()
            .filter(|&(_, c)| c >= min_count as u64)
            .map(|(t, c)| (t.to_owned(), c))
            .collect();
        if retained.is_empty() {
            return Err(Error::EmptyVocabulary(min_count));
        }
        Ok(Self::from_counts(retained, min_count))
    }

    /// Builds a vocabulary from already-filtered `(token, count)` pairs,
    /// applying the canonical ordering.
    pub fn from_counts(mut entries: Vec<(String, u64)>, min_count: usize) -> Self {
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Self::from_ordered(entries, min_count)
    }

    /// Keeps the given order as the index order.
    pub fn from_ordered(entries: Vec<(String, u64)>, min_count: usize) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), i))
            .collect();
        let (tokens, counts) = entries.into_iter().unzip();
        Vocabulary {
            index,
            tokens,
            counts,
            min_count,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token_of(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    pub fn frequency(&self, token: &str) -> Option<u64> {
        self.index_of(token).map(|i| self.counts[i])
    }

    /// Corpus counts aligned with indices.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Maps tokens to indices, dropping out-of-vocabulary tokens.
    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().filter_map(|t| self.index_of(t)).collect()
    }

    /// `token\tcount` lines in index order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (t, c) in self.tokens.iter().zip(&self.counts) {
            out.push_str(t);
            out.push('\t');
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_tsv(text: &str, min_count: usize) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let (token, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::Model(format!("vocabulary line {}: expected token\\tcount", i + 1)))?;
            let count = count
                .parse()
                .map_err(|_| Error::Model(format!("vocabulary line {}: bad count", i + 1)))?;
            entries.push((token.to_owned(), count));
        }
        Ok(Self::from_counts(entries, min_count))
    }
}

/// Free-function form of [`Vocabulary::build`].
pub fn build_vocabulary(docs: &[TokenizedDocument], min_count: usize) -> Result<Vocabulary> {
    Vocabulary::build(docs, min_count)
}
