//! Contextual enrichment: repeat a document's distinguishing fields after its
//! body so that shared boilerplate carries less weight in the embedding.

use std::fmt;
use std::str::FromStr;

use crate::corpus::Document;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Title,
    Classification,
    Location,
    Requirements,
    Skills,
}

impl Field {
    /// Injection order.
    pub const ALL: [Field; 5] = [
        Field::Title,
        Field::Classification,
        Field::Location,
        Field::Requirements,
        Field::Skills,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Classification => "classification",
            Field::Location => "location",
            Field::Requirements => "requirements",
            Field::Skills => "skills",
        }
    }

    fn text(self, doc: &Document) -> Option<String> {
        let text = match self {
            Field::Title => Some(doc.title.clone()),
            Field::Classification => doc.classification.clone(),
            Field::Location => doc.location.clone(),
            Field::Requirements => doc.requirements.clone(),
            Field::Skills => Some(doc.skills.join(" ")),
        }?;
        let trimmed = text.trim();
        (!trimmed.is_empty()).then(|| trimmed.to_owned())
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Field::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| Error::InvalidParameter(format!("unknown enrichment field {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrichmentConfig {
    pub n_repeats: usize,
    pub fields: Vec<Field>,
}

impl Default for EnrichmentConfig {
    fn default() -> Self {
        EnrichmentConfig {
            n_repeats: 3,
            fields: Field::ALL.to_vec(),
        }
    }
}

impl EnrichmentConfig {
    pub fn new(n_repeats: usize, fields: &[Field]) -> Self {
        EnrichmentConfig {
            n_repeats,
            fields: fields.to_vec(),
        }
    }

    pub fn disabled() -> Self {
        EnrichmentConfig::new(0, &[])
    }

    pub fn is_identity(&self) -> bool {
        self.n_repeats == 0 || self.fields.is_empty()
    }

    /// Parses a comma-separated field list such as `requirements,skills`.
    pub fn parse_fields(list: &str) -> Result<Vec<Field>, Error> {
        list.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect()
    }
}

/// Returns a copy of `doc` whose body is followed by `n_repeats` copies of
/// every selected non-empty field, in the fixed [`Field::ALL`] order.
pub fn enrich(doc: &Document, config: &EnrichmentConfig) -> Document {
    let mut out = doc.clone();
    if config.is_identity() {
        return out;
    }
    for field in Field::ALL {
        if !config.fields.contains(&field) {
            continue;
        }
        if let Some(text) = field.text(doc) {
            for _ in 0..config.n_repeats {
                out.body.push(' ');
                out.body.push_str(&text);
            }
        }
    }
    out
}

pub fn enrich_all(docs: &[Document], config: &EnrichmentConfig) -> Vec<Document> {
    docs.iter().map(|d| enrich(d, config)).collect()
}

const HEADINGS: [&str; 3] = ["requirements", "qualifications", "skills"];

/// A heading is a run of letters and spaces that starts a line or a sentence
/// and ends with ':'.
fn headings(body: &str) -> Vec<(usize, usize, String)> {
    let mut found = Vec::new();
    let bytes = body.as_bytes();
    let mut start = 0;
    loop {
        // Skip whitespace to the phrase start.
        while start < bytes.len() && bytes[start].is_ascii_whitespace() {
            start += 1;
        }
        if start >= bytes.len() {
            break;
        }
        let rest = &body[start..];
        let phrase_len = rest
            .find(|c: char| !(c.is_alphabetic() || c == ' ' || c == '\t'))
            .unwrap_or(rest.len());
        if phrase_len > 0 && rest[phrase_len..].starts_with(':') {
            let name = rest[..phrase_len].trim().to_lowercase();
            found.push((start, start + phrase_len + 1, name));
        }
        // Advance to the next sentence or line start.
        match rest.find(['.', '!', '?', '\n', ':']) {
            Some(off) => start += off + 1,
            None => break,
        }
    }
    found
}

/// Heuristic stand-in for a document parser: the text between a
/// requirements/qualifications/skills heading and the next heading.
pub fn extract_requirements(body: &str) -> String {
    let heads = headings(body);
    let Some(pos) = heads
        .iter()
        .position(|(_, _, name)| HEADINGS.contains(&name.as_str()))
    else {
        return String::new();
    };
    let from = heads[pos].1;
    let to = heads.get(pos + 1).map_or(body.len(), |h| h.0);
    body[from..to].trim().to_owned()
}
