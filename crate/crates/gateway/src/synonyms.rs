use serde::Serialize;

pub const MAX_SYNONYMS: usize = 5;
const SENTINEL: &str = "NO SYNONYM";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "words")]
pub enum Synonyms {
    Words(Vec<String>),
    NoSynonym,
}

/// Parses a `'a, b, c'`-style model answer into at most five words.
pub fn parse_synonyms(raw: &str) -> Synonyms {
    let trimmed = raw.trim();
    let unquoted = trimmed.trim_matches(|c| c == '\'' || c == '"').trim();
    if unquoted.eq_ignore_ascii_case(SENTINEL) {
        return Synonyms::NoSynonym;
    }
    let words: Vec<String> = unquoted
        .split(',')
        .map(str::trim)
        .filter(|w| !w.is_empty())
        .take(MAX_SYNONYMS)
        .map(str::to_string)
        .collect();
    if words.is_empty() {
        Synonyms::NoSynonym
    } else {
        Synonyms::Words(words)
    }
}
