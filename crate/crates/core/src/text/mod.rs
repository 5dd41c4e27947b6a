//! Document text, sentence segmentation, and the edit journal.
//!
//! All offsets in this module are **character** offsets into the document
//! text, not byte offsets.

mod layout;
mod spiral;

pub(crate) use layout::count_newlines;
pub use layout::{layout_monospace, Flow, LayoutConfig, LayoutMap, WordBox};
pub use spiral::{nearest_sentence, SpiralIndex};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::geom::Point;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TextError {
    #[error("no text near the requested point")]
    NoText,
    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },
    #[error("invalid layout configuration: {0}")]
    InvalidLayout(&'static str),
}

pub const TERMINATORS: [char; 3] = ['.', '!', '?'];

pub fn is_terminator(c: char) -> bool {
    TERMINATORS.contains(&c)
}

/// How a sentence ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    Punctuation(char),
    /// Unterminated final sentence of a paragraph.
    LastWord,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceSpan {
    pub start: usize,
    pub end: usize,
    pub terminal: Terminal,
}

/// A maximal run of non-whitespace characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordSpan {
    pub start: usize,
    pub end: usize,
    pub sentence: usize,
}

/// Splits `text` into sentences.
///
/// A sentence ends at `.`, `!` or `?` when the terminator is followed by
/// whitespace or end of text. A paragraph break (a whitespace run holding at
/// least two newlines) closes an unterminated sentence as [`Terminal::LastWord`].
/// Abbreviations such as "Dr." are split like any other terminator.
pub fn segment_sentences(text: &str) -> Vec<SentenceSpan> {
    let chars: Vec<char> = text.chars().collect();
    let n = chars.len();
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    let mut last_end = 0;
    let mut i = 0;
    while i < n {
        let c = chars[i];
        if c.is_whitespace() {
            let mut newlines = 0;
            while i < n && chars[i].is_whitespace() {
                if chars[i] == '\n' {
                    newlines += 1;
                }
                i += 1;
            }
            if newlines >= 2 {
                if let Some(start) = open.take() {
                    spans.push(SentenceSpan { start, end: last_end, terminal: Terminal::LastWord });
                }
            }
            continue;
        }
        let start = *open.get_or_insert(i);
        last_end = i + 1;
        if is_terminator(c) && (i + 1 == n || chars[i + 1].is_whitespace()) {
            spans.push(SentenceSpan { start, end: i + 1, terminal: Terminal::Punctuation(c) });
            open = None;
        }
        i += 1;
    }
    if let Some(start) = open {
        spans.push(SentenceSpan { start, end: last_end, terminal: Terminal::LastWord });
    }
    spans
}

/// Whitespace-delimited words, each tagged with its owning sentence.
pub fn word_spans(text: &str, sentences: &[SentenceSpan]) -> Vec<WordSpan> {
    let mut words = Vec::new();
    let mut start = None;
    let mut sentence = 0;
    let mut push = |start: usize, end: usize| {
        while sentence + 1 < sentences.len() && sentences[sentence].end <= start {
            sentence += 1;
        }
        words.push(WordSpan { start, end, sentence });
    };
    let mut n = 0;
    for (i, c) in text.chars().enumerate() {
        n = i + 1;
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                push(s, i);
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        push(s, n);
    }
    words
}

/// One committed change to the document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub offset: usize,
    pub removed: String,
    pub inserted: String,
    pub revision: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    text: String,
    sentences: Vec<SentenceSpan>,
    revision: u64,
    journal: Vec<Edit>,
}

impl Document {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let sentences = segment_sentences(&text);
        Self { text, sentences, revision: 0, journal: Vec::new() }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn sentences(&self) -> &[SentenceSpan] {
        &self.sentences
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn journal(&self) -> &[Edit] {
        &self.journal
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    pub fn words(&self) -> Vec<WordSpan> {
        word_spans(&self.text, &self.sentences)
    }

    /// Text between two character offsets.
    pub fn slice(&self, start: usize, end: usize) -> &str {
        let (a, b) = (self.byte_offset(start), self.byte_offset(end));
        &self.text[a..b]
    }

    pub fn sentence_text(&self, index: usize) -> Result<&str, TextError> {
        let span = self
            .sentences
            .get(index)
            .ok_or(TextError::OutOfRange { index, len: self.sentences.len() })?;
        Ok(self.slice(span.start, span.end))
    }

    fn byte_offset(&self, chars: usize) -> usize {
        self.text.char_indices().nth(chars).map_or(self.text.len(), |(b, _)| b)
    }

    /// Replaces the characters in `start..end` with `inserted` as one
    /// committed edit; bumps the revision by exactly one.
    pub fn replace(&mut self, start: usize, end: usize, inserted: &str) -> Result<&Edit, TextError> {
        let len = self.char_len();
        if start > end || end > len {
            return Err(TextError::OutOfRange { index: end.max(start), len });
        }
        let (a, b) = (self.byte_offset(start), self.byte_offset(end));
        let removed = self.text[a..b].to_string();
        self.text.replace_range(a..b, inserted);
        self.sentences = segment_sentences(&self.text);
        self.revision += 1;
        self.journal.push(Edit {
            offset: start,
            removed,
            inserted: inserted.to_string(),
            revision: self.revision,
        });
        Ok(self.journal.last().expect("just pushed"))
    }

    /// Canonical text serialization: a sentence table followed by the raw text.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "document revision={} chars={}", self.revision, self.char_len());
        for s in &self.sentences {
            let term = match s.terminal {
                Terminal::Punctuation(c) => c.to_string(),
                Terminal::LastWord => "last".to_string(),
            };
            let _ = writeln!(out, "sentence {} {} {}", s.start, s.end, term);
        }
        out.push_str("text\n");
        out.push_str(&self.text);
        out
    }
}

/// Insertion point for a gesture, placed at the end of a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CursorPos {
    pub offset: usize,
    pub sentence: usize,
    pub point: Point,
}

/// Cursor at the end of sentence `index`, drawn at the right edge of the
/// sentence's last word box.
pub fn cursor_for_sentence(doc: &Document, layout: &LayoutMap, index: usize) -> Result<CursorPos, TextError> {
    let span = doc
        .sentences()
        .get(index)
        .ok_or(TextError::OutOfRange { index, len: doc.sentences().len() })?;
    let last_box = layout
        .word_boxes
        .iter()
        .filter(|b| b.sentence == index)
        .max_by_key(|b| b.end)
        .ok_or(TextError::NoText)?;
    let rect = last_box.rect;
    Ok(CursorPos {
        offset: span.end,
        sentence: index,
        point: Point::new(rect.right(), rect.y + rect.h / 2.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const CLIMATE_EXTEND: &str = "Climate change refers to long-term shifts in temperatures and weather patterns. These shifts may be natural, such as through variations in the solar cycle.";

    #[test]
    fn two_terminators() {
        let spans = segment_sentences("Hello world. How are you?");
        assert_eq!(
            spans,
            vec![
                SentenceSpan { start: 0, end: 12, terminal: Terminal::Punctuation('.') },
                SentenceSpan { start: 13, end: 25, terminal: Terminal::Punctuation('?') },
            ]
        );
    }

    #[test]
    fn empty_text() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences("  \n\n ").is_empty());
    }

    #[test]
    fn climate_extend_text_has_two_sentences() {
        let spans = segment_sentences(CLIMATE_EXTEND);
        assert_eq!(spans.len(), 2);
        assert!(spans.iter().all(|s| s.terminal == Terminal::Punctuation('.')));
    }

    #[test]
    fn unterminated_tail_ends_at_last_word() {
        let text = "First one. and then which  ";
        let spans = segment_sentences(text);
        assert_eq!(spans[1], SentenceSpan { start: 11, end: 25, terminal: Terminal::LastWord });
    }

    #[test]
    fn terminator_must_be_followed_by_space() {
        let spans = segment_sentences("Version 1.5 is out.Really? Yes!");
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[0].end, 26);
    }

    #[test]
    fn abbreviations_split() {
        assert_eq!(segment_sentences("Dr. Smith arrived.").len(), 2);
    }

    #[test]
    fn paragraph_break_closes_sentence() {
        let spans = segment_sentences("no stop here\n\nNext para.");
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[0].terminal, Terminal::LastWord);
        assert_eq!(spans[0].end, 12);
        // a single newline does not break a paragraph
        assert_eq!(segment_sentences("no stop\nhere").len(), 1);
    }

    #[test]
    fn words_carry_sentence_index() {
        let doc = Document::new("Hello world. How are you?");
        let words = doc.words();
        assert_eq!(words.len(), 5);
        assert_eq!(words.iter().map(|w| w.sentence).collect::<Vec<_>>(), vec![0, 0, 1, 1, 1]);
        assert_eq!(doc.slice(words[4].start, words[4].end), "you?");
    }

    #[test]
    fn replace_bumps_revision_and_journals() {
        let mut doc = Document::new("Hello world.");
        doc.replace(12, 12, " Bye now.").unwrap();
        assert_eq!(doc.text(), "Hello world. Bye now.");
        assert_eq!(doc.revision(), 1);
        assert_eq!(doc.sentences().len(), 2);
        assert_eq!(doc.journal()[0].inserted, " Bye now.");
        assert!(doc.replace(5, 99, "").is_err());
        assert_eq!(doc.revision(), 1);
    }

    #[test]
    fn multibyte_offsets_are_chars() {
        let mut doc = Document::new("Über straße. Ok.");
        assert_eq!(doc.sentences()[0].end, 12);
        assert_eq!(doc.sentence_text(0).unwrap(), "Über straße.");
        doc.replace(0, 4, "Unter").unwrap();
        assert_eq!(doc.text(), "Unter straße. Ok.");
    }

    #[test]
    fn cursor_at_sentence_end() {
        let doc = Document::new("Hello world. How are you");
        let layout = layout_monospace(&doc, &LayoutConfig::default()).unwrap();
        let c = cursor_for_sentence(&doc, &layout, 0).unwrap();
        assert_eq!(c.offset, 12);
        assert_eq!(doc.slice(c.offset - 1, c.offset), ".");
        let tail = cursor_for_sentence(&doc, &layout, 1).unwrap();
        assert_eq!(tail.offset, doc.char_len());
        let last = layout.word_boxes.last().unwrap();
        assert_eq!(tail.point.x, last.rect.right());
        assert_eq!(
            cursor_for_sentence(&doc, &layout, 2),
            Err(TextError::OutOfRange { index: 2, len: 2 })
        );
    }

    #[test]
    fn cursor_shifts_by_inserted_length() {
        // Re-segmenting after an insertion must move the cursor by exactly the
        // inserted length; the expectation is derived by searching the new text.
        let mut doc = Document::new("Alpha beta. Gamma delta. Tail");
        let layout = layout_monospace(&doc, &LayoutConfig::default()).unwrap();
        let before = cursor_for_sentence(&doc, &layout, 1).unwrap();
        let inserted = " Epsilon zeta.";
        doc.replace(before.offset, before.offset, inserted).unwrap();
        let layout = layout_monospace(&doc, &LayoutConfig::default()).unwrap();
        let after = cursor_for_sentence(&doc, &layout, 2).unwrap();
        let expected = doc.text().find("zeta.").unwrap() + "zeta.".len();
        assert_eq!(after.offset, expected);
        assert_eq!(after.offset, before.offset + inserted.chars().count());
    }

    #[test]
    fn canonical_is_stable() {
        let doc = Document::new("A b. C");
        assert_eq!(doc.canonical(), "document revision=0 chars=6\nsentence 0 4 .\nsentence 5 6 last\ntext\nA b. C");
    }
}
