//! The bubble track: placeholders, streamed words, sentence merging, pinch
//! retraction, and the word buffer behind one gesture.
//!
//! Bubbles are always a run of filled bubbles (words and sentences)
//! followed by empty placeholders. Streamed words fill the oldest
//! placeholder or queue in the buffer. Retraction works tail-first, and a
//! word removed from a filled bubble goes back to the *front* of the buffer
//! so the next spread restores the same words.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::command::EngineCommand;
use crate::rng::{sample_placeholder_width, SplitMix64};
use crate::text::{is_terminator, CursorPos, Document, Edit, TextError, WordSpan};

/// Placeholder blink duration, attached to freshly added placeholders.
pub const BLINK_MS: u32 = 150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorRole {
    GenerateBlue,
    SentenceGreen,
    RemoveRed,
    RemoveRedTransitional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state")]
pub enum Bubble {
    Placeholder { width: f64, blink: bool },
    Word { text: String },
    Sentence { words: Vec<String> },
}

impl Bubble {
    pub fn color(&self) -> ColorRole {
        match self {
            Bubble::Sentence { .. } => ColorRole::SentenceGreen,
            _ => ColorRole::GenerateBlue,
        }
    }

    /// Word slots this bubble occupies; a placeholder counts as one.
    pub fn units(&self) -> usize {
        match self {
            Bubble::Placeholder { .. } | Bubble::Word { .. } => 1,
            Bubble::Sentence { words } => words.len(),
        }
    }

    pub fn words(&self) -> &[String] {
        match self {
            Bubble::Placeholder { .. } => &[],
            Bubble::Word { text } => std::slice::from_ref(text),
            Bubble::Sentence { words } => words,
        }
    }

    pub fn is_placeholder(&self) -> bool {
        matches!(self, Bubble::Placeholder { .. })
    }
}

const CLOSERS: [char; 6] = ['"', '\'', '\u{201D}', '\u{2019}', ')', ']'];

/// True when `word` ends a sentence: its last character, ignoring closing
/// quotes and brackets, is a terminator.
pub fn ends_sentence(word: &str) -> bool {
    word.trim_end_matches(CLOSERS).chars().last().is_some_and(is_terminator)
}

fn is_punctuation_only(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric())
}

/// Word accounting for the conservation identity
/// `received == in bubbles + in buffer + committed + discarded`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WordCounters {
    pub received: u64,
    pub committed: u64,
    pub discarded: u64,
    pub stale_chunks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleTrack {
    pub cursor: CursorPos,
    pub bubbles: Vec<Bubble>,
    pub buffer: VecDeque<String>,
    pub pending_request: Option<u64>,
    /// Document words before the cursor that a pinch may mark, in order.
    removable: Vec<WordSpan>,
    /// How many of the trailing `removable` words are marked.
    marked: usize,
    /// Text before the cursor, sent as the start of every extend prompt.
    prefix: String,
    partial: String,
    held_prefix: String,
    rng: SplitMix64,
    next_request_id: u64,
    /// Index of the first bubble of a sentence that is being pinched apart.
    dissolving: Option<usize>,
    snap: bool,
    pub cursor_visible: bool,
    pub counters: WordCounters,
    closed: bool,
}

impl BubbleTrack {
    pub fn new(doc: &Document, cursor: CursorPos, rng_seed: u64, first_request_id: u64) -> Self {
        let removable = doc.words().into_iter().filter(|w| w.end <= cursor.offset).collect();
        Self {
            cursor,
            bubbles: Vec::new(),
            buffer: VecDeque::new(),
            pending_request: None,
            removable,
            marked: 0,
            prefix: doc.slice(0, cursor.offset).to_string(),
            partial: String::new(),
            held_prefix: String::new(),
            rng: SplitMix64::new(rng_seed),
            next_request_id: first_request_id,
            dissolving: None,
            snap: false,
            cursor_visible: true,
            counters: WordCounters::default(),
            closed: false,
        }
    }

    /// Next request id this track would hand out.
    pub fn next_request_id(&self) -> u64 {
        self.next_request_id
    }

    /// Signed length: word slots in bubbles, minus marked document words.
    pub fn signed_len(&self) -> i64 {
        self.bubble_units() as i64 - self.marked as i64
    }

    pub fn bubble_units(&self) -> usize {
        self.bubbles.iter().map(Bubble::units).sum()
    }

    pub fn words_in_bubbles(&self) -> usize {
        self.bubbles.iter().map(|b| b.words().len()).sum()
    }

    pub fn empty_placeholders(&self) -> usize {
        self.bubbles.iter().filter(|b| b.is_placeholder()).count()
    }

    fn first_placeholder(&self) -> Option<usize> {
        self.bubbles.iter().position(Bubble::is_placeholder)
    }

    /// Generated words in order: filled bubbles, then the buffer.
    pub fn generated_words(&self) -> Vec<&str> {
        self.bubbles
            .iter()
            .flat_map(|b| b.words().iter().map(String::as_str))
            .collect()
    }

    /// Marked document words in document order; the first is the newest mark.
    pub fn marked_words(&self) -> &[WordSpan] {
        &self.removable[self.removable.len() - self.marked..]
    }

    pub fn is_snapping(&self) -> bool {
        self.snap
    }

    pub fn conservation_holds(&self) -> bool {
        let c = &self.counters;
        c.received == self.words_in_bubbles() as u64 + self.buffer.len() as u64 + c.committed + c.discarded
    }

    fn clear_blink(&mut self) {
        for b in &mut self.bubbles {
            if let Bubble::Placeholder { blink, .. } = b {
                *blink = false;
            }
        }
    }

    /// Grows or shrinks the track to `target` word slots (negative values
    /// mark document words for removal).
    pub fn set_target(&mut self, target: i64) -> Vec<EngineCommand> {
        self.clear_blink();
        let delta = target - self.signed_len();
        if delta == 0 || self.closed {
            return Vec::new();
        }
        if delta < 0 {
            return self.retract(delta.unsigned_abs() as usize);
        }
        let mut grow = delta as usize;
        let unmark = grow.min(self.marked);
        self.marked -= unmark;
        grow -= unmark;
        for _ in 0..grow {
            let width = sample_placeholder_width(&mut self.rng);
            self.bubbles.push(Bubble::Placeholder { width, blink: true });
        }
        let mut out = self.fill_from_buffer();
        out.extend(self.ensure_generation());
        out
    }

    fn fill_from_buffer(&mut self) -> Vec<EngineCommand> {
        let mut out = Vec::new();
        while self.first_placeholder().is_some() {
            let Some(word) = self.buffer.pop_front() else { break };
            out.extend(self.place(word));
        }
        out
    }

    /// Puts a word into the oldest placeholder; a sentence-ending word
    /// merges the run of word bubbles before it into one sentence bubble.
    fn place(&mut self, word: String) -> Vec<EngineCommand> {
        let idx = self.first_placeholder().expect("caller checked for a placeholder");
        let terminal = ends_sentence(&word);
        self.bubbles[idx] = Bubble::Word { text: word };
        if terminal {
            self.merge_sentence(idx)
        } else {
            Vec::new()
        }
    }

    fn merge_sentence(&mut self, end: usize) -> Vec<EngineCommand> {
        let start = self.bubbles[..end]
            .iter()
            .rposition(|b| matches!(b, Bubble::Sentence { .. }))
            .map_or(0, |i| i + 1);
        let words: Vec<String> = self.bubbles.drain(start..=end).flat_map(|b| b.words().to_vec()).collect();
        self.bubbles.insert(start, Bubble::Sentence { words });
        self.dissolving = None;
        if self.snap {
            self.finish_snap(start)
        } else {
            Vec::new()
        }
    }

    /// Keeps everything up to and including the sentence bubble at `idx`
    /// and stops generating.
    fn finish_snap(&mut self, idx: usize) -> Vec<EngineCommand> {
        self.snap = false;
        for b in self.bubbles.drain(idx + 1..).rev().collect::<Vec<_>>() {
            for w in b.words().iter().rev() {
                self.buffer.push_front(w.clone());
            }
        }
        self.cancel_pending().into_iter().collect()
    }

    /// Halts generation after the first complete sentence of the track.
    pub fn snap_to_sentence(&mut self) -> Vec<EngineCommand> {
        if self.closed || self.marked > 0 {
            return Vec::new();
        }
        if let Some(idx) = self.bubbles.iter().position(|b| matches!(b, Bubble::Sentence { .. })) {
            self.snap = true;
            return self.finish_snap(idx);
        }
        self.snap = true;
        self.ensure_generation()
    }

    /// Leaves snap mode without trimming (the user resumed the gesture).
    pub fn cancel_snap(&mut self) {
        self.snap = false;
    }

    fn cancel_pending(&mut self) -> Option<EngineCommand> {
        self.partial.clear();
        self.held_prefix.clear();
        self.pending_request.take().map(|request_id| EngineCommand::CancelGeneration { request_id })
    }

    /// Issues a request when empty placeholders outnumber buffered words
    /// and nothing is in flight. In snap mode a placeholder is added
    /// whenever the track runs out before a sentence completes.
    fn ensure_generation(&mut self) -> Vec<EngineCommand> {
        let mut out = Vec::new();
        while self.snap && self.first_placeholder().is_none() {
            let width = sample_placeholder_width(&mut self.rng);
            self.bubbles.push(Bubble::Placeholder { width, blink: true });
            out.extend(self.fill_from_buffer());
        }
        if self.pending_request.is_none() && self.empty_placeholders() > self.buffer.len() {
            let request_id = self.next_request_id;
            self.next_request_id += 1;
            self.pending_request = Some(request_id);
            out.push(EngineCommand::RequestGeneration { request_id, paragraph: self.prompt_paragraph() });
        }
        out
    }

    /// Text preceding the cursor plus every word generated so far.
    pub fn prompt_paragraph(&self) -> String {
        let mut p = self.prefix.clone();
        for w in self.generated_words().into_iter().chain(self.buffer.iter().map(String::as_str)) {
            if !p.is_empty() {
                p.push(' ');
            }
            p.push_str(w);
        }
        p
    }

    /// Feeds one streamed text delta for `request_id`.
    pub fn ingest_chunk(&mut self, request_id: u64, delta: &str, done: bool) -> Vec<EngineCommand> {
        if self.closed || self.pending_request != Some(request_id) {
            self.counters.stale_chunks += 1;
            return Vec::new();
        }
        if delta.is_empty() && !done {
            return Vec::new();
        }
        self.clear_blink();
        self.partial.extend(delta.chars().filter(|c| !c.is_control() || c.is_whitespace()));
        let tokens: Vec<String> = if done {
            let all = std::mem::take(&mut self.partial);
            all.split_whitespace().map(str::to_string).collect()
        } else {
            match self.partial.rfind(char::is_whitespace) {
                Some(pos) => {
                    let ws_len = self.partial[pos..].chars().next().map_or(1, char::len_utf8);
                    let rest = self.partial.split_off(pos + ws_len);
                    let head = std::mem::replace(&mut self.partial, rest);
                    head.split_whitespace().map(str::to_string).collect()
                }
                None => Vec::new(),
            }
        };
        let mut out = Vec::new();
        for token in tokens {
            out.extend(self.accept_token(token));
        }
        if done {
            self.pending_request = None;
            self.held_prefix.clear();
            out.extend(self.ensure_generation());
        }
        out
    }

    fn accept_token(&mut self, token: String) -> Vec<EngineCommand> {
        if is_punctuation_only(&token) {
            return self.attach_to_previous(&token);
        }
        let word = std::mem::take(&mut self.held_prefix) + &token;
        self.counters.received += 1;
        if self.buffer.is_empty() && self.first_placeholder().is_some() {
            let mut out = self.place(word);
            if self.snap {
                out.extend(self.ensure_generation());
            }
            out
        } else {
            self.buffer.push_back(word);
            Vec::new()
        }
    }

    /// Attaches a punctuation-only token to the most recently received word;
    /// with no such word it is held as a prefix for the next one.
    fn attach_to_previous(&mut self, token: &str) -> Vec<EngineCommand> {
        if let Some(last) = self.buffer.back_mut() {
            last.push_str(token);
            return Vec::new();
        }
        let filled = self.first_placeholder().unwrap_or(self.bubbles.len());
        if filled == 0 {
            self.held_prefix.push_str(token);
            return Vec::new();
        }
        let idx = filled - 1;
        match &mut self.bubbles[idx] {
            Bubble::Word { text } => {
                text.push_str(token);
                if ends_sentence(text) {
                    return self.merge_sentence(idx);
                }
            }
            Bubble::Sentence { words } => {
                if let Some(w) = words.last_mut() {
                    w.push_str(token);
                }
            }
            Bubble::Placeholder { .. } => unreachable!("filled bubbles precede placeholders"),
        }
        Vec::new()
    }

    /// Shrinks the track by `n` word slots, tail first.
    pub fn retract(&mut self, n: usize) -> Vec<EngineCommand> {
        self.clear_blink();
        let mut out = Vec::new();
        if self.closed {
            return out;
        }
        for _ in 0..n {
            match self.bubbles.pop() {
                Some(Bubble::Placeholder { .. }) => {}
                Some(Bubble::Word { text }) => {
                    self.buffer.push_front(text);
                    out.extend(self.check_dissolved());
                }
                Some(Bubble::Sentence { mut words }) => {
                    let last = words.pop().expect("sentence bubbles are non-empty");
                    self.buffer.push_front(last);
                    let start = self.bubbles.len();
                    self.bubbles.extend(words.into_iter().map(|text| Bubble::Word { text }));
                    self.dissolving = Some(start);
                    out.extend(self.check_dissolved());
                }
                None => {
                    if self.marked < self.removable.len() {
                        self.marked += 1;
                    }
                }
            }
        }
        if self.pending_request.is_some() && self.empty_placeholders() == 0 {
            out.extend(self.cancel_pending());
        }
        out
    }

    /// Once every word of a pinched sentence is gone, its buffered words
    /// are dropped so the next spread asks for a fresh sentence.
    fn check_dissolved(&mut self) -> Option<EngineCommand> {
        match self.dissolving {
            Some(start) if self.bubbles.len() <= start => {
                self.dissolving = None;
                self.counters.discarded += self.buffer.len() as u64;
                self.buffer.clear();
                self.cancel_pending()
            }
            _ => None,
        }
    }

    /// Replaces a filled bubble's text (synonym or sentence rewrite).
    pub fn replace_bubble(&mut self, bubble: usize, text: &str) -> bool {
        let new_words: Vec<String> = text.split_whitespace().map(str::to_string).collect();
        if self.closed || new_words.is_empty() {
            return false;
        }
        let Some(b) = self.bubbles.get_mut(bubble) else { return false };
        let old = b.words().len() as u64;
        if old == 0 {
            return false;
        }
        let replacement = match b {
            Bubble::Word { .. } if new_words.len() == 1 => Bubble::Word { text: new_words[0].clone() },
            Bubble::Sentence { .. } if ends_sentence(new_words.last().expect("non-empty")) => {
                Bubble::Sentence { words: new_words.clone() }
            }
            _ => return false,
        };
        *b = replacement;
        self.counters.discarded += old;
        self.counters.received += new_words.len() as u64;
        true
    }

    /// Applies the track to the document: inserts the generated words at the
    /// cursor, or deletes the marked words. Closes the track.
    pub fn commit(&mut self, doc: &mut Document) -> Result<(Option<Edit>, Vec<EngineCommand>), TextError> {
        let mut out: Vec<EngineCommand> = self.cancel_pending().into_iter().collect();
        if self.closed {
            return Ok((None, out));
        }
        let edit = if self.marked > 0 {
            let marked = self.marked_words();
            Some(delete_words(doc, marked[0].start, marked[marked.len() - 1].end)?)
        } else {
            let words = self.generated_words();
            if words.is_empty() {
                None
            } else {
                Some(insert_words(doc, self.cursor.offset, &words)?)
            }
        };
        self.counters.committed += self.words_in_bubbles() as u64;
        self.counters.discarded += self.buffer.len() as u64;
        self.close();
        out.shrink_to_fit();
        Ok((edit, out))
    }

    /// Discards the track; the document is untouched.
    pub fn revert(&mut self) -> Vec<EngineCommand> {
        let out = self.cancel_pending().into_iter().collect();
        if !self.closed {
            self.counters.discarded += (self.words_in_bubbles() + self.buffer.len()) as u64;
            self.close();
        }
        out
    }

    fn close(&mut self) {
        self.bubbles.clear();
        self.buffer.clear();
        self.marked = 0;
        self.dissolving = None;
        self.snap = false;
        self.cursor_visible = false;
        self.closed = true;
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Canonical JSON used to compare tracks across runs.
    pub fn serialize(&self) -> String {
        serde_json::to_string(self).expect("track serializes")
    }
}

fn insert_words(doc: &mut Document, offset: usize, words: &[&str]) -> Result<Edit, TextError> {
    let mut inserted = words.join(" ");
    let before = offset.checked_sub(1).map(|i| doc.slice(i, offset).to_string());
    let after = doc.slice(offset, (offset + 1).min(doc.char_len())).to_string();
    if before.as_deref().is_some_and(|c| !c.trim().is_empty()) {
        inserted.insert(0, ' ');
    }
    if !after.is_empty() && !after.trim().is_empty() {
        inserted.push(' ');
    }
    doc.replace(offset, offset, &inserted).cloned()
}

/// Deletes `start..end` and normalizes the whitespace at the seam: a single
/// space mid-paragraph, the existing break at a paragraph boundary, nothing
/// at either end of the text.
fn delete_words(doc: &mut Document, start: usize, end: usize) -> Result<Edit, TextError> {
    let chars: Vec<char> = doc.text().chars().collect();
    let mut left = start;
    while left > 0 && chars[left - 1].is_whitespace() {
        left -= 1;
    }
    let mut right = end;
    while right < chars.len() && chars[right].is_whitespace() {
        right += 1;
    }
    let left_ws: String = chars[left..start].iter().collect();
    let right_ws: String = chars[end..right].iter().collect();
    let joiner = if left == 0 || right == chars.len() {
        String::new()
    } else if right_ws.contains('\n') {
        right_ws
    } else if left_ws.contains('\n') {
        left_ws
    } else {
        " ".to_string()
    };
    doc.replace(left, right, &joiner).cloned()
}
