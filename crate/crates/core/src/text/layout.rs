use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Document, TextError};
use crate::geom::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub char_width_px: f64,
    pub line_height_px: f64,
    pub page_width_px: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self { char_width_px: 8.0, line_height_px: 24.0, page_width_px: 360.0 }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<(), TextError> {
        if !(self.char_width_px > 0.0) {
            return Err(TextError::InvalidLayout("char width must be positive"));
        }
        if !(self.line_height_px > 0.0) {
            return Err(TextError::InvalidLayout("line height must be positive"));
        }
        if !(self.page_width_px >= self.char_width_px) {
            return Err(TextError::InvalidLayout("page narrower than one character"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordBox {
    pub word: usize,
    pub sentence: usize,
    /// Character range of the word in the document.
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutMap {
    pub word_boxes: Vec<WordBox>,
    pub char_width: f64,
    pub line_height: f64,
    pub page_width: f64,
    pub line_count: usize,
    /// Words wider than the page; each sits alone on its line.
    pub overflowing: Vec<usize>,
}

impl LayoutMap {
    pub fn is_empty(&self) -> bool {
        self.word_boxes.is_empty()
    }

    /// Canonical box table, one row per word.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "layout char_width={} line_height={} page_width={} lines={} overflow={:?}",
            self.char_width, self.line_height, self.page_width, self.line_count, self.overflowing
        );
        for b in &self.word_boxes {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {} {} {}",
                b.word, b.sentence, b.start, b.end, b.line, b.rect.x, b.rect.y, b.rect.w, b.rect.h
            );
        }
        out
    }
}

/// Greedy line filler shared by the document layout and the display
/// renderer. Items are separated by one character width.
#[derive(Debug, Clone)]
pub struct Flow {
    cfg: LayoutConfig,
    line: usize,
    x: f64,
    line_used: bool,
    started: bool,
}

impl Flow {
    pub fn new(cfg: LayoutConfig) -> Self {
        Self { cfg, line: 0, x: 0.0, line_used: false, started: false }
    }

    /// Applies the newlines found between two items: one newline breaks the
    /// line, two or more also leave an empty line.
    pub fn newlines(&mut self, count: usize) {
        if count > 0 && self.started {
            self.line += count.min(2);
            self.x = 0.0;
            self.line_used = false;
        }
    }

    /// Places an item of the given width and returns its box.
    pub fn place(&mut self, width: f64) -> Rect {
        let cw = self.cfg.char_width_px;
        let mut left = if self.line_used { self.x + cw } else { 0.0 };
        if self.line_used && left + width > self.cfg.page_width_px {
            self.line += 1;
            left = 0.0;
        }
        self.x = left + width;
        self.line_used = true;
        self.started = true;
        Rect::new(left, self.line as f64 * self.cfg.line_height_px, width, self.cfg.line_height_px)
    }

    pub fn line(&self) -> usize {
        self.line
    }

    pub fn line_count(&self) -> usize {
        if self.started {
            self.line + 1
        } else {
            0
        }
    }
}

/// Number of `'\n'` characters in `chars[from..to]`.
pub(crate) fn count_newlines(chars: &[char], from: usize, to: usize) -> usize {
    chars[from.min(to)..to].iter().filter(|&&c| c == '\n').count()
}

/// Greedy monospace word wrap.
///
/// Words are separated by one character width. A newline forces a line
/// break and a blank line (two or more newlines) leaves an empty line.
/// A word longer than the page is placed alone on its own line and reported
/// in [`LayoutMap::overflowing`].
pub fn layout_monospace(doc: &Document, cfg: &LayoutConfig) -> Result<LayoutMap, TextError> {
    cfg.validate()?;
    let cw = cfg.char_width_px;
    let chars: Vec<char> = doc.text().chars().collect();
    let mut flow = Flow::new(*cfg);
    let mut boxes = Vec::new();
    let mut overflowing = Vec::new();
    let mut prev_end = 0usize;

    for w in doc.words() {
        flow.newlines(count_newlines(&chars, prev_end, w.start));
        let width = (w.end - w.start) as f64 * cw;
        if width > cfg.page_width_px {
            overflowing.push(boxes.len());
        }
        let rect = flow.place(width);
        boxes.push(WordBox {
            word: boxes.len(),
            sentence: w.sentence,
            start: w.start,
            end: w.end,
            line: flow.line(),
            rect,
        });
        prev_end = w.end;
    }

    Ok(LayoutMap {
        line_count: flow.line_count(),
        word_boxes: boxes,
        char_width: cw,
        line_height: cfg.line_height_px,
        page_width: cfg.page_width_px,
        overflowing,
    })
}
