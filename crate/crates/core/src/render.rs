//! Display models for the three feedback variants.
//!
//! The renderer reflows the document with the track's bubbles inserted at
//! the cursor, using the same greedy monospace wrap as the document layout,
//! and emits drawable primitives in page coordinates.

use serde::{Deserialize, Serialize};

use crate::geom::{Point, Rect};
use crate::gesture::LongPressTarget;
use crate::stream::{Bubble, BubbleTrack, ColorRole, BLINK_MS};
use crate::text::{count_newlines, Document, Flow, LayoutConfig, LayoutMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[default]
    Bubbles,
    Lines,
    NoVis,
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bubbles" => Ok(Variant::Bubbles),
            "lines" => Ok(Variant::Lines),
            "novis" | "no_vis" => Ok(Variant::NoVis),
            other => Err(format!("unknown variant {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarColor {
    Green,
    Red,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    Text {
        x: f64,
        y: f64,
        text: String,
    },
    /// Rounded rectangle; `bubble` indexes the track for generated bubbles
    /// and is absent for marked document words.
    Bubble {
        rect: Rect,
        role: ColorRole,
        #[serde(skip_serializing_if = "Option::is_none")]
        bubble: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        label: Option<String>,
        #[serde(skip_serializing_if = "Option::is_none")]
        blink_ms: Option<u32>,
    },
    Bar {
        x: f64,
        y: f64,
        length: f64,
        color: BarColor,
    },
    Cursor {
        x: f64,
        y: f64,
        height: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplayModel {
    pub variant: Variant,
    pub elements: Vec<Element>,
}

impl DisplayModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("display model serializes")
    }

    pub fn bars(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter().filter(|e| matches!(e, Element::Bar { .. }))
    }
}

/// One generated item placed in the reflowed page.
#[derive(Debug, Clone)]
struct PlacedItem {
    bubble: usize,
    rect: Rect,
    text: Option<String>,
    line: usize,
}

struct Composition {
    doc_words: Vec<(Rect, String, Option<ColorRole>)>,
    items: Vec<PlacedItem>,
    marked: Vec<Rect>,
    cursor: Option<Rect>,
}

fn layout_config(layout: &LayoutMap) -> LayoutConfig {
    LayoutConfig {
        char_width_px: layout.char_width,
        line_height_px: layout.line_height,
        page_width_px: layout.page_width,
    }
}

fn compose(track: Option<&BubbleTrack>, doc: &Document, layout: &LayoutMap, include_placeholders: bool) -> Composition {
    let cfg = layout_config(layout);
    let cw = cfg.char_width_px;
    let chars: Vec<char> = doc.text().chars().collect();
    let mut flow = Flow::new(cfg);
    let marked = track.map(|t| t.marked_words()).unwrap_or(&[]);
    let mut comp = Composition { doc_words: Vec::new(), items: Vec::new(), marked: Vec::new(), cursor: None };
    let cursor_offset = track.map(|t| t.cursor.offset);
    let mut inserted = track.is_none();
    let mut prev_end = 0;

    let insert = |flow: &mut Flow, comp: &mut Composition| {
        let Some(track) = track else { return };
        for (i, b) in track.bubbles.iter().enumerate() {
            match b {
                Bubble::Placeholder { width, .. } => {
                    if include_placeholders {
                        let rect = flow.place(*width);
                        comp.items.push(PlacedItem { bubble: i, rect, text: None, line: flow.line() });
                    }
                }
                _ => {
                    for w in b.words() {
                        let rect = flow.place(w.chars().count() as f64 * cw);
                        comp.items.push(PlacedItem { bubble: i, rect, text: Some(w.clone()), line: flow.line() });
                    }
                }
            }
        }
    };

    for w in doc.words() {
        if !inserted && cursor_offset.is_some_and(|off| w.start >= off) {
            insert(&mut flow, &mut comp);
            inserted = true;
        }
        flow.newlines(count_newlines(&chars, prev_end, w.start));
        let rect = flow.place((w.end - w.start) as f64 * cw);
        let role = marked.iter().position(|m| m.start == w.start).map(|i| {
            if i == 0 {
                ColorRole::RemoveRedTransitional
            } else {
                ColorRole::RemoveRed
            }
        });
        if role.is_some() {
            comp.marked.push(rect);
        }
        if cursor_offset == Some(w.end) {
            comp.cursor = Some(rect);
        }
        comp.doc_words.push((rect, chars[w.start..w.end].iter().collect(), role));
        prev_end = w.end;
    }
    if !inserted {
        insert(&mut flow, &mut comp);
    }
    comp
}

/// Builds the display model for a variant. Pure: identical inputs give an
/// identical model.
pub fn render(track: Option<&BubbleTrack>, doc: &Document, layout: &LayoutMap, variant: Variant) -> DisplayModel {
    let comp = compose(track, doc, layout, variant != Variant::NoVis);
    let mut elements = Vec::new();
    let text = |rect: &Rect, s: &str| Element::Text { x: rect.x, y: rect.y, text: s.to_string() };

    for (rect, word, role) in &comp.doc_words {
        if variant == Variant::NoVis && role.is_some() {
            continue;
        }
        if let (Variant::Bubbles, Some(role)) = (variant, role) {
            elements.push(Element::Bubble { rect: *rect, role: *role, bubble: None, label: None, blink_ms: None });
        }
        elements.push(text(rect, word));
    }

    match variant {
        Variant::Bubbles => {
            let mut i = 0;
            while i < comp.items.len() {
                let item = &comp.items[i];
                let Some(bubble) = track.and_then(|t| t.bubbles.get(item.bubble)) else { break };
                match bubble {
                    Bubble::Placeholder { blink, .. } => {
                        elements.push(Element::Bubble {
                            rect: item.rect,
                            role: ColorRole::GenerateBlue,
                            bubble: Some(item.bubble),
                            label: None,
                            blink_ms: blink.then_some(BLINK_MS),
                        });
                        i += 1;
                    }
                    _ => {
                        // one rounded rect per line segment of the bubble
                        let mut j = i;
                        while j < comp.items.len()
                            && comp.items[j].bubble == item.bubble
                            && comp.items[j].line == item.line
                        {
                            j += 1;
                        }
                        let first = comp.items[i].rect;
                        let last = comp.items[j - 1].rect;
                        let label: Vec<&str> = comp.items[i..j].iter().filter_map(|p| p.text.as_deref()).collect();
                        elements.push(Element::Bubble {
                            rect: Rect::new(first.x, first.y, last.right() - first.x, first.h),
                            role: bubble.color(),
                            bubble: Some(item.bubble),
                            label: Some(label.join(" ")),
                            blink_ms: None,
                        });
                        i = j;
                    }
                }
            }
        }
        Variant::Lines => {
            for item in &comp.items {
                if let Some(t) = &item.text {
                    elements.push(text(&item.rect, t));
                }
            }
            if let Some(first) = comp.items.first() {
                let length = comp.items.iter().map(|p| p.rect.w).sum();
                elements.push(Element::Bar { x: first.rect.x, y: first.rect.bottom(), length, color: BarColor::Green });
            } else if let (Some(first), Some(t)) = (comp.marked.first(), track) {
                let m = t.marked_words();
                let length = (m[m.len() - 1].end - m[0].start) as f64 * layout.char_width;
                elements.push(Element::Bar { x: first.x, y: first.bottom(), length, color: BarColor::Red });
            }
        }
        Variant::NoVis => {
            for item in &comp.items {
                if let Some(t) = &item.text {
                    elements.push(text(&item.rect, t));
                }
            }
        }
    }

    if let (Some(track), Some(rect)) = (track, comp.cursor) {
        if track.cursor_visible {
            elements.push(Element::Cursor { x: rect.right(), y: rect.y, height: rect.h });
        }
    }
    DisplayModel { variant, elements }
}

/// Filled bubble under `p` in the bubbles layout, if any.
pub fn hit_test(track: &BubbleTrack, doc: &Document, layout: &LayoutMap, p: Point) -> Option<LongPressTarget> {
    let comp = compose(Some(track), doc, layout, true);
    let item = comp.items.iter().find(|it| it.text.is_some() && it.rect.contains(p))?;
    match &track.bubbles[item.bubble] {
        Bubble::Word { text } => Some(LongPressTarget::Word { bubble: item.bubble, text: text.clone() }),
        Bubble::Sentence { words } => Some(LongPressTarget::Sentence { bubble: item.bubble, text: words.join(" ") }),
        Bubble::Placeholder { .. } => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{cursor_for_sentence, layout_monospace};

    fn setup(text: &str) -> (Document, LayoutMap, BubbleTrack) {
        let doc = Document::new(text);
        let layout = layout_monospace(&doc, &LayoutConfig::default()).unwrap();
        let last = doc.sentences().len() - 1;
        let cursor = cursor_for_sentence(&doc, &layout, last).unwrap();
        let track = BubbleTrack::new(&doc, cursor, 9, 1);
        (doc, layout, track)
    }

    fn placeholder_widths(t: &BubbleTrack) -> Vec<f64> {
        t.bubbles
            .iter()
            .filter_map(|b| match b {
                Bubble::Placeholder { width, .. } => Some(*width),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn bubbles_variant_draws_placeholders() {
        let (doc, layout, mut t) = setup("Hi there.");
        t.set_target(3);
        let m = render(Some(&t), &doc, &layout, Variant::Bubbles);
        let rects: Vec<(f64, ColorRole, Option<u32>)> = m
            .elements
            .iter()
            .filter_map(|e| match e {
                Element::Bubble { rect, role, blink_ms, .. } => Some((rect.w, *role, *blink_ms)),
                _ => None,
            })
            .collect();
        let widths = placeholder_widths(&t);
        assert_eq!(rects.len(), 3);
        for (r, w) in rects.iter().zip(&widths) {
            assert_eq!(*r, (*w, ColorRole::GenerateBlue, Some(BLINK_MS)));
        }
        assert_eq!(m.elements.iter().filter(|e| matches!(e, Element::Cursor { .. })).count(), 1);
    }

    #[test]
    fn lines_variant_draws_one_bar() {
        let (doc, layout, mut t) = setup("Hi there.");
        t.set_target(3);
        let m = render(Some(&t), &doc, &layout, Variant::Lines);
        let bars: Vec<_> = m.bars().collect();
        assert_eq!(bars.len(), 1);
        let total: f64 = placeholder_widths(&t).iter().sum();
        assert!(matches!(bars[0], Element::Bar { length, color: BarColor::Green, .. } if *length == total));
        assert!(!m.elements.iter().any(|e| matches!(e, Element::Bubble { .. })));
    }

    #[test]
    fn novis_is_text_and_cursor_only() {
        let (doc, layout, mut t) = setup("Hi there.");
        t.set_target(3);
        t.ingest_chunk(1, "New words ", false);
        let m = render(Some(&t), &doc, &layout, Variant::NoVis);
        assert!(m.elements.iter().all(|e| matches!(e, Element::Text { .. } | Element::Cursor { .. })));
        let words: Vec<&str> = m
            .elements
            .iter()
            .filter_map(|e| match e {
                Element::Text { text, .. } => Some(text.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(words, ["Hi", "there.", "New", "words"]);
    }

    #[test]
    fn sentence_bubble_is_green_and_labelled() {
        let (doc, layout, mut t) = setup("Hi there.");
        t.set_target(4);
        t.ingest_chunk(1, "The sky is blue.", true);
        let m = render(Some(&t), &doc, &layout, Variant::Bubbles);
        let greens: Vec<_> = m
            .elements
            .iter()
            .filter(|e| matches!(e, Element::Bubble { role: ColorRole::SentenceGreen, .. }))
            .collect();
        assert_eq!(greens.len(), 1);
        assert!(matches!(greens[0], Element::Bubble { label: Some(l), .. } if l == "The sky is blue."));
    }

    #[test]
    fn removal_marks() {
        let (doc, layout, mut t) = setup("Keep this. Drop me.");
        t.set_target(-2);
        let m = render(Some(&t), &doc, &layout, Variant::Bubbles);
        let roles: Vec<ColorRole> = m
            .elements
            .iter()
            .filter_map(|e| match e {
                Element::Bubble { role, .. } => Some(*role),
                _ => None,
            })
            .collect();
        assert_eq!(roles, [ColorRole::RemoveRedTransitional, ColorRole::RemoveRed]);
        let lines = render(Some(&t), &doc, &layout, Variant::Lines);
        let bars: Vec<_> = lines.bars().collect();
        assert_eq!(bars.len(), 1);
        assert!(matches!(bars[0], Element::Bar { color: BarColor::Red, length, .. } if *length == 8.0 * 8.0));
        let novis = render(Some(&t), &doc, &layout, Variant::NoVis);
        assert_eq!(novis.elements.iter().filter(|e| matches!(e, Element::Text { .. })).count(), 2);
    }

    #[test]
    fn hit_test_finds_word_bubble() {
        let (doc, layout, mut t) = setup("Hi there.");
        t.set_target(2);
        t.ingest_chunk(1, "grappled hard ", false);
        let m = render(Some(&t), &doc, &layout, Variant::Bubbles);
        let rect = m
            .elements
            .iter()
            .find_map(|e| match e {
                Element::Bubble { rect, bubble: Some(0), .. } => Some(*rect),
                _ => None,
            })
            .unwrap();
        let p = Point::new(rect.x + 1.0, rect.y + 1.0);
        assert_eq!(
            hit_test(&t, &doc, &layout, p),
            Some(LongPressTarget::Word { bubble: 0, text: "grappled".into() })
        );
        assert_eq!(hit_test(&t, &doc, &layout, Point::new(1.0, 1.0)), None);
    }

    #[test]
    fn no_track_renders_plain_text() {
        let doc = Document::new("Only text here.");
        let layout = layout_monospace(&doc, &LayoutConfig::default()).unwrap();
        for v in [Variant::Bubbles, Variant::Lines, Variant::NoVis] {
            let m = render(None, &doc, &layout, v);
            assert_eq!(m.elements.len(), 3);
        }
    }
}
