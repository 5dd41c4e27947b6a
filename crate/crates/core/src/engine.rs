//! The single-writer engine: one ordered input stream (touches, token
//! chunks, confirm/reject) drives the gesture session, the bubble track and
//! the document, and yields [`EngineCommand`]s.

use serde::{Deserialize, Serialize};

use crate::command::EngineCommand;
use crate::gesture::{
    detect_long_press, DeviceProfile, GestureError, GestureKind, GestureSession, Phase, TouchEvent, TouchKind,
};
use crate::render::{hit_test, render, DisplayModel, Variant};
use crate::rng::SplitMix64;
use crate::stream::{BubbleTrack, WordCounters};
use crate::text::{layout_monospace, Document, LayoutConfig, LayoutMap, TextError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Gesture(#[from] GestureError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error("token chunk for request {0}, which was never issued")]
    UnknownRequest(u64),
    #[error("input at t={t} precedes t={last}")]
    NonMonotonic { t: u64, last: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskEdge {
    Start,
    End,
}

/// One timestamped input to the engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EngineInput {
    Touch { kind: TouchKind, finger: u8, x: f64, y: f64 },
    TokenChunk { request_id: u64, delta: String, done: bool },
    Confirm,
    Reject,
    /// Swap a filled bubble's text for a chosen synonym or rewrite.
    Replace { bubble: usize, text: String },
    TaskMarker { task: String, edge: TaskEdge },
}

impl EngineInput {
    pub fn touch(kind: TouchKind, finger: u8, x: f64, y: f64) -> Self {
        EngineInput::Touch { kind, finger, x, y }
    }

    pub fn chunk(request_id: u64, delta: impl Into<String>, done: bool) -> Self {
        EngineInput::TokenChunk { request_id, delta: delta.into(), done }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub profile: DeviceProfile,
    pub layout: LayoutConfig,
    pub variant: Variant,
    pub seed: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { profile: DeviceProfile::default(), layout: LayoutConfig::default(), variant: Variant::Bubbles, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Engine {
    cfg: EngineConfig,
    doc: Document,
    layout: LayoutMap,
    session: GestureSession,
    track: Option<BubbleTrack>,
    next_request_id: u64,
    gestures: u64,
    contact: Vec<TouchEvent>,
    long_press_fired: bool,
    last_display: Option<DisplayModel>,
    last_t: Option<u64>,
    closed_counters: WordCounters,
    stray_chunks: u64,
}

impl Engine {
    pub fn new(cfg: EngineConfig, doc: Document) -> Result<Self, EngineError> {
        cfg.profile.validate()?;
        let layout = layout_monospace(&doc, &cfg.layout)?;
        Ok(Self {
            cfg,
            doc,
            layout,
            session: GestureSession::new(),
            track: None,
            next_request_id: 1,
            gestures: 0,
            contact: Vec::new(),
            long_press_fired: false,
            last_display: None,
            last_t: None,
            closed_counters: WordCounters::default(),
            stray_chunks: 0,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn document(&self) -> &Document {
        &self.doc
    }

    pub fn layout(&self) -> &LayoutMap {
        &self.layout
    }

    pub fn session(&self) -> &GestureSession {
        &self.session
    }

    pub fn track(&self) -> Option<&BubbleTrack> {
        self.track.as_ref()
    }

    /// Id the next generation request will get.
    pub fn next_request_id(&self) -> u64 {
        self.track.as_ref().map_or(self.next_request_id, BubbleTrack::next_request_id)
    }

    pub fn display(&self) -> DisplayModel {
        render(self.track.as_ref(), &self.doc, &self.layout, self.cfg.variant)
    }

    /// Word counters summed over every track this engine has run.
    pub fn counters(&self) -> WordCounters {
        let mut c = self.closed_counters;
        if let Some(t) = &self.track {
            c.received += t.counters.received;
            c.committed += t.counters.committed;
            c.discarded += t.counters.discarded;
            c.stale_chunks += t.counters.stale_chunks;
        }
        c.stale_chunks += self.stray_chunks;
        c
    }

    /// Handles one input. On error, nothing observable has changed.
    pub fn handle(&mut self, t: u64, input: &EngineInput) -> Result<Vec<EngineCommand>, EngineError> {
        if let Some(last) = self.last_t {
            if t < last {
                return Err(EngineError::NonMonotonic { t, last });
            }
        }
        let mut out = match input {
            EngineInput::Touch { kind, finger, x, y } => {
                self.on_touch(TouchEvent::new(*kind, *finger, *x, *y, t))?
            }
            EngineInput::TokenChunk { request_id, delta, done } => {
                if *request_id >= self.next_request_id {
                    return Err(EngineError::UnknownRequest(*request_id));
                }
                match &mut self.track {
                    Some(track) => track.ingest_chunk(*request_id, delta, *done),
                    None => {
                        self.stray_chunks += 1;
                        Vec::new()
                    }
                }
            }
            EngineInput::Confirm => self.finish(true)?,
            EngineInput::Reject => self.finish(false)?,
            EngineInput::Replace { bubble, text } => {
                if let Some(track) = &mut self.track {
                    track.replace_bubble(*bubble, text);
                }
                Vec::new()
            }
            EngineInput::TaskMarker { .. } => Vec::new(),
        };
        self.last_t = Some(t);
        if let Some(track) = &self.track {
            self.next_request_id = track.next_request_id();
        }
        let model = self.display();
        if self.last_display.as_ref() != Some(&model) {
            self.last_display = Some(model.clone());
            out.push(EngineCommand::DisplayUpdate { model });
        }
        Ok(out)
    }

    fn on_touch(&mut self, ev: TouchEvent) -> Result<Vec<EngineCommand>, EngineError> {
        let prev_phase = self.session.phase;
        let prev_target = self.session.target_words;
        let fingers_before = self.session.fingers.len();
        let mut out = self.session.feed(&ev, &self.doc, &self.layout, &self.cfg.profile)?;

        match (prev_phase, self.session.phase) {
            (Phase::Armed, Phase::Active) => {
                let cursor = self.session.cursor.expect("active sessions have a cursor");
                let seed = SplitMix64::new(self.cfg.seed.wrapping_add(self.gestures)).next_u64();
                self.gestures += 1;
                self.track = Some(BubbleTrack::new(&self.doc, cursor, seed, self.next_request_id));
            }
            (Phase::Confirming, Phase::Active) => {
                if let Some(track) = &mut self.track {
                    track.cursor_visible = true;
                    track.cancel_snap();
                    // a snapped track may differ from the finger target
                    self.session.target_words = track.signed_len();
                }
            }
            (Phase::Active, Phase::Confirming) => {
                if let Some(track) = &mut self.track {
                    track.cursor_visible = false;
                    if out.contains(&EngineCommand::SnapToOneSentence) {
                        let snapped = track.snap_to_sentence();
                        out.extend(snapped);
                    }
                }
            }
            (Phase::Active, Phase::Active) if self.session.target_words != prev_target => {
                if let Some(track) = &mut self.track {
                    out.extend(track.set_target(self.session.target_words));
                }
            }
            _ => {}
        }

        let single_contact = self.session.phase == Phase::Confirming
            && (self.session.fingers.len() == 1 || (ev.kind == TouchKind::Up && fingers_before == 1));
        if single_contact {
            match ev.kind {
                TouchKind::Down => {
                    self.contact = vec![ev];
                    self.long_press_fired = false;
                }
                _ if !self.contact.is_empty() => self.contact.push(ev),
                _ => {}
            }
            if !self.long_press_fired && !self.contact.is_empty() {
                if let Some(track) = &self.track {
                    let hit = hit_test(track, &self.doc, &self.layout, self.contact[0].point);
                    if let Some(target) = detect_long_press(&self.contact, hit, &self.cfg.profile) {
                        self.long_press_fired = true;
                        out.push(EngineCommand::LongPress { target });
                    }
                }
            }
            if ev.kind == TouchKind::Up {
                self.contact.clear();
            }
        } else {
            self.contact.clear();
        }
        Ok(out)
    }

    fn finish(&mut self, accept: bool) -> Result<Vec<EngineCommand>, EngineError> {
        let mut probe = self.session.clone();
        if accept {
            probe.confirm()?;
        } else {
            probe.reject()?;
        }
        let mut out = Vec::new();
        let mut track = self.track.take();
        if let Some(track) = &mut track {
            if accept {
                let words = if track.marked_words().is_empty() {
                    track.words_in_bubbles() as i64
                } else {
                    -(track.marked_words().len() as i64)
                };
                let kind = if words < 0 { GestureKind::Pinch } else { self.session.kind };
                let (edit, cmds) = match track.commit(&mut self.doc) {
                    Ok(r) => r,
                    Err(e) => {
                        self.track = Some(track.clone());
                        return Err(e.into());
                    }
                };
                out.extend(cmds);
                if edit.is_some() {
                    self.layout = layout_monospace(&self.doc, &self.cfg.layout)?;
                }
                out.push(EngineCommand::Commit { revision: self.doc.revision(), kind, words });
            } else {
                out.extend(track.revert());
                out.push(EngineCommand::Revert);
            }
            let c = track.counters;
            self.closed_counters.received += c.received;
            self.closed_counters.committed += c.committed;
            self.closed_counters.discarded += c.discarded;
            self.closed_counters.stale_chunks += c.stale_chunks;
        } else {
            out.push(if accept {
                EngineCommand::Commit { revision: self.doc.revision(), kind: self.session.kind, words: 0 }
            } else {
                EngineCommand::Revert
            });
        }
        self.session = probe;
        self.contact.clear();
        Ok(out)
    }
}
