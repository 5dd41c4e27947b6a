//! Two-finger gesture recognition.
//!
//! A [`GestureSession`] consumes [`TouchEvent`]s and tracks the gesture
//! phase, the anchor sentence picked on first touch, and the signed word
//! target derived from the change in finger distance.
//!
//! ```text
//!   Idle --Down(on text)--> Armed --Down--> Active --Up--> Confirming
//!    ^                        |                ^              |  |
//!    +-----------Up-----------+                +--2 fingers---+  |
//!    +---------------------confirm / reject----------------------+
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::command::EngineCommand;
use crate::geom::Point;
use crate::text::{cursor_for_sentence, CursorPos, Document, LayoutMap, SpiralIndex};

/// Distance change that maps to one word.
pub const DEFAULT_MM_PER_WORD: f64 = 1.75;
pub const DEFAULT_LONG_PRESS_MS: u64 = 500;
pub const DEFAULT_LONG_PRESS_SLOP_MM: f64 = 3.0;
pub const DEFAULT_SNAP_MAX_DURATION_MS: f64 = 400.0;
pub const DEFAULT_SNAP_MIN_VELOCITY_MM_S: f64 = 25.0;
/// CSS reference pixel density (96 px per inch).
pub const CSS_PX_PER_MM: f64 = 96.0 / 25.4;

/// Word counts within this distance of an integer snap to it, so float
/// drift in accumulated deltas cannot drop a word at an exact boundary.
const WORD_SNAP_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GestureError {
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid device profile: {0}")]
    InvalidProfile(&'static str),
}

fn protocol(msg: impl Into<String>) -> GestureError {
    GestureError::Protocol(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TouchKind {
    Down,
    Move,
    Up,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchEvent {
    pub kind: TouchKind,
    pub finger: u8,
    pub point: Point,
    pub t_ms: u64,
}

impl TouchEvent {
    pub fn new(kind: TouchKind, finger: u8, x: f64, y: f64, t_ms: u64) -> Self {
        Self { kind, finger, point: Point::new(x, y), t_ms }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceProfile {
    pub px_per_mm: f64,
    pub mm_per_word: f64,
    pub long_press_ms: u64,
    pub long_press_slop_mm: f64,
    pub snap_max_duration_ms: f64,
    pub snap_min_velocity_mm_s: f64,
}

impl Default for DeviceProfile {
    fn default() -> Self {
        Self {
            px_per_mm: CSS_PX_PER_MM,
            mm_per_word: DEFAULT_MM_PER_WORD,
            long_press_ms: DEFAULT_LONG_PRESS_MS,
            long_press_slop_mm: DEFAULT_LONG_PRESS_SLOP_MM,
            snap_max_duration_ms: DEFAULT_SNAP_MAX_DURATION_MS,
            snap_min_velocity_mm_s: DEFAULT_SNAP_MIN_VELOCITY_MM_S,
        }
    }
}

impl DeviceProfile {
    pub fn with_px_per_mm(px_per_mm: f64) -> Self {
        Self { px_per_mm, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), GestureError> {
        let checks = [
            (self.px_per_mm, "px_per_mm"),
            (self.mm_per_word, "mm_per_word"),
            (self.long_press_ms as f64, "long_press_ms"),
            (self.long_press_slop_mm, "long_press_slop_mm"),
            (self.snap_max_duration_ms, "snap_max_duration_ms"),
            (self.snap_min_velocity_mm_s, "snap_min_velocity_mm_s"),
        ];
        for (value, name) in checks {
            if !(value > 0.0) || !value.is_finite() {
                return Err(GestureError::InvalidProfile(name));
            }
        }
        Ok(())
    }

    pub fn px_to_mm(&self, px: f64) -> f64 {
        px / self.px_per_mm
    }

    /// Finger distance change, in px, that produces `words` words.
    pub fn words_to_px(&self, words: f64) -> f64 {
        words * self.mm_per_word * self.px_per_mm
    }
}

/// Converts a distance change into whole words, carrying the fractional
/// remainder (in words, always in `[0, 1)`) to the next call.
///
/// Summing the output over any split of a total delta gives the same count
/// as converting the total at once.
pub fn distance_to_words(delta_px: f64, profile: &DeviceProfile, residual: f64) -> (i64, f64) {
    let mut total = delta_px / profile.px_per_mm / profile.mm_per_word + residual;
    let nearest = total.round();
    if (total - nearest).abs() < WORD_SNAP_EPSILON {
        total = nearest;
    }
    let whole = total.floor();
    (whole as i64, total - whole)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    Idle,
    Armed,
    Active,
    Confirming,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GestureKind {
    Spread,
    Pinch,
    #[default]
    Undetermined,
}

/// What a long press landed on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum LongPressTarget {
    Word { bubble: usize, text: String },
    Sentence { bubble: usize, text: String },
}

/// Result of confirming or rejecting a session.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GestureOutcome {
    pub kind: GestureKind,
    pub target_words: i64,
    pub anchor: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GestureSession {
    pub phase: Phase,
    pub kind: GestureKind,
    pub anchor: Option<usize>,
    pub cursor: Option<CursorPos>,
    pub base_distance: f64,
    pub current_distance: f64,
    pub target_words: i64,
    pub residual: f64,
    pub subgesture_count: u32,
    pub started_at: Option<u64>,
    pub last_lift_at: Option<u64>,
    /// Start of the current two-finger contact episode.
    pub active_since: Option<u64>,
    /// Distance change accumulated by finished subgestures, in px.
    pub settled_delta_px: f64,
    pub fingers: BTreeMap<u8, Point>,
    pub last_t: Option<u64>,
}

impl GestureSession {
    pub fn new() -> Self {
        Self::default()
    }

    /// Signed distance change over the whole session, in px.
    pub fn cumulative_delta_px(&self) -> f64 {
        let live = if self.phase == Phase::Active { self.current_distance - self.base_distance } else { 0.0 };
        self.settled_delta_px + live
    }

    fn finger_distance(&self) -> Option<f64> {
        let mut it = self.fingers.values();
        match (it.next(), it.next()) {
            (Some(a), Some(b)) => Some(a.distance(*b)),
            _ => None,
        }
    }

    fn update_kind(&mut self) {
        let d = self.cumulative_delta_px();
        self.kind = if d > 0.0 {
            GestureKind::Spread
        } else if d < 0.0 {
            GestureKind::Pinch
        } else {
            GestureKind::Undetermined
        };
    }

    fn reset_to_idle(&mut self) {
        let fingers = std::mem::take(&mut self.fingers);
        let last_t = self.last_t;
        *self = Self { fingers, last_t, ..Self::default() };
    }

    fn activate(&mut self, doc: &Document, layout: &LayoutMap, t: u64) -> Result<(), GestureError> {
        let anchor = self.anchor.ok_or_else(|| protocol("activation without an anchor"))?;
        if self.cursor.is_none() {
            self.cursor = Some(cursor_for_sentence(doc, layout, anchor).map_err(|e| protocol(e.to_string()))?);
        }
        let d = self.finger_distance().unwrap_or(0.0);
        self.base_distance = d;
        self.current_distance = d;
        self.subgesture_count += 1;
        self.started_at.get_or_insert(t);
        self.active_since = Some(t);
        self.phase = Phase::Active;
        Ok(())
    }

    /// Feeds one touch event. On error the session is left unchanged.
    pub fn feed(
        &mut self,
        ev: &TouchEvent,
        doc: &Document,
        layout: &LayoutMap,
        profile: &DeviceProfile,
    ) -> Result<Vec<EngineCommand>, GestureError> {
        if !matches!(ev.finger, 1 | 2) {
            return Ok(Vec::new());
        }
        if let Some(last) = self.last_t {
            if ev.t_ms < last {
                return Err(protocol(format!("timestamp {} precedes {}", ev.t_ms, last)));
            }
        }
        let down = self.fingers.contains_key(&ev.finger);
        match ev.kind {
            TouchKind::Down if down => return Err(protocol(format!("finger {} is already down", ev.finger))),
            TouchKind::Move | TouchKind::Up if !down => {
                return Err(protocol(format!("{:?} for finger {} without Down", ev.kind, ev.finger)))
            }
            _ => {}
        }
        self.last_t = Some(ev.t_ms);

        let mut out = Vec::new();
        match ev.kind {
            TouchKind::Down => {
                self.fingers.insert(ev.finger, ev.point);
                match (self.phase, self.fingers.len()) {
                    (Phase::Idle, 1) => {
                        if let Some(anchor) = anchor_for(layout, ev.point) {
                            self.anchor = Some(anchor);
                            self.phase = Phase::Armed;
                        }
                    }
                    (Phase::Armed, 2) => self.activate(doc, layout, ev.t_ms)?,
                    (Phase::Confirming, 2) => self.activate(doc, layout, ev.t_ms)?,
                    _ => {}
                }
            }
            TouchKind::Move => {
                self.fingers.insert(ev.finger, ev.point);
                if self.phase == Phase::Active {
                    if let Some(d) = self.finger_distance() {
                        let (words, residual) = distance_to_words(d - self.current_distance, profile, self.residual);
                        self.target_words += words;
                        self.residual = residual;
                        self.current_distance = d;
                        self.update_kind();
                    }
                }
            }
            TouchKind::Up => {
                self.fingers.remove(&ev.finger);
                match self.phase {
                    Phase::Armed => self.reset_to_idle(),
                    Phase::Active => {
                        self.settled_delta_px += self.current_distance - self.base_distance;
                        self.base_distance = self.current_distance;
                        self.last_lift_at = Some(ev.t_ms);
                        self.phase = Phase::Confirming;
                        out.push(EngineCommand::ShowConfirmWidget);
                        if self.kind == GestureKind::Spread && detect_sentence_snap(self, profile) {
                            out.push(EngineCommand::SnapToOneSentence);
                        }
                    }
                    _ => {}
                }
            }
        }
        Ok(out)
    }

    fn finish(&mut self) -> Result<GestureOutcome, GestureError> {
        if self.phase != Phase::Confirming {
            return Err(protocol(format!("confirm/reject in phase {:?}", self.phase)));
        }
        let outcome = GestureOutcome {
            kind: self.kind,
            target_words: self.target_words,
            anchor: self.anchor.unwrap_or(0),
        };
        self.reset_to_idle();
        Ok(outcome)
    }

    /// Accepts the pending change; the caller commits the bubble track.
    pub fn confirm(&mut self) -> Result<GestureOutcome, GestureError> {
        self.finish()
    }

    /// Discards the pending change; the caller reverts the bubble track.
    pub fn reject(&mut self) -> Result<GestureOutcome, GestureError> {
        self.finish()
    }
}

/// Points outside the page columns or above the first line count as
/// off-document chrome.
fn anchor_for(layout: &LayoutMap, p: Point) -> Option<usize> {
    if p.x < 0.0 || p.x > layout.page_width || p.y < 0.0 {
        return None;
    }
    SpiralIndex::new(layout).ok().map(|idx| idx.nearest_sentence(p))
}

/// A fast spread followed by a quick lift: the first subgesture lasted at
/// most `snap_max_duration_ms` and spread at `snap_min_velocity_mm_s` or
/// faster on average.
pub fn detect_sentence_snap(session: &GestureSession, profile: &DeviceProfile) -> bool {
    if session.kind != GestureKind::Spread || session.subgesture_count != 1 {
        return false;
    }
    let (Some(start), Some(lift)) = (session.active_since, session.last_lift_at) else {
        return false;
    };
    let duration_ms = lift.saturating_sub(start) as f64;
    let spread_mm = profile.px_to_mm(session.cumulative_delta_px());
    if spread_mm <= 0.0 || duration_ms > profile.snap_max_duration_ms {
        return false;
    }
    duration_ms == 0.0 || spread_mm / (duration_ms / 1000.0) >= profile.snap_min_velocity_mm_s
}

/// Long press on a bubble: a single contact held for `long_press_ms`
/// without drifting `long_press_slop_mm` from where it went down.
///
/// `history` is the contact so far, starting with its Down event; the last
/// event's timestamp is taken as "now". The caller fires at most once per
/// contact.
pub fn detect_long_press(
    history: &[TouchEvent],
    hit: Option<LongPressTarget>,
    profile: &DeviceProfile,
) -> Option<LongPressTarget> {
    let hit = hit?;
    let (first, last) = (history.first()?, history.last()?);
    if first.kind != TouchKind::Down || history.iter().any(|e| e.finger != first.finger) {
        return None;
    }
    let dwell = last.t_ms.saturating_sub(first.t_ms);
    let slop_px = profile.long_press_slop_mm * profile.px_per_mm;
    let drift = history.iter().map(|e| e.point.distance(first.point)).fold(0.0, f64::max);
    (dwell >= profile.long_press_ms && drift < slop_px).then_some(hit)
}
