//! Interaction metrics computed straight from an event log.
//!
//! Gesture boundaries are tracked here with a small touch-episode machine
//! of their own instead of running the engine, so the numbers depend on the
//! log and nothing else. `tests/metrics.rs` checks they agree with replay.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::engine::{EngineInput, TaskEdge};
use crate::geom::Point;
use crate::gesture::{distance_to_words, DeviceProfile, TouchKind};
use crate::log::EventLog;

pub const DEFAULT_TRACE_POINTS: usize = 100;
/// Normalized values above `1 + OVERSHOOT_EPS` count as an overshoot.
pub const OVERSHOOT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Confirmed,
    Rejected,
    /// The log (or task) ended before confirm or reject.
    Incomplete,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Confirmed => "confirmed",
            Outcome::Rejected => "rejected",
            Outcome::Incomplete => "incomplete",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureMetrics {
    /// 1-based within the task.
    pub index: usize,
    pub outcome: Outcome,
    pub start_ms: u64,
    /// Time with both fingers down, summed over subgestures.
    pub execution_time_s: f64,
    pub subgestures: u32,
    /// Signed change in finger distance (spread positive).
    pub distance_px: f64,
    pub distance_mm: f64,
    /// Word count the final finger distance maps to; None unless confirmed.
    pub confirmed_words: Option<i64>,
    pub max_normalized: Option<f64>,
    pub overshoot: Option<bool>,
    /// Distance over target distance, resampled on normalized time.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub task: String,
    pub start_ms: u64,
    /// Last confirm minus task start; None without a confirm.
    pub completion_time_s: Option<f64>,
    pub gestures: Vec<GestureMetrics>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Idle,
    Armed,
    Active,
    Confirming,
}

#[derive(Debug)]
struct Episode {
    task: Option<usize>,
    start_ms: u64,
    active_since: u64,
    active_ms: u64,
    subgestures: u32,
    base: f64,
    settled: f64,
    samples: Vec<(u64, f64)>,
}

struct Tracker<'a> {
    profile: &'a DeviceProfile,
    page_width: f64,
    phase: Phase,
    fingers: BTreeMap<u8, Point>,
    episode: Option<Episode>,
}

impl Tracker<'_> {
    fn distance(&self) -> f64 {
        match (self.fingers.get(&1), self.fingers.get(&2)) {
            (Some(a), Some(b)) => a.distance(*b),
            _ => 0.0,
        }
    }

    fn live(&self) -> f64 {
        self.episode.as_ref().map_or(0.0, |e| e.settled + self.distance() - e.base)
    }

    fn touch(&mut self, kind: TouchKind, finger: u8, p: Point, t: u64, task: Option<usize>) {
        if !matches!(finger, 1 | 2) {
            return;
        }
        let down = self.fingers.contains_key(&finger);
        match kind {
            TouchKind::Down if !down => {
                self.fingers.insert(finger, p);
                match (self.phase, self.fingers.len()) {
                    (Phase::Idle, 1) if p.x >= 0.0 && p.x <= self.page_width && p.y >= 0.0 => {
                        self.phase = Phase::Armed
                    }
                    (Phase::Armed, 2) => {
                        let d = self.distance();
                        self.episode = Some(Episode {
                            task,
                            start_ms: t,
                            active_since: t,
                            active_ms: 0,
                            subgestures: 1,
                            base: d,
                            settled: 0.0,
                            samples: vec![(t, 0.0)],
                        });
                        self.phase = Phase::Active;
                    }
                    (Phase::Confirming, 2) => {
                        let d = self.distance();
                        let ep = self.episode.as_mut().expect("confirming has an episode");
                        ep.subgestures += 1;
                        ep.active_since = t;
                        ep.base = d;
                        self.phase = Phase::Active;
                    }
                    _ => {}
                }
            }
            TouchKind::Move if down => {
                self.fingers.insert(finger, p);
                if self.phase == Phase::Active {
                    let v = self.live();
                    self.episode.as_mut().unwrap().samples.push((t, v));
                }
            }
            TouchKind::Up if down => {
                match self.phase {
                    Phase::Armed => self.phase = Phase::Idle,
                    Phase::Active => {
                        let v = self.live();
                        let ep = self.episode.as_mut().unwrap();
                        ep.settled = v;
                        ep.active_ms += t - ep.active_since;
                        self.phase = Phase::Confirming;
                    }
                    _ => {}
                }
                self.fingers.remove(&finger);
            }
            _ => {}
        }
    }

    fn finish(&mut self, outcome: Outcome, points: usize) -> Option<(Option<usize>, GestureMetrics)> {
        if outcome != Outcome::Incomplete && self.phase != Phase::Confirming {
            return None;
        }
        let ep = self.episode.take()?;
        self.phase = Phase::Idle;
        Some((ep.task, self.summarize(ep, outcome, points)))
    }

    fn summarize(&self, ep: Episode, outcome: Outcome, points: usize) -> GestureMetrics {
        let distance_px = ep.samples.last().map_or(0.0, |s| s.1);
        let mut g = GestureMetrics {
            index: 0,
            outcome,
            start_ms: ep.start_ms,
            execution_time_s: ep.active_ms as f64 / 1000.0,
            subgestures: ep.subgestures,
            distance_px,
            distance_mm: self.profile.px_to_mm(distance_px),
            confirmed_words: None,
            max_normalized: None,
            overshoot: None,
            trace: Vec::new(),
        };
        if outcome != Outcome::Confirmed {
            return g;
        }
        let words = distance_to_words(distance_px, self.profile, 0.0).0;
        g.confirmed_words = Some(words);
        if words == 0 {
            return g;
        }
        let target_px = self.profile.words_to_px(words as f64);
        let normalized: Vec<(u64, f64)> = ep.samples.iter().map(|&(t, v)| (t, v / target_px)).collect();
        let max = normalized.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        g.max_normalized = Some(max);
        g.overshoot = Some(max > 1.0 + OVERSHOOT_EPS);
        g.trace = resample(&normalized, points);
        g
    }
}

/// Linear resampling on normalized time. Endpoints are the first and last
/// samples; with several samples at one instant the latest wins.
pub fn resample(samples: &[(u64, f64)], points: usize) -> Vec<f64> {
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Vec::new();
    };
    if points == 0 {
        return Vec::new();
    }
    if points == 1 {
        return vec![last.1];
    }
    let (t0, t1) = (first.0 as f64, last.0 as f64);
    (0..points)
        .map(|k| {
            if k == 0 {
                return first.1;
            }
            if k == points - 1 || t1 == t0 {
                return last.1;
            }
            let tau = t0 + (t1 - t0) * k as f64 / (points - 1) as f64;
            let j = samples.partition_point(|s| (s.0 as f64) <= tau);
            let (ta, va) = samples[j - 1];
            if j == samples.len() {
                return va;
            }
            let (tb, vb) = samples[j];
            va + (vb - va) * (tau - ta as f64) / (tb as f64 - ta as f64)
        })
        .collect()
}

/// Metrics per task. Logs without task markers count as one task named
/// after the header's task id, starting at the first event.
pub fn compute_metrics(log: &EventLog, points: usize) -> Vec<TaskMetrics> {
    let mut tracker = Tracker {
        profile: &log.header.profile,
        page_width: log.header.layout.page_width_px,
        phase: Phase::Idle,
        fingers: BTreeMap::new(),
        episode: None,
    };
    let marked = log.events.iter().any(|e| matches!(e.payload, EngineInput::TaskMarker { .. }));
    let mut tasks: Vec<TaskMetrics> = Vec::new();
    let mut open: Option<usize> = None;
    let mut last_confirm: Vec<Option<u64>> = Vec::new();
    if !marked {
        if let Some(first) = log.events.first() {
            tasks.push(TaskMetrics {
                task: log.header.task_id.clone(),
                start_ms: first.t,
                completion_time_s: None,
                gestures: Vec::new(),
            });
            last_confirm.push(None);
            open = Some(0);
        }
    }

    let record = |tasks: &mut Vec<TaskMetrics>, done: Option<(Option<usize>, GestureMetrics)>| {
        if let Some((Some(ti), mut g)) = done {
            g.index = tasks[ti].gestures.len() + 1;
            tasks[ti].gestures.push(g);
        }
    };

    for ev in &log.events {
        match &ev.payload {
            EngineInput::TaskMarker { task, edge: TaskEdge::Start } => {
                tasks.push(TaskMetrics { task: task.clone(), start_ms: ev.t, completion_time_s: None, gestures: Vec::new() });
                last_confirm.push(None);
                open = Some(tasks.len() - 1);
            }
            EngineInput::TaskMarker { edge: TaskEdge::End, .. } => open = None,
            EngineInput::Touch { kind, finger, x, y } => tracker.touch(*kind, *finger, Point::new(*x, *y), ev.t, open),
            EngineInput::Confirm => {
                let done = tracker.finish(Outcome::Confirmed, points);
                if let Some((Some(ti), _)) = &done {
                    last_confirm[*ti] = Some(ev.t);
                }
                record(&mut tasks, done);
            }
            EngineInput::Reject => {
                let done = tracker.finish(Outcome::Rejected, points);
                record(&mut tasks, done);
            }
            EngineInput::TokenChunk { .. } | EngineInput::Replace { .. } => {}
        }
    }
    let done = tracker.finish(Outcome::Incomplete, points);
    record(&mut tasks, done);

    for (task, confirm) in tasks.iter_mut().zip(last_confirm) {
        task.completion_time_s = confirm.map(|t| (t - task.start_ms) as f64 / 1000.0);
    }
    tasks
}
