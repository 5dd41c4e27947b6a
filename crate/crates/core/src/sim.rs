//! Scripted sessions: drive an engine with synthetic touches, answer its
//! generation requests from a [`TokenSource`], and record the event log.

use std::collections::VecDeque;

use crate::command::EngineCommand;
use crate::engine::{Engine, EngineError, EngineInput, TaskEdge};
use crate::geom::Point;
use crate::gesture::TouchKind;
use crate::log::{EventLog, LogHeader};
use crate::text::Document;

#[derive(Debug, Clone, PartialEq)]
pub struct TimedChunk {
    /// Delay after the previous chunk (or the request, for the first).
    pub delay_ms: u64,
    pub delta: String,
    pub done: bool,
}

/// Produces the chunk stream for one generation request.
pub trait TokenSource {
    fn stream(&mut self, request_id: u64, paragraph: &str) -> Vec<TimedChunk>;
}

/// Hands out canned texts in order, `words_per_chunk` words at a time with
/// a fixed delay. Once the texts run out, requests get an empty done chunk.
#[derive(Debug, Clone)]
pub struct ScriptedSource {
    texts: VecDeque<String>,
    pub words_per_chunk: usize,
    pub delay_ms: u64,
}

impl ScriptedSource {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(texts: I) -> Self {
        Self { texts: texts.into_iter().map(Into::into).collect(), words_per_chunk: 1, delay_ms: 100 }
    }
}

/// Splits text into chunks of `n` words, whitespace kept with the word
/// that precedes it.
pub fn chunk_words(text: &str, n: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut words = 0;
    let mut prev_ws = true;
    for c in text.chars() {
        let ws = c.is_whitespace();
        if !ws && prev_ws && words == n.max(1) {
            out.push(std::mem::take(&mut cur));
            words = 0;
        }
        if !ws && prev_ws {
            words += 1;
        }
        cur.push(c);
        prev_ws = ws;
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

impl TokenSource for ScriptedSource {
    fn stream(&mut self, _request_id: u64, _paragraph: &str) -> Vec<TimedChunk> {
        let Some(text) = self.texts.pop_front() else {
            return vec![TimedChunk { delay_ms: self.delay_ms, delta: String::new(), done: true }];
        };
        let parts = chunk_words(&text, self.words_per_chunk);
        let n = parts.len();
        parts
            .into_iter()
            .enumerate()
            .map(|(i, delta)| TimedChunk { delay_ms: self.delay_ms, delta, done: i + 1 == n })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Scheduled {
    t: u64,
    seq: u64,
    request_id: u64,
    delta: String,
    done: bool,
}

/// Records a session: every input is applied to a live engine and appended
/// to the log, with token chunks interleaved at their scheduled times.
pub struct Recorder<S> {
    engine: Engine,
    log: EventLog,
    source: S,
    pending: Vec<Scheduled>,
    seq: u64,
    now: u64,
    pub commands: Vec<(u64, EngineCommand)>,
}

impl<S: TokenSource> Recorder<S> {
    pub fn new(header: LogHeader, source: S) -> Result<Self, EngineError> {
        let engine = Engine::new(header.engine_config(), Document::new(&header.document))?;
        Ok(Self { engine, log: EventLog::new(header), source, pending: Vec::new(), seq: 0, now: 0, commands: Vec::new() })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    /// Delivers every chunk due at or before `t`.
    pub fn advance(&mut self, t: u64) -> Result<(), EngineError> {
        loop {
            let next = self
                .pending
                .iter()
                .enumerate()
                .filter(|(_, s)| s.t <= t)
                .min_by_key(|(_, s)| (s.t, s.seq))
                .map(|(i, _)| i);
            let Some(i) = next else { break };
            let s = self.pending.remove(i);
            self.apply(s.t, EngineInput::TokenChunk { request_id: s.request_id, delta: s.delta, done: s.done })?;
        }
        self.now = self.now.max(t);
        Ok(())
    }

    /// Delivers chunks until nothing is scheduled, including streams that
    /// delivery itself starts. Returns the time of the last delivery.
    pub fn drain(&mut self) -> Result<u64, EngineError> {
        while let Some(t) = self.pending.iter().map(|s| s.t).max() {
            self.advance(t)?;
        }
        Ok(self.now)
    }

    /// Applies one input at `t` after delivering earlier chunks.
    pub fn feed(&mut self, t: u64, input: EngineInput) -> Result<Vec<EngineCommand>, EngineError> {
        self.advance(t)?;
        self.apply(t, input)
    }

    fn apply(&mut self, t: u64, input: EngineInput) -> Result<Vec<EngineCommand>, EngineError> {
        let t = t.max(self.now);
        let cmds = self.engine.handle(t, &input)?;
        self.log.push(t, input).expect("recorder keeps time ordered");
        self.now = t;
        for c in &cmds {
            match c {
                EngineCommand::RequestGeneration { request_id, paragraph } => {
                    let mut at = t;
                    for chunk in self.source.stream(*request_id, paragraph) {
                        at += chunk.delay_ms;
                        self.seq += 1;
                        self.pending.push(Scheduled {
                            t: at,
                            seq: self.seq,
                            request_id: *request_id,
                            delta: chunk.delta,
                            done: chunk.done,
                        });
                    }
                }
                // the gateway stops the stream; nothing more arrives
                EngineCommand::CancelGeneration { request_id } => self.pending.retain(|s| s.request_id != *request_id),
                _ => {}
            }
            self.commands.push((t, c.clone()));
        }
        Ok(cmds)
    }

    pub fn task_start(&mut self, t: u64, task: &str) -> Result<(), EngineError> {
        self.feed(t, EngineInput::TaskMarker { task: task.into(), edge: TaskEdge::Start }).map(drop)
    }

    pub fn task_end(&mut self, t: u64, task: &str) -> Result<(), EngineError> {
        self.feed(t, EngineInput::TaskMarker { task: task.into(), edge: TaskEdge::End }).map(drop)
    }

    /// A point on the last word of sentence `index` in the current layout.
    pub fn sentence_point(&self, index: usize) -> Option<Point> {
        let b = self.engine.layout().word_boxes.iter().rev().find(|b| b.sentence == index)?;
        Some(Point::new(b.rect.x + b.rect.w / 2.0, b.rect.y + b.rect.h / 2.0))
    }

    /// One two-finger contact: finger 1 rests at `at`, finger 2 lands `gap`
    /// px to its right at `t`, then moves horizontally through `offsets`
    /// (ms after landing, px relative to its start) and both lift.
    /// Returns the time of the last lift.
    pub fn contact(&mut self, t: u64, at: Point, gap: f64, offsets: &[(u64, f64)]) -> Result<u64, EngineError> {
        self.feed(t, EngineInput::touch(TouchKind::Down, 1, at.x, at.y))?;
        let t2 = t + 20;
        let x2 = at.x + gap;
        self.feed(t2, EngineInput::touch(TouchKind::Down, 2, x2, at.y))?;
        let mut last = (t2, x2);
        for &(dt, dx) in offsets {
            last = (t2 + dt, x2 + dx);
            self.feed(last.0, EngineInput::touch(TouchKind::Move, 2, last.1, at.y))?;
        }
        self.feed(last.0 + 30, EngineInput::touch(TouchKind::Up, 2, last.1, at.y))?;
        self.feed(last.0 + 40, EngineInput::touch(TouchKind::Up, 1, at.x, at.y))?;
        Ok(last.0 + 40)
    }

    /// Monotone change of `words` word widths over `duration_ms` in `steps`
    /// moves, anchored on sentence `sentence`. Negative words pinch.
    pub fn stretch(&mut self, t: u64, sentence: usize, words: f64, duration_ms: u64, steps: u32) -> Result<u64, EngineError> {
        let at = self.sentence_point(sentence).ok_or(EngineError::Text(crate::text::TextError::NoText))?;
        let total = self.engine.config().profile.words_to_px(words);
        let gap = 60.0f64.max(-total + 60.0);
        let steps = steps.max(1);
        let offsets: Vec<(u64, f64)> = (1..=steps)
            .map(|k| (duration_ms * k as u64 / steps as u64, total * k as f64 / steps as f64))
            .collect();
        self.contact(t, at, gap, &offsets)
    }

    pub fn finish(mut self, t: u64) -> Result<(EventLog, Engine), EngineError> {
        self.advance(t)?;
        Ok((self.log, self.engine))
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }
}
