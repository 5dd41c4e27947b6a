//! Headless replay of an [`EventLog`] through the engine.

use sha2::{Digest, Sha256};

use crate::command::EngineCommand;
use crate::engine::{Engine, EngineError};
use crate::log::EventLog;
use crate::render::DisplayModel;
use crate::stream::WordCounters;
use crate::text::Document;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {source}")]
pub struct ReplayError {
    pub line: usize,
    pub source: EngineError,
}

#[derive(Debug, Clone)]
pub struct ReplayOutput {
    pub document: Document,
    /// Every command with the timestamp of the event that produced it.
    pub commands: Vec<(u64, EngineCommand)>,
    /// Display models in emission order, starting with the initial one.
    pub snapshots: Vec<DisplayModel>,
    pub counters: WordCounters,
}

impl ReplayOutput {
    pub fn snapshot_hashes(&self) -> Vec<String> {
        self.snapshots.iter().map(|s| hex::encode(Sha256::digest(s.to_json().as_bytes()))).collect()
    }

    /// One digest over all snapshots and the final document.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for s in &self.snapshots {
            h.update(s.to_json().as_bytes());
            h.update(b"\n");
        }
        h.update(self.document.canonical().as_bytes());
        hex::encode(h.finalize())
    }

    /// Command trace as JSON lines, display updates included.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for (t, c) in &self.commands {
            out.push_str(&format!("{{\"t\":{t},\"command\":{}}}\n", c.to_json_line()));
        }
        out
    }
}

pub fn replay(log: &EventLog) -> Result<ReplayOutput, ReplayError> {
    let doc = Document::new(&log.header.document);
    let mut engine =
        Engine::new(log.header.engine_config(), doc).map_err(|source| ReplayError { line: 1, source })?;
    let mut out = ReplayOutput {
        document: engine.document().clone(),
        commands: Vec::new(),
        snapshots: vec![engine.display()],
        counters: WordCounters::default(),
    };
    for (i, ev) in log.events.iter().enumerate() {
        let line = log.lines.get(i).copied().unwrap_or(i + 2);
        let cmds = engine.handle(ev.t, &ev.payload).map_err(|source| ReplayError { line, source })?;
        for c in cmds {
            if let EngineCommand::DisplayUpdate { model } = &c {
                out.snapshots.push(model.clone());
            }
            out.commands.push((ev.t, c));
        }
    }
    // the first handled event re-emits the initial model; drop the duplicate
    out.snapshots.dedup();
    out.document = engine.document().clone();
    out.counters = engine.counters();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineInput;
    use crate::gesture::{DeviceProfile, TouchKind};
    use crate::log::LogHeader;
    use crate::render::Variant;
    use crate::text::LayoutConfig;

    fn log(events: &[(u64, EngineInput)]) -> EventLog {
        let mut log = EventLog::new(LogHeader {
            task_id: "x".into(),
            profile: DeviceProfile::default(),
            layout: LayoutConfig::default(),
            seed: 1,
            variant: Variant::Bubbles,
            document: "Alpha beta. Gamma delta.".into(),
        });
        for (t, p) in events {
            log.push(*t, p.clone()).unwrap();
        }
        log
    }

    #[test]
    fn empty_log_keeps_document() {
        let out = replay(&log(&[])).unwrap();
        assert_eq!(out.document.text(), "Alpha beta. Gamma delta.");
        assert_eq!(out.snapshots.len(), 1);
        assert!(out.commands.is_empty());
    }

    #[test]
    fn engine_errors_report_the_line() {
        let l = log(&[(0, EngineInput::touch(TouchKind::Down, 1, 5.0, 5.0)), (1, EngineInput::Confirm)]);
        let err = replay(&l).unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn replay_is_deterministic() {
        let l = log(&[
            (0, EngineInput::touch(TouchKind::Down, 1, 5.0, 5.0)),
            (20, EngineInput::touch(TouchKind::Down, 2, 60.0, 5.0)),
            (800, EngineInput::touch(TouchKind::Move, 2, 90.0, 5.0)),
            (900, EngineInput::touch(TouchKind::Up, 2, 90.0, 5.0)),
            (900, EngineInput::touch(TouchKind::Up, 1, 5.0, 5.0)),
            (950, EngineInput::chunk(1, "New words.", true)),
            (1000, EngineInput::Confirm),
        ]);
        let a = replay(&l).unwrap();
        let b = replay(&l).unwrap();
        assert_eq!(a.snapshot_hashes(), b.snapshot_hashes());
        assert_eq!(a.digest(), b.digest());
        assert_eq!(a.trace_jsonl(), b.trace_jsonl());
        assert!(a.snapshots.len() > 2);
    }
}
