//! Append-only JSON-lines event logs.
//!
//! Line 1 is `{"header": {...}}`; every following non-blank line is
//! `{"t": <ms>, "payload": {...}}` with non-decreasing `t`.

use serde::{Deserialize, Serialize};

use crate::engine::{EngineConfig, EngineInput};
use crate::gesture::DeviceProfile;
use crate::render::Variant;
use crate::text::LayoutConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct LogError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub task_id: String,
    pub profile: DeviceProfile,
    pub layout: LayoutConfig,
    pub seed: u64,
    pub variant: Variant,
    /// Document text at the start of the session.
    pub document: String,
}

impl LogHeader {
    pub fn engine_config(&self) -> EngineConfig {
        EngineConfig { profile: self.profile.clone(), layout: self.layout.clone(), variant: self.variant, seed: self.seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEvent {
    pub t: u64,
    pub payload: EngineInput,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: LogHeader,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub header: LogHeader,
    pub events: Vec<LogEvent>,
    /// Source line of each event, for error reporting.
    pub lines: Vec<usize>,
}

impl EventLog {
    pub fn new(header: LogHeader) -> Self {
        Self { header, events: Vec::new(), lines: Vec::new() }
    }

    /// Appends an event; out-of-order timestamps are rejected.
    pub fn push(&mut self, t: u64, payload: EngineInput) -> Result<(), LogError> {
        let line = self.events.len() + 2;
        if let Some(last) = self.events.last() {
            if t < last.t {
                return Err(LogError { line, msg: format!("t={t} precedes t={}", last.t) });
            }
        }
        self.events.push(LogEvent { t, payload });
        self.lines.push(line);
        Ok(())
    }

    pub fn parse(src: &str) -> Result<Self, LogError> {
        let mut log: Option<EventLog> = None;
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            match &mut log {
                None => {
                    let h: HeaderLine =
                        serde_json::from_str(raw).map_err(|e| LogError { line, msg: format!("bad header: {e}") })?;
                    h.header.profile.validate().map_err(|e| LogError { line, msg: e.to_string() })?;
                    h.header.layout.validate().map_err(|e| LogError { line, msg: e.to_string() })?;
                    log = Some(EventLog::new(h.header));
                }
                Some(log) => {
                    let ev: LogEvent =
                        serde_json::from_str(raw).map_err(|e| LogError { line, msg: format!("bad event: {e}") })?;
                    log.push(ev.t, ev.payload).map_err(|e| LogError { line, msg: e.msg })?;
                    *log.lines.last_mut().unwrap() = line;
                }
            }
        }
        log.ok_or(LogError { line: 1, msg: "missing header".into() })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&HeaderLine { header: self.header.clone() }).expect("header serializes");
        out.push('\n');
        for ev in &self.events {
            out.push_str(&serde_json::to_string(ev).expect("events serialize"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::TaskEdge;
    use crate::gesture::TouchKind;

    fn header() -> LogHeader {
        LogHeader {
            task_id: "t1".into(),
            profile: DeviceProfile::default(),
            layout: LayoutConfig::default(),
            seed: 7,
            variant: Variant::Bubbles,
            document: "One. Two.".into(),
        }
    }

    #[test]
    fn roundtrip() {
        let mut log = EventLog::new(header());
        log.push(0, EngineInput::TaskMarker { task: "t1".into(), edge: TaskEdge::Start }).unwrap();
        log.push(5, EngineInput::touch(TouchKind::Down, 1, 3.0, 4.5)).unwrap();
        log.push(9, EngineInput::chunk(1, "hi ", false)).unwrap();
        log.push(9, EngineInput::Confirm).unwrap();
        let text = log.to_jsonl();
        assert!(text.lines().nth(2).unwrap().contains(r#""type":"touch""#));
        assert_eq!(EventLog::parse(&text).unwrap(), log);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let log = EventLog::new(header()).to_jsonl();
        let bad = format!("{log}{{\"t\":1,\"payload\":{{\"type\":\"confirm\"}}}}\n\n{{\"t\":1,\"payload\":{{\"type\":\"nope\"}}}}\n");
        assert_eq!(EventLog::parse(&bad).unwrap_err().line, 4);
        let order = format!("{log}{{\"t\":5,\"payload\":{{\"type\":\"confirm\"}}}}\n{{\"t\":4,\"payload\":{{\"type\":\"reject\"}}}}\n");
        assert_eq!(EventLog::parse(&order).unwrap_err().line, 3);
        assert_eq!(EventLog::parse("{").unwrap_err().line, 1);
        assert_eq!(EventLog::parse("").unwrap_err().line, 1);
    }
}
