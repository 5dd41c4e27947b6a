//! CSV/JSON reports: one row per (task, gesture) plus an aggregate block.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::metrics::{GestureMetrics, TaskMetrics};

pub const COLUMNS: [&str; 12] = [
    "task",
    "gesture",
    "outcome",
    "completion_time_s",
    "execution_time_s",
    "subgestures",
    "distance_px",
    "distance_mm",
    "confirmed_words",
    "max_normalized",
    "overshoot",
    "trace_points",
];

/// Columns summarized in the aggregate block.
pub const AGGREGATED: [&str; 4] = ["completion_time_s", "execution_time_s", "subgestures", "distance_mm"];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("unknown report format {0:?}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ReportError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ReportError::Format(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub task: String,
    pub gesture: Option<usize>,
    pub outcome: Option<String>,
    pub completion_time_s: Option<f64>,
    pub execution_time_s: Option<f64>,
    pub subgestures: Option<u32>,
    pub distance_px: Option<f64>,
    pub distance_mm: Option<f64>,
    pub confirmed_words: Option<i64>,
    pub max_normalized: Option<f64>,
    pub overshoot: Option<bool>,
    pub trace_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1); None below two values.
    pub sd: Option<f64>,
    pub median: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = (n > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt());
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 { sorted[n / 2] } else { (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0 };
        Some(Stats { n, mean, sd, median })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<Row>,
    /// Keyed by column name, in [`AGGREGATED`] order.
    pub aggregate: Vec<(String, Stats)>,
    #[serde(default)]
    pub traces: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub task: String,
    pub gesture: usize,
    pub values: Vec<f64>,
}

fn gesture_row(task: &TaskMetrics, g: &GestureMetrics) -> Row {
    Row {
        task: task.task.clone(),
        gesture: Some(g.index),
        outcome: Some(g.outcome.as_str().to_string()),
        completion_time_s: task.completion_time_s,
        execution_time_s: Some(g.execution_time_s),
        subgestures: Some(g.subgestures),
        distance_px: Some(g.distance_px),
        distance_mm: Some(g.distance_mm),
        confirmed_words: g.confirmed_words,
        max_normalized: g.max_normalized,
        overshoot: g.overshoot,
        trace_points: g.trace.len(),
    }
}

impl Report {
    pub fn build(tasks: &[TaskMetrics]) -> Report {
        let mut rows = Vec::new();
        let mut traces = Vec::new();
        for task in tasks {
            if task.gestures.is_empty() {
                rows.push(Row {
                    task: task.task.clone(),
                    gesture: None,
                    outcome: None,
                    completion_time_s: task.completion_time_s,
                    execution_time_s: None,
                    subgestures: None,
                    distance_px: None,
                    distance_mm: None,
                    confirmed_words: None,
                    max_normalized: None,
                    overshoot: None,
                    trace_points: 0,
                });
            }
            for g in &task.gestures {
                rows.push(gesture_row(task, g));
                if !g.trace.is_empty() {
                    traces.push(TraceRow { task: task.task.clone(), gesture: g.index, values: g.trace.clone() });
                }
            }
        }
        let aggregate = aggregate(&rows);
        Report { rows, aggregate, traces }
    }

    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS)?;
        for r in &self.rows {
            w.write_record(row_fields(r))?;
        }
        for stat in ["mean", "sd", "median", "n"] {
            if self.aggregate.is_empty() {
                break;
            }
            let mut rec = vec![String::new(); COLUMNS.len()];
            rec[0] = format!("aggregate:{stat}");
            for (col, s) in &self.aggregate {
                let i = COLUMNS.iter().position(|c| c == col).expect("aggregated columns exist");
                rec[i] = match stat {
                    "mean" => num(s.mean),
                    "sd" => s.sd.map(num).unwrap_or_default(),
                    "median" => num(s.median),
                    _ => s.n.to_string(),
                };
            }
            w.write_record(&rec)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }

    /// Long-format traces: task, gesture, step, normalized time, value.
    pub fn traces_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["task", "gesture", "step", "time", "value"])?;
        for tr in &self.traces {
            let last = tr.values.len().saturating_sub(1).max(1) as f64;
            for (k, v) in tr.values.iter().enumerate() {
                w.write_record([tr.task.clone(), tr.gesture.to_string(), k.to_string(), num(k as f64 / last), num(*v)])?;
            }
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn row_fields(r: &Row) -> Vec<String> {
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    vec![
        r.task.clone(),
        r.gesture.map(|g| g.to_string()).unwrap_or_default(),
        r.outcome.clone().unwrap_or_default(),
        opt(r.completion_time_s),
        opt(r.execution_time_s),
        r.subgestures.map(|s| s.to_string()).unwrap_or_default(),
        opt(r.distance_px),
        opt(r.distance_mm),
        r.confirmed_words.map(|w| w.to_string()).unwrap_or_default(),
        opt(r.max_normalized),
        r.overshoot.map(|o| o.to_string()).unwrap_or_default(),
        r.trace_points.to_string(),
    ]
}

/// Completion time is a task-level value, so it is aggregated once per
/// task; the other columns once per gesture row.
pub fn aggregate(rows: &[Row]) -> Vec<(String, Stats)> {
    let mut seen = std::collections::BTreeSet::new();
    let completion: Vec<f64> = rows
        .iter()
        .filter(|r| seen.insert(r.task.clone()))
        .filter_map(|r| r.completion_time_s)
        .collect();
    let exec: Vec<f64> = rows.iter().filter_map(|r| r.execution_time_s).collect();
    let subs: Vec<f64> = rows.iter().filter_map(|r| r.subgestures.map(f64::from)).collect();
    let dist: Vec<f64> = rows.iter().filter_map(|r| r.distance_mm).collect();
    AGGREGATED
        .iter()
        .zip([completion, exec, subs, dist])
        .filter_map(|(name, vals)| Stats::of(&vals).map(|s| (name.to_string(), s)))
        .collect()
}

/// Writes `out` in the given format; CSV output also writes a
/// `<stem>_traces.csv` next to it. Returns the paths written.
pub fn emit_report(tasks: &[TaskMetrics], format: Format, out: &Path) -> Result<Vec<PathBuf>, ReportError> {
    let report = Report::build(tasks);
    match format {
        Format::Json => {
            std::fs::write(out, report.to_json())?;
            Ok(vec![out.to_path_buf()])
        }
        Format::Csv => {
            std::fs::write(out, report.to_csv()?)?;
            let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
            let traces = out.with_file_name(format!("{stem}_traces.csv"));
            std::fs::write(&traces, report.traces_csv()?)?;
            Ok(vec![out.to_path_buf(), traces])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Outcome;

    fn task(name: &str, completion: f64, exec: f64, subs: u32) -> TaskMetrics {
        TaskMetrics {
            task: name.into(),
            start_ms: 0,
            completion_time_s: Some(completion),
            gestures: vec![GestureMetrics {
                index: 1,
                outcome: Outcome::Confirmed,
                start_ms: 0,
                execution_time_s: exec,
                subgestures: subs,
                distance_px: 10.0,
                distance_mm: 2.5,
                confirmed_words: Some(1),
                max_normalized: Some(1.0),
                overshoot: Some(false),
                trace: vec![0.0, 1.0],
            }],
        }
    }

    #[test]
    fn zero_tasks_is_header_only() {
        let csv = Report::build(&[]).to_csv().unwrap();
        assert_eq!(csv, format!("{}\n", COLUMNS.join(",")));
    }

    #[test]
    fn three_tasks_three_rows_plus_aggregate() {
        let r = Report::build(&[task("a", 10.0, 1.0, 1), task("b", 14.0, 2.0, 3), task("c", 12.0, 1.5, 2)]);
        let csv = r.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + 3 + 4);
        assert!(lines[4].starts_with("aggregate:mean,,,12,1.5,2,"));
        assert!(lines[5].starts_with("aggregate:sd,,,2,0.5,1,"));
        assert!(lines[6].starts_with("aggregate:median,,,12,1.5,2,"));
    }

    #[test]
    fn stats_even_median_and_single_sd() {
        let s = Stats::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!(s.median, 2.5);
        assert_eq!(s.mean, 2.5);
        assert_eq!(Stats::of(&[3.0]).unwrap().sd, None);
        assert!(Stats::of(&[]).is_none());
    }

    #[test]
    fn format_parse() {
        assert_eq!("csv".parse::<Format>().unwrap(), Format::Csv);
        assert!("xml".parse::<Format>().is_err());
    }
}
