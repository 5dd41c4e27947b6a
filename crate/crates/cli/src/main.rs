use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gesturetext::gesture::DeviceProfile;
use gesturetext::log::EventLog;
use gesturetext::metrics::{compute_metrics, DEFAULT_TRACE_POINTS};
use gesturetext::replay::replay;
use gesturetext::report::{emit_report, Format};
use gesturetext_cli::scenarios;

#[derive(Parser)]
#[command(name = "gesturetext", version, about = "Replay and analyse gesture text-editing sessions")]
struct Cli {
    /// Device profile JSON overriding the one in each log header.
    #[arg(long, global = true)]
    profile: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Replay a log headlessly and print the final document.
    Replay {
        log: PathBuf,
        /// Write every display snapshot plus a hash list here.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        /// Write the command trace (JSON lines) here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Compute per-task, per-gesture metrics for one or more logs.
    Metrics {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Resampled trace length.
        #[arg(long, default_value_t = DEFAULT_TRACE_POINTS)]
        points: usize,
    },
    /// Record a scripted scenario (or `all`) against the mock provider.
    Record {
        scenario: String,
        #[arg(long, default_value = "fixtures/logs")]
        out_dir: PathBuf,
    },
    /// List the recordable scenarios.
    Scenarios,
}

fn load_log(path: &Path, profile: Option<&DeviceProfile>) -> Result<EventLog> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut log = EventLog::parse(&src).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(p) = profile {
        log.header.profile = p.clone();
    }
    Ok(log)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let profile = match &cli.profile {
        Some(p) => {
            let raw = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let profile: DeviceProfile = serde_json::from_str(&raw).context("parsing device profile")?;
            profile.validate()?;
            Some(profile)
        }
        None => None,
    };

    match cli.cmd {
        Cmd::Replay { log, snapshots, trace } => {
            let log = load_log(&log, profile.as_ref())?;
            let out = replay(&log)?;
            if let Some(dir) = snapshots {
                fs::create_dir_all(&dir)?;
                for (i, s) in out.snapshots.iter().enumerate() {
                    fs::write(dir.join(format!("snapshot_{i:04}.json")), s.to_json())?;
                }
                fs::write(dir.join("hashes.txt"), out.snapshot_hashes().join("\n") + "\n")?;
            }
            if let Some(path) = trace {
                fs::write(path, out.trace_jsonl())?;
            }
            let c = out.counters;
            eprintln!(
                "snapshots={} commands={} digest={} received={} committed={} discarded={}",
                out.snapshots.len(),
                out.commands.len(),
                out.digest(),
                c.received,
                c.committed,
                c.discarded
            );
            println!("{}", out.document.text());
        }
        Cmd::Metrics { logs, out, format, points } => {
            let format: Format = format.parse()?;
            let mut tasks = Vec::new();
            for path in &logs {
                tasks.extend(compute_metrics(&load_log(path, profile.as_ref())?, points));
            }
            for written in emit_report(&tasks, format, &out)? {
                eprintln!("wrote {}", written.display());
            }
        }
        Cmd::Record { scenario, out_dir } => {
            let chosen: Vec<_> = if scenario == "all" {
                scenarios::ALL.iter().collect()
            } else {
                match scenarios::find(&scenario) {
                    Some(s) => vec![s],
                    None => bail!("unknown scenario {scenario:?}; see `gesturetext scenarios`"),
                }
            };
            fs::create_dir_all(&out_dir)?;
            for s in chosen {
                let (log, text) = s.record()?;
                let digest = replay(&log)?.digest();
                fs::write(out_dir.join(format!("{}.jsonl", s.name)), log.to_jsonl())?;
                fs::write(out_dir.join(format!("{}.expected.txt", s.name)), &text)?;
                fs::write(out_dir.join(format!("{}.digest", s.name)), format!("{digest}\n"))?;
                eprintln!("{}: {} events, digest {}", s.name, log.events.len(), &digest[..16]);
            }
        }
        Cmd::Scenarios => {
            for s in &scenarios::ALL {
                println!("{}", s.name);
            }
        }
    }
    Ok(())
}
