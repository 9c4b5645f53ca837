use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;

use crate::config::{Command, RunConfig};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    ViolationConfirmed,
    Inconclusive,
}

impl Verdict {
    pub fn ok(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::ViolationConfirmed)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::ViolationConfirmed => "violation_confirmed",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictEntry {
    pub command: String,
    pub check: String,
    pub verdict: Verdict,
    pub details: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub command: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportEnvelope {
    pub schema_version: &'static str,
    pub command: String,
    pub config: RunConfig,
    pub verdicts: Vec<VerdictEntry>,
    pub timings: Vec<Timing>,
    pub artifacts: Vec<String>,
}

/// The run-independent part of a report.
#[derive(Serialize)]
struct VerdictFile<'a> {
    schema_version: &'static str,
    command: &'a str,
    config: &'a RunConfig,
    verdicts: &'a [VerdictEntry],
    artifacts: &'a [String],
}

impl ReportEnvelope {
    pub fn new(command: Command, config: RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.name().to_string(),
            config,
            verdicts: Vec::new(),
            timings: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.verdict.ok())
    }

    /// Writes `report.json` (with timings) and `verdicts.json` (byte-stable) into `dir`.
    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let full = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("report.json"), full + "\n").context("writing report.json")?;
        let stable = VerdictFile {
            schema_version: self.schema_version,
            command: &self.command,
            config: &self.config,
            verdicts: &self.verdicts,
            artifacts: &self.artifacts,
        };
        let text = serde_json::to_string_pretty(&stable)?;
        std::fs::write(dir.join("verdicts.json"), text + "\n").context("writing verdicts.json")?;
        Ok(())
    }
}

/// Creates a fresh `<command>-<unix millis>` directory under `out`.
pub fn run_directory(out: &Path, command: Command) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut stamp = SystemTime::now().duration_since(UNIX_EPOCH)?.as_millis();
    loop {
        let dir = out.join(format!("{}-{stamp}", command.name()));
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => stamp += 1,
            Err(e) => return Err(e).with_context(|| format!("creating {}", dir.display())),
        }
    }
}
