//! Command-line runner: named verifications, JSON/CSV reports and SVG nodal plots.

pub mod commands;
pub mod config;
pub mod report;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context as _;
use clap::Parser;

use crate::commands::{Context, Outcome};
use crate::config::{Command, Format, RunConfig};
use crate::report::{run_directory, ReportEnvelope, Timing};

#[derive(Debug, Parser)]
#[command(name = "courant", version, about = "Verify nodal-domain and spectral statements numerically")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON file with run parameters; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub mesh_level: Option<usize>,
    #[arg(long)]
    pub sweep_level: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub sweep_points: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub k: Option<u64>,
    /// Sturm-Liouville potential preset (repeatable).
    #[arg(long = "potential")]
    pub potentials: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<Format>,
}

impl Cli {
    /// The config file (or defaults) with every given flag applied on top.
    pub fn resolve(&self) -> Result<RunConfig, config::ConfigError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! overlay {
            ($($field:ident),*) => { $(if let Some(v) = self.$field.clone() { c.$field = v; })* };
        }
        overlay!(grid, mesh_level, sweep_level, tol, seed, samples, sweep_points, epsilon, out);
        if self.d.is_some() {
            c.d = self.d;
        }
        if self.k.is_some() {
            c.k = self.k;
        }
        if !self.potentials.is_empty() {
            c.potentials = self.potentials.clone();
        }
        if !self.format.is_empty() {
            c.formats = self.format.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn wanted(config: &RunConfig, name: &str) -> bool {
    match name.rsplit('.').next() {
        Some("svg") => config.wants(Format::Svg),
        Some("csv") => config.wants(Format::Csv),
        _ => true,
    }
}

/// Runs `command` and writes its report into a fresh run directory under `config.out`.
pub fn execute(command: Command, config: &RunConfig) -> anyhow::Result<(ReportEnvelope, PathBuf)> {
    let dir = run_directory(&config.out, command)?;
    let mut envelope = ReportEnvelope::new(command, config.clone());
    let mut ctx = Context::new(config);
    let steps = if command == Command::ReproduceAll { Command::SUITE.to_vec() } else { vec![command] };
    let start = Instant::now();
    for step in steps {
        let t = Instant::now();
        let outcome = commands::run(step, &mut ctx).unwrap_or_else(|e| Outcome::failure(step, &e));
        envelope.timings.push(Timing { command: step.name().into(), seconds: t.elapsed().as_secs_f64() });
        for a in outcome.artifacts.iter().filter(|a| wanted(config, &a.name)) {
            std::fs::write(dir.join(&a.name), &a.contents).with_context(|| format!("writing {}", a.name))?;
            envelope.artifacts.push(a.name.clone());
        }
        envelope.verdicts.extend(outcome.verdicts);
    }
    if command == Command::ReproduceAll {
        envelope.timings.push(Timing { command: command.name().into(), seconds: start.elapsed().as_secs_f64() });
    }
    envelope.write(&dir)?;
    Ok((envelope, dir))
}

/// Parses `args`, runs, prints a summary, and returns the process exit code:
/// 0 when every verdict passes, 1 on a failed verification, 2 on a usage error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let config = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match execute(cli.command, &config) {
        Ok((envelope, dir)) => {
            for v in &envelope.verdicts {
                println!("{:<32} {:<48} {}", v.command, v.check, v.verdict.as_str());
            }
            for t in &envelope.timings {
                println!("{:<32} {:.2} s", t.command, t.seconds);
            }
            println!("report: {}", dir.join("report.json").display());
            if envelope.passed() {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
