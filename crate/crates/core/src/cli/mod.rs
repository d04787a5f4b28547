//! Command-line front end: argument and config parsing, output directories,
//! manifests and machine-readable error records.

mod commands;
pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use commands::{execute, Outcome};
pub use config::{RunConfig, Task, Threads};

use crate::{Error, Result};

/// Environment variable naming the base directory for timestamped runs.
pub const OUTPUT_ENV: &str = "SUPFIELD_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_BASE: &str = "supfield-runs";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "supfield", version, about = "Tail asymptotics for suprema of 2-D Gaussian fields")]
pub struct Cli {
    /// Master seed [default: 1].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads, a positive integer or "auto" [default: auto].
    #[arg(long, global = true)]
    pub threads: Option<Threads>,
    /// Exact output directory instead of a timestamped subdirectory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an fBm path or a 2-D field on a grid.
    Simulate(config::SimulateArgs),
    /// Estimate a Pickands-type constant.
    Constant(config::ConstantArgs),
    /// Tail asymptote of a line scenario or a bundled preset.
    Asymptote(config::AsymptoteArgs),
    /// Tail asymptote of the fBm-sum field on the unit disc.
    FbmSum(config::FbmSumArgs),
    /// Simulated exceedance probabilities against the fBm-sum asymptote.
    Compare(config::CompareArgs),
    /// Local variance and correlation expansion checks.
    CheckExpansions(config::ExpansionArgs),
    /// Run from a config file or a previous manifest.
    Run {
        /// TOML config or manifest.
        path: PathBuf,
    },
}

impl Cli {
    /// The run described by the arguments; flags override a loaded file.
    pub fn into_config(self) -> Result<RunConfig> {
        let task = match self.command {
            Command::Simulate(a) => Task::Simulate(a),
            Command::Constant(a) => Task::Constant(a),
            Command::Asymptote(a) => Task::Asymptote(a),
            Command::FbmSum(a) => Task::FbmSum(a),
            Command::Compare(a) => Task::Compare(a),
            Command::CheckExpansions(a) => Task::CheckExpansions(a),
            Command::Run { path } => {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let mut cfg = RunConfig::from_toml(&text)?;
                if let Some(s) = self.seed {
                    cfg.seed = s;
                }
                if let Some(t) = self.threads {
                    cfg.threads = t;
                }
                if self.out.is_some() {
                    cfg.output_dir = self.out;
                }
                cfg.svg |= self.svg;
                return Ok(cfg);
            }
        };
        let cfg = RunConfig {
            task,
            seed: self.seed.unwrap_or_else(config::default_seed),
            threads: self.threads.unwrap_or_default(),
            output_dir: self.out,
            svg: self.svg,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct Record<'a> {
    level: &'a str,
    kind: &'a str,
    message: String,
}

fn emit(level: &str, kind: &str, message: String) {
    let line = serde_json::to_string(&Record { level, kind, message }).unwrap_or_default();
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Capacity(_) => "capacity",
        Error::Precondition(_) => "precondition",
        Error::Unavailable(_) => "unavailable",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
        Error::Csv(_) => "csv",
    }
}

/// Resolve and create the run directory.
fn output_dir(cfg: &RunConfig) -> Result<PathBuf> {
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        return Ok(dir.clone());
    }
    let base = std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| DEFAULT_OUTPUT_BASE.into());
    std::fs::create_dir_all(&base)?;
    let stamp = chrono::Local::now().format("%Y%m%dT%H%M%S");
    let stem = format!("{}-{stamp}-seed{}", cfg.task.name(), cfg.seed);
    for k in 0.. {
        let dir = if k == 0 { base.join(&stem) } else { base.join(format!("{stem}-{k}")) };
        match std::fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!()
}

fn write_manifest(dir: &Path, cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    let mut doc = toml::Table::new();
    doc.insert("artifact_version".into(), ARTIFACT_VERSION.into());
    doc.insert("artifacts".into(), outcome.artifacts.clone().into());
    doc.insert("warnings".into(), outcome.warnings.clone().into());
    doc.insert("config".into(), cfg.to_toml_value()?.into());
    let text = toml::to_string(&doc).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

/// Execute a validated config; returns the run directory.
pub fn run(cfg: &RunConfig) -> Result<(PathBuf, Outcome)> {
    cfg.validate()?;
    let n = match cfg.threads {
        Threads::Auto => 0,
        Threads::Count(n) => n,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let dir = output_dir(cfg)?;
    let outcome = pool.install(|| execute(cfg, &dir))?;
    write_manifest(&dir, cfg, &outcome)?;
    Ok((dir, outcome))
}

/// Parse arguments, run, and report; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let cfg = match cli.into_config() {
        Ok(c) => c,
        Err(e) => {
            emit("error", error_kind(&e), e.to_string());
            return 2;
        }
    };
    match run(&cfg) {
        Ok((dir, outcome)) => {
            for w in &outcome.warnings {
                emit("warning", "flag", w.clone());
            }
            println!("{}", dir.display());
            0
        }
        Err(e) => {
            emit("error", error_kind(&e), e.to_string());
            if matches!(e, Error::Config(_)) {
                2
            } else {
                1
            }
        }
    }
}
