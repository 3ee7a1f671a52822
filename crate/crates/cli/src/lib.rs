//! Command-line drivers: `diagnose` (functionals and refinement trends),
//! `run` (time evolution with monitors) and `scaling-study` (mollifier
//! convergence).
//!
//! Exit codes: 0 success, 1 configuration or setup error, 2 run ended by a
//! monitor event, 3 numerical failure.

// `!(x > 0)` is used on purpose: it rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnose;
pub mod presets;
pub mod run;
pub mod scaling;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gsqg_core::evolution::EvolutionError;
use gsqg_core::velocity::VelocityError;
use thiserror::Error;

use config::{Overrides, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_EVENT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("invalid input data: {0}")]
    Data(String),
    #[error("output directory {0} is locked by another run")]
    Locked(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<VelocityError> for CliError {
    fn from(e: VelocityError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::Settings(m) => CliError::Config(vec![m]),
            EvolutionError::Sink(io) => CliError::Io(io),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)?;
    Ok(())
}

#[derive(Debug, Parser)]
#[command(name = "gsqg", version, about = "Contour dynamics and level-set diagnostics for generalized SQG")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the regularity functionals of a preset without evolving it.
    Diagnose(ConfigArgs),
    /// Evolve a preset and record monitors, snapshots and events.
    Run(ConfigArgs),
    /// Measure max |u − u_ε| against ε and fit the power law.
    ScalingStudy(ConfigArgs),
}

/// Flags shared by every command; each overrides the config file. Values
/// are validated together with the file so all problems are reported at once.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML file of `key = value` settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub nodes: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub dt: Option<String>,
    #[arg(long)]
    pub cfl: Option<String>,
    #[arg(long)]
    pub t_end: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub k_diag: Option<String>,
    #[arg(long)]
    pub k_snap: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Any other setting as KEY=VALUE (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl ConfigArgs {
    pub fn overrides(&self) -> Result<Overrides, CliError> {
        let mut o = Overrides::default();
        let flags = [
            ("alpha", &self.alpha),
            ("preset", &self.preset),
            ("levels", &self.levels),
            ("nodes", &self.nodes),
            ("eta", &self.eta),
            ("epsilon", &self.epsilon),
            ("dt", &self.dt),
            ("cfl", &self.cfl),
            ("t_end", &self.t_end),
            ("k_diag", &self.k_diag),
            ("k_snap", &self.k_snap),
            ("seed", &self.seed),
        ];
        for (key, v) in flags {
            if let Some(v) = v {
                o.push(key, v.clone());
            }
        }
        if let Some(out) = &self.out {
            // Paths are always strings, whatever they look like.
            o.push("out", toml::Value::String(out.clone()).to_string());
        }
        let mut bad = Vec::new();
        for s in &self.set {
            if let Err(e) = o.push_assignment(s) {
                bad.push(e);
            }
        }
        if bad.is_empty() {
            Ok(o)
        } else {
            Err(CliError::Config(bad))
        }
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        RunConfig::resolve(self.config.as_deref(), &self.overrides()?)
    }
}

/// Caps the worker pool from `GSQG_THREADS` (unset or 0: one per core).
pub fn init_threads() {
    let n = std::env::var("GSQG_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).unwrap_or(0);
    if n > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
}

fn prepare_out(cfg: &RunConfig) -> Result<run::OutputLock, CliError> {
    let lock = run::OutputLock::acquire(&cfg.out)?;
    write_file(&cfg.out.join("config.echo"), cfg.echo().as_bytes())?;
    Ok(lock)
}

/// Executes one command and returns its exit code.
pub fn execute(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Diagnose(args) => {
            let cfg = args.resolve()?;
            let _lock = prepare_out(&cfg)?;
            let rep = diagnose::diagnose(&cfg)?;
            diagnose::write_outputs(&cfg, &rep, &cfg.out)?;
            print!("{}", diagnose::render_report(&cfg, &rep));
            Ok(EXIT_OK)
        }
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let _lock = prepare_out(&cfg)?;
            let summary = run::run_into(&cfg, &cfg.out)?;
            print!("{}", run::render_report(&cfg, &summary));
            Ok(summary.exit_code())
        }
        Command::ScalingStudy(args) => {
            let cfg = args.resolve()?;
            let _lock = prepare_out(&cfg)?;
            let st = scaling::scaling_study(&cfg)?;
            scaling::write_outputs(&cfg, &st, &cfg.out)?;
            print!("{}", scaling::render_report(&cfg, &st));
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name) and runs; never panics on
/// bad input.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
