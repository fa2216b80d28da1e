//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or output error, 2 numerical
//! failure.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ConfigError, RunConfig};
pub use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hopfdde", version, about = "Hopf bifurcation analysis of a distributed-delay p53-mdm2 model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Prefix for CSV and SVG outputs.
    #[arg(long, global = true, default_value = "hopfdde")]
    pub out_prefix: PathBuf,
    /// Human-readable report instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Positive equilibrium and its residuals.
    Equilibrium,
    /// Characteristic coefficients, zero-delay verdict and Hopf points.
    Stability,
    /// Normal-form coefficients and bifurcation quantities.
    Normalform,
    /// Integrate the delay system and write CSV and SVG output.
    Simulate,
    /// Classify long-term behaviour over a range of delays.
    Scan,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Io(String),
    Numerical(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::InvalidParameter { .. } => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) | Failure::Io(_) => EXIT_CONFIG,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Numerical(m) => m,
        }
    }
}

/// Runs one command; the report (if any) and whether the command counts as
/// a numerical failure even though it produced one.
pub fn execute(cli: &Cli) -> Result<(Report, bool), Failure> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => return Err(Failure::Config("--config is required".into())),
    };
    match cli.command {
        Command::Equilibrium => Ok((commands::cmd_equilibrium(&cfg)?, false)),
        Command::Stability => commands::cmd_stability(&cfg),
        Command::Normalform => Ok((commands::cmd_normalform(&cfg)?, false)),
        Command::Simulate => Ok((commands::cmd_simulate(&cfg, &cli.out_prefix)?, false)),
        Command::Scan => commands::cmd_scan(&cfg, &cli.out_prefix),
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok((report, failed)) => {
            let text = if cli.pretty {
                report.render()
            } else {
                let mut t = serde_json::to_string_pretty(&report).expect("reports serialize");
                t.push('\n');
                t
            };
            let mut out = std::io::stdout().lock();
            let _ = out.write_all(text.as_bytes());
            let _ = out.flush();
            if failed {
                EXIT_NUMERICAL
            } else {
                EXIT_OK
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}
