//! Command line front end: `abc <subcommand> --config <path> ...`.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod render;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use commands::{Ctx, Suite};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "abc", version, about = "Finite stages of approximation-by-conjugation maps: parameters, verification, diagnostics and rendering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: config output_dir, else ./abc-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed (default: config seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Sample budget override (orbit: number of iterates).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Stage number n to act on (default: first configured stage).
    #[arg(long, global = true)]
    pub stage: Option<u32>,
    /// Verification suite.
    #[arg(long, global = true, value_enum, ignore_case = true, default_value = "ALL")]
    pub suite: Suite,
    /// Trigonometric degree for approx (default: config degrees).
    #[arg(long, global = true)]
    pub degree: Option<usize>,
    /// Target: approx `shear`; orbit start `theta,r,t`; render
    /// `partition:<level>`, `orbit:<csv>` or `image:<phi|Phi|h|f>`.
    #[arg(long, global = true)]
    pub what: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Stage table, derived parameters and growth-condition verdicts.
    Params,
    /// Invariant suites; exit 0 iff every selected check passes.
    Verify,
    /// Distribution constants of Φ_n on η̂ elements.
    Distribute,
    /// Correlations of f_n^{m_n}.
    Mixing,
    /// Trigonometric approximation of the shear.
    Approx,
    /// Orbit of (f_n, df_n) as CSV.
    Orbit,
    /// Deterministic SVG of partitions, orbits or image sets.
    Render,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Verify => "verify",
            Command::Distribute => "distribute",
            Command::Mixing => "mixing",
            Command::Approx => "approx",
            Command::Orbit => "orbit",
            Command::Render => "render",
        }
    }
}

/// Executes a parsed command line and returns the terminal summary.
pub fn execute(cli: &Cli) -> Result<String> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config <path> is required".into()))?;
    let cfg = RunConfig::load(path)?;
    let ctx = Ctx::new(cfg, cli.out.clone(), cli.seed, cli.samples, cli.stage)?;
    let what = cli.what.as_deref();
    crate::sampling::with_workers(|| match cli.command {
        Command::Params => commands::cmd_params(&ctx),
        Command::Verify => {
            let r = commands::cmd_verify(&ctx, cli.suite)?;
            let text = commands::verify_summary(&r);
            commands::verify_outcome(&r).map_err(|e| Error::Assertion(format!("{e}\n{text}")))?;
            Ok(text)
        }
        Command::Distribute => commands::cmd_distribute(&ctx),
        Command::Mixing => commands::cmd_mixing(&ctx),
        Command::Approx => commands::cmd_approx(&ctx, cli.degree, what),
        Command::Orbit => commands::cmd_orbit(&ctx, what),
        Command::Render => commands::cmd_render(&ctx, what),
    })
}

/// Parses `args`, runs, prints, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            println!("{text}");
            0
        }
        Err(e) => {
            eprintln!("abc {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
