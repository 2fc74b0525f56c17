//! Command-line driver: configuration, subcommands and report files.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;

use config::{Constants, Format, RunConfig};

#[derive(Parser)]
#[command(name = "htm", version, about = "Radial Hardy–Trudinger–Moser numerics on the unit disc")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy, Debug)]
enum Command {
    /// First eigenvalue of the Hardy operator.
    Eigen,
    /// One subcritical maximizer at `gamma`.
    Maximize,
    /// Maximizers over `gammas` with concentration diagnostics.
    Sweep,
    /// Green function and its regular part at the origin.
    Green,
    /// Rescaled blow-up profile of the maximizer at `gamma`.
    Bubble,
    /// Test-function check of the lower bound for each `eps`.
    Testfn,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Maximize => "maximize",
            Command::Sweep => "sweep",
            Command::Green => "green",
            Command::Bubble => "bubble",
            Command::Testfn => "testfn",
        }
    }
}

/// Every flag overrides the config field of the same name.
#[derive(Args, Debug)]
struct Overrides {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps (defaults to the available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    r_min: Option<f64>,
    #[arg(long, global = true)]
    delta_b: Option<f64>,
    /// `default`, `uniform` or a geometric ratio.
    #[arg(long, global = true)]
    grading: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Sets alpha to this multiple of the first eigenvalue.
    #[arg(long, global = true)]
    alpha_fraction: Option<f64>,
    /// Comma-separated exponents; `3.5pi` style is accepted.
    #[arg(long, global = true, value_delimiter = ',', num_args = 0..)]
    gammas: Option<Vec<String>>,
    #[arg(long, global = true, value_parser = config::parse_gamma)]
    gamma: Option<f64>,
    /// Comma-separated test-function parameters.
    #[arg(long, global = true, value_delimiter = ',', num_args = 0..)]
    eps: Option<Vec<f64>>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true, value_enum)]
    constants: Option<Constants>,
    #[arg(long, global = true)]
    beta: Option<f64>,
}

impl Overrides {
    fn resolve(self) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(p) => config::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { cfg.$f = v; })* };
        }
        set!(out, format, n, r_min, delta_b, grading, alpha, gamma, eps, tol, max_iter, constants, beta);
        if self.jobs.is_some() {
            cfg.jobs = self.jobs;
        }
        if self.alpha_fraction.is_some() {
            cfg.alpha_fraction = self.alpha_fraction;
        } else if self.alpha.is_some() {
            // an explicit --alpha beats a fraction from the config file
            cfg.alpha_fraction = None;
        }
        if let Some(gs) = self.gammas {
            cfg.gammas = gs
                .iter()
                .filter(|s| !s.trim().is_empty())
                .map(|s| config::parse_gamma(s).map_err(|e| format!("--gammas: {e}")))
                .collect::<Result<_, _>>()?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (program name first) and runs the command. The error
/// carries the exit code and a diagnostic.
pub fn execute<I, T>(args: I) -> Result<(), (u8, String)>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| (e.exit_code() as u8, e.render().to_string()))?;
    let command = cli.command;
    let cfg = cli.overrides.resolve().map_err(|msg| (2, format!("htm: {msg}")))?;
    let start = Instant::now();
    let outcome = match command {
        Command::Eigen => commands::eigen(&cfg),
        Command::Maximize => commands::maximize(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Green => commands::green(&cfg),
        Command::Bubble => commands::bubble(&cfg),
        Command::Testfn => commands::testfn(&cfg),
    };
    outcome
        .and_then(|done| {
            commands::write_metadata(&cfg, command.name(), &done.hash, start.elapsed())?;
            done.partial.map_or(Ok(()), Err)
        })
        .map_err(|f| (f.code, format!("htm {}: {}", command.name(), f.message)))
}

/// [`execute`], printing the diagnostic; returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match execute(args) {
        Ok(()) => 0,
        Err((code, msg)) => {
            if code == 0 {
                print!("{msg}");
            } else {
                eprintln!("{}", msg.trim_end());
            }
            code
        }
    }
}

#[cfg(test)]
mod tests;
