//! Argument parsing and dispatch.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{self, What};
use crate::config::Config;
use crate::error::{AppError, Result};
use crate::setup;

pub const THREADS_ENV: &str = "GAMESCOPE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "gamescope", version, about = "Vector-field diagnostics for two-player differentiable games")]
pub struct Cli {
    /// Key-value config file (`key = value` per line, `#` comments).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Hyperparameter preset for GAN runs: paper or ci.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Override a single config key; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report, spectrum, path-angle and quiver for a small game.
    Demo {
        /// example1, example2, bilinear, linear, linear:attraction, linear:rotation or linear:mixed
        kind: String,
    },
    /// Train a GAN on the mixture of Gaussians.
    Train {
        /// nsgan, wgangp or wganclip
        game: Option<String>,
        /// gd, eg, adam or extraadam
        optimizer: Option<String>,
    },
    /// Diagnose a trained run or a checkpoint.
    Diagnose {
        #[arg(value_enum)]
        what: WhatArg,
        /// Run directory written by `train`.
        #[arg(long, value_name = "DIR")]
        run: Option<PathBuf>,
        /// Single checkpoint to use for spectra and classification.
        #[arg(long, value_name = "FILE")]
        checkpoint: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WhatArg {
    PathAngle,
    Spectrum,
    Hessians,
    Classify,
    All,
}

impl From<WhatArg> for What {
    fn from(w: WhatArg) -> Self {
        match w {
            WhatArg::PathAngle => What::PathAngle,
            WhatArg::Spectrum => What::Spectrum,
            WhatArg::Hessians => What::Hessians,
            WhatArg::Classify => What::Classify,
            WhatArg::All => What::All,
        }
    }
}

/// Caps rayon's pool from `GAMESCOPE_THREADS`.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| AppError::usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    // A second call in the same process (tests) keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn layered(cli: &Cli, base: Option<Config>, positional: &[(&str, Option<&str>)]) -> Result<Config> {
    let mut file = base.unwrap_or_default();
    if let Some(path) = &cli.config {
        file.merge(&Config::load(path)?);
    }
    let mut over = Config::new();
    for (k, v) in positional {
        if let Some(v) = v {
            over.set(k, *v)?;
        }
    }
    if let Some(p) = &cli.preset {
        over.set("preset", p.as_str())?;
    }
    if let Some(s) = cli.seed {
        over.set("seed", s.to_string())?;
    }
    for a in &cli.set {
        let (k, v) = Config::parse_assignment(a)?;
        over.set(&k, v)?;
    }
    setup::resolve(&file, &over)
}

pub fn run(cli: &Cli) -> Result<()> {
    init_threads()?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("gamescope-out"));
    match &cli.command {
        Command::Demo { kind } => {
            let cfg = layered(cli, None, &[("game", Some(kind))])?;
            commands::demo(&cfg, &out)
        }
        Command::Train { game, optimizer } => {
            let cfg = layered(cli, None, &[("game", game.as_deref()), ("optimizer", optimizer.as_deref())])?;
            let s = commands::train(&cfg, &out)?;
            eprintln!(
                "relative field norm {} ({})",
                crate::formats::fmt_num(s.relative_norm),
                if s.converged { "converged" } else { "not converged" }
            );
            Ok(())
        }
        Command::Diagnose { what, run, checkpoint } => {
            let cfg = layered(cli, commands::run_config(run.as_ref())?, &[])?;
            commands::diagnose(&cfg, (*what).into(), run.as_deref(), checkpoint.as_deref(), &out)
        }
    }
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gamescope: {e}");
            e.exit_code()
        }
    }
}
