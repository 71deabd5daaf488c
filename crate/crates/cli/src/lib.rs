//! Plot-data and verification front end for the uncertain-label Bayes-risk toolkit.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, Result};

use config::{parse_override, Common, FileConfig};
use output::Sink;

#[derive(Debug, Parser)]
#[command(
    name = "ussl",
    version,
    about = "Bayes-risk theory and simulation for semi-supervised classification with uncertain labels"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; command parameters live under `[<command>]`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Monte Carlo replicates.
    #[arg(long, global = true)]
    pub reps: Option<usize>,

    /// Output directory; tables go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Fixed-point solver tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Command parameter override, `key=value` with a TOML value. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE", value_parser = parse_override)]
    pub overrides: Vec<(String, toml::Value)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Lambda,
    C,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Overlaps, Bayes risk and usefulness over a (lambda, c) grid.
    Solve,
    /// Relative error of the closed-form overlap approximation over (eps, q).
    ApproxError,
    /// Usefulness against Bayes risk.
    Usefulness,
    /// Labeled samples needed at a given confidence, theory and simulation.
    LabeledNeeded,
    /// Error reduction from unlabeled data along lambda or c.
    Reduction {
        #[arg(value_enum)]
        sweep: Sweep,
    },
    /// Oracle, supervised and semi-supervised errors per replicate.
    Simulate,
    /// Monte Carlo scalar-channel overlap against quadrature.
    ChannelCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::ApproxError => "approx-error",
            Command::Usefulness => "usefulness",
            Command::LabeledNeeded => "labeled-needed",
            Command::Reduction { .. } => "reduction",
            Command::Simulate => "simulate",
            Command::ChannelCheck => "channel-check",
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let file = match &g.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let common = Common::resolve(&file, g.seed, g.reps, g.tol)?;
    let name = cli.command.name();
    let out = commands::dispatch(&cli.command, &file, &common, &g.overrides)?;
    let manifest_name = match cli.command {
        Command::Reduction { sweep: Sweep::Lambda } => "reduction-lambda",
        Command::Reduction { sweep: Sweep::C } => "reduction-c",
        _ => name,
    };
    Sink::new(g.out.clone()).emit(manifest_name, &out.config, &out.tables)
}
