//! Batch front end: extraction, evaluation, sweeps, sampling, DOT export and
//! a reference SEQBOX/1 server.
//!
//! Exit codes: 0 success, 2 I/O or unreadable input, 64 usage, 70 numeric
//! failure.

mod commands;
mod spec;
mod sweep;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::spectral::DEFAULT_RANK_TOLERANCE;

pub use spec::OracleSpec;
pub use sweep::{parse_basis_sizes, parse_ranks, SweepGrid};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NUMERIC: i32 = 70;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_IO,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub(crate) fn input(path: &Path, err: Error) -> Self {
        CliError::io(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Io(_) | Error::Parse { .. } | Error::OracleTransport { .. } => EXIT_IO,
            Error::Query { source, .. } if matches!(**source, Error::OracleTransport { .. }) => EXIT_IO,
            Error::InvalidInput(_) | Error::SymbolOutOfRange { .. } | Error::CapabilityMissing(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        CliError {
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::io(err.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wa-distill",
    version,
    about = "Extract weighted automata from black-box sequence scorers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract a weighted automaton from an oracle.
    Extract(ExtractArgs),
    /// Compare a candidate model against a reference on an evaluation set.
    Evaluate(EvaluateArgs),
    /// Extract and evaluate over a grid of basis sizes, ranks and seeds.
    Sweep(SweepArgs),
    /// Sample strings from an oracle into a string file.
    Sample(SampleArgs),
    /// Render an automaton file as a Graphviz digraph.
    Dot(DotArgs),
    /// Serve an oracle over SEQBOX/1 on stdin/stdout or TCP.
    Serve(ServeArgs),
    /// Write a random probabilistic automaton.
    RandomWa(RandomWaArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Sampling {
    Uniform,
    Generative,
    Dataset,
}

/// Basis construction flags shared by `extract` and `sweep`.
#[derive(Debug, Args)]
pub struct BasisArgs {
    /// Maximum length of sampled basis strings.
    #[arg(long, default_value_t = 10)]
    pub max_len: usize,
    #[arg(long, value_enum, default_value_t = Sampling::Uniform)]
    pub sampling: Sampling,
    /// String file for `--sampling dataset`.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Relative singular-value cutoff for the effective rank.
    #[arg(long, default_value_t = DEFAULT_RANK_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub oracle: OracleSpec,
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    pub p: u64,
    #[arg(long, default_value_t = 300, value_parser = clap::value_parser!(u64).range(1..))]
    pub s: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub rank: u64,
    #[command(flatten)]
    pub basis: BasisArgs,
    /// Reuse a basis dump instead of sampling one.
    #[arg(long, conflicts_with_all = ["p", "s"])]
    pub basis_file: Option<PathBuf>,
    #[arg(long, env = "WA_DISTILL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output automaton file.
    #[arg(long)]
    pub out: PathBuf,
    /// Extraction report file (printed to stdout when omitted).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the sampled basis here.
    #[arg(long)]
    pub dump_basis: Option<PathBuf>,
}

/// Evaluation set flags shared by `evaluate` and `sweep`.
#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Test string file.
    #[arg(long)]
    pub eval: Option<PathBuf>,
    /// Reference probabilities aligned with `--eval`.
    #[arg(long, requires = "eval")]
    pub solution: Option<PathBuf>,
    /// Keep at most this many test strings.
    #[arg(long, default_value_t = crate::metrics::DEFAULT_TEST_SIZE)]
    pub n_test: usize,
    /// Sample this many strings from the reference as a second evaluation set.
    #[arg(long)]
    pub eval_sample: Option<usize>,
    /// Length cap for sampled evaluation strings.
    #[arg(long, default_value_t = 10_000)]
    pub eval_max_len: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub reference: OracleSpec,
    #[arg(long)]
    pub candidate: OracleSpec,
    /// Model whose perplexity is the ratio's numerator (default: the reference).
    #[arg(long)]
    pub baseline: Option<OracleSpec>,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long, env = "WA_DISTILL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Extraction report of the candidate, echoed into the metrics.
    #[arg(long)]
    pub provenance: Option<PathBuf>,
    #[arg(long, default_value = "")]
    pub problem: String,
    /// Append one CSV row per evaluation set to this file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Recount nonpositive candidate scores directly and check zeros_pct.
    #[arg(long)]
    pub audit_zeros: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub oracle: OracleSpec,
    /// Basis sizes, e.g. `300x300,400x400`.
    #[arg(long, default_value = "300x300")]
    pub basis_sizes: String,
    /// Ranks, e.g. `1-100` or `1,2,5,10`.
    #[arg(long, default_value = "1-100")]
    pub ranks: String,
    /// Extraction seeds, comma separated (default: `--seed`).
    #[arg(long)]
    pub seeds: Option<String>,
    #[command(flatten)]
    pub basis: BasisArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    /// Seed for sampling the evaluation set.
    #[arg(long, env = "WA_DISTILL_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "")]
    pub problem: String,
    /// Output CSV table.
    #[arg(long)]
    pub out: PathBuf,
    /// Best-row summary file (printed to stdout as well).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Worker threads (default: available cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub oracle: OracleSpec,
    #[arg(long, default_value_t = crate::metrics::DEFAULT_SAMPLED_SIZE)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_len: usize,
    #[arg(long, env = "WA_DISTILL_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DotArgs {
    #[arg(long)]
    pub wa: PathBuf,
    #[arg(long, default_value_t = crate::dot::DEFAULT_DOT_THRESHOLD)]
    pub threshold: f64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub oracle: OracleSpec,
    /// Listen on this TCP address (e.g. `127.0.0.1:7000`) instead of stdio.
    #[arg(long)]
    pub tcp: Option<String>,
}

#[derive(Debug, Args)]
pub struct RandomWaArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub states: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub alphabet: u64,
    #[arg(long, env = "WA_DISTILL_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("wa-distill: {e}");
            e.code
        }
    }
}
