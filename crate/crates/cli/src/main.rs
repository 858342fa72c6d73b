mod commands;
mod input;
mod posterior;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use input::DataArgs;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Format(#[from] revmc::formats::FormatError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Precondition(_) => 3,
            _ => 2,
        }
    }
}

/// Bayesian model comparison and posterior analysis for reversible,
/// variable-order Markov chains.
#[derive(Debug, Parser)]
#[command(name = "revmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Log marginal likelihood of the data under one model
    Evidence {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Report log10 instead of natural log
        #[arg(long)]
        log10: bool,
    },
    /// Rank several models by evidence
    Compare {
        /// Model configs (two or more)
        #[arg(long = "model", required = true, num_args = 1..)]
        models: Vec<PathBuf>,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        log10: bool,
    },
    /// Draw stationary laws from the posterior and summarize their spectra
    SamplePosterior {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        /// Number of independent draws
        #[arg(long)]
        samples: usize,
        /// Walk steps per draw
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
        /// Output directory (created if missing)
        #[arg(long)]
        out: PathBuf,
        /// Lag time of one step, to report implied timescales
        #[arg(long)]
        tau_lag: Option<f64>,
        /// Also write histogram data and a gnuplot script
        #[arg(long)]
        gnuplot: bool,
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// Simulate the prior predictive walk of a model
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Simulate a fixed Markov chain given as a transition file
    SimulateChain {
        #[arg(long)]
        chain: PathBuf,
        /// Initial state, e.g. "0 1"
        #[arg(long)]
        v0: String,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Transition-count table of a trajectory
    Counts {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        order: usize,
    },
    /// A trajectory with the given transition counts
    Realize {
        #[arg(long)]
        counts: PathBuf,
    },
    /// Test a chain for reversibility
    CheckReversible {
        #[arg(long)]
        chain: PathBuf,
        /// Longest cycle tried by the Kolmogorov test (default 2(r+1)+2)
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Eigenvalues and implied timescales of a chain
    Spectra {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        tau_lag: Option<f64>,
    },
    /// Prior expectation of the probability of a closed path
    CycleExpectation {
        #[arg(long)]
        model: PathBuf,
        /// Closed path as symbols, e.g. "0 1 0"
        #[arg(long)]
        cycle: String,
    },
    /// Replicated comparison on a lumped metastable random walk
    Example1 {
        #[arg(long, default_value_t = 30)]
        replications: usize,
        #[arg(long)]
        seed: u64,
        /// Length of each lumped observation
        #[arg(long, default_value_t = 1000)]
        length: usize,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evidence { model, data, log10 } => commands::evidence(&model, &data, log10),
        Command::Compare { models, data, log10 } => commands::compare(&models, &data, log10),
        Command::SamplePosterior {
            model,
            data,
            samples,
            steps,
            seed,
            out,
            tau_lag,
            gnuplot,
            bins,
        } => posterior::run(posterior::Options {
            model,
            data,
            samples,
            steps,
            seed,
            out,
            tau_lag,
            gnuplot,
            bins,
        }),
        Command::Simulate { model, steps, seed } => commands::simulate(&model, steps, seed),
        Command::SimulateChain { chain, v0, steps, seed } => commands::simulate_chain(&chain, &v0, steps, seed),
        Command::Counts { data, order } => commands::counts(&data, order),
        Command::Realize { counts } => commands::realize(&counts),
        Command::CheckReversible { chain, max_len } => commands::check_reversible(&chain, max_len),
        Command::Spectra { chain, tau_lag } => commands::spectra(&chain, tau_lag),
        Command::CycleExpectation { model, cycle } => commands::cycle_expectation(&model, &cycle),
        Command::Example1 {
            replications,
            seed,
            length,
        } => commands::example1(replications, seed, length),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
