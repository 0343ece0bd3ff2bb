use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mbrank::commands::{cmd_bench, cmd_rank, cmd_score, cmd_synth, Method, RankRequest};
use mbrank::config::{BenchKnobs, KernelChoice, SynthKnobs};
use mbrank_core::MeasureKind;

/// Markov blanket ranking with kernel conditional dependence measures.
#[derive(Debug, Parser)]
#[command(name = "mbrank", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank the variables of a CSV dataset against a target column.
    Rank {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: String,
        /// f (M1), z (M2) or hsic.
        #[arg(long, default_value = "f")]
        measure: MeasureKind,
        /// backward, forward or iamb.
        #[arg(long, default_value = "backward")]
        method: Method,
        #[arg(long, default_value = "linear")]
        kernel: KernelChoice,
        /// Fixed Gaussian bandwidth; omitted means the median heuristic.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Write the ranking to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic dataset and its truth sidecar.
    Synth {
        /// Flat key=value file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        knobs: SynthKnobs,
        #[arg(long)]
        out: PathBuf,
        /// Truth sidecar path; defaults to the data path with a `truth` extension.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run a benchmark sweep and write result records plus an aggregate table.
    Bench {
        /// Flat key=value file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        synth: SynthKnobs,
        #[command(flatten)]
        bench: BenchKnobs,
    },
    /// Score a ranking or subset file against a truth sidecar.
    Score {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        ranking: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Rank { data, target, measure, method, kernel, sigma, epsilon, beta, alpha, out } => {
            let req = RankRequest { data, target, measure, method, kernel, sigma, epsilon, beta, alpha, out };
            cmd_rank(&req).map(|()| false)
        }
        Command::Synth { config, knobs, out, truth } => {
            cmd_synth(config.as_deref(), knobs, &out, truth.as_deref()).map(|()| false)
        }
        Command::Bench { config, synth, bench } => cmd_bench(config.as_deref(), synth, bench),
        Command::Score { truth, ranking } => cmd_score(&truth, &ranking).map(|()| false),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
