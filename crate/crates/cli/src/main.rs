//! Batch frontend for faultline-aware team partitioning.
//!
//! Exit codes: 0 success, 1 IO/data errors, 2 usage errors, 3 infeasible
//! team sizes.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "faultline",
    version,
    about = "Partition multi-attribute populations into low-faultline teams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PopulationArgs {
    /// Population CSV (header row; optional leading `id` column).
    #[arg(long)]
    input: PathBuf,
    /// Feature schema JSON.
    #[arg(long)]
    schema: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Splitter,
    Greedy,
    Clustering,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Matching {
    Exact,
    Greedy,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Measure {
    Ct,
    Asw,
    Ss,
    Pct,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum LearnMode {
    Regression,
    Classification,
}

#[derive(Subcommand)]
enum Command {
    /// Partition a population into fixed-size teams.
    Partition {
        #[command(flatten)]
        population: PopulationArgs,
        /// Uniform team size (population size must be a multiple).
        #[arg(long, conflicts_with = "sizes")]
        team_size: Option<usize>,
        /// Explicit comma-separated team sizes summing to the population.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value = "splitter")]
        algorithm: Algorithm,
        #[arg(long, value_enum, default_value = "exact")]
        matching: Matching,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Output directory for assignment.csv and summary.json, or `-`
        /// to stream the assignment CSV to stdout.
        #[arg(long)]
        output: String,
    },
    /// Score existing teams under one measure.
    Score {
        #[command(flatten)]
        population: PopulationArgs,
        /// Teams CSV: team_id,members(semicolon-separated)[,outcome].
        #[arg(long)]
        teams: PathBuf,
        #[arg(long, value_enum)]
        measure: Measure,
        /// Penalty scheme JSON (array of m+1 reals); required for pct.
        #[arg(long)]
        penalty: Option<PathBuf>,
        /// Output directory, or `-` for stdout.
        #[arg(long)]
        output: String,
    },
    /// Score teams under CT, SS, and ASW, timing each measure.
    MeasureCompare {
        #[command(flatten)]
        population: PopulationArgs,
        #[arg(long)]
        teams: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Output directory, or `-` for stdout.
        #[arg(long)]
        output: String,
    },
    /// Generate a population with controlled triangle-type fractions.
    Synth1 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Target all-negative (all-distinct) triangle fraction.
        #[arg(long)]
        neg: f64,
        /// Target all-positive (all-same) triangle fraction.
        #[arg(long)]
        pos: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Generate a corpus of teams made of homogeneous subgroups.
    Synth2 {
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16, 32, 64])]
        team_sizes: Vec<usize>,
        /// Subgroup counts per team size; defaults to powers of two up to
        /// each team size.
        #[arg(long, value_delimiter = ',')]
        subgroup_counts: Option<Vec<usize>>,
        #[arg(long, default_value_t = 100)]
        teams_per_config: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Fit a penalty scheme from team outcomes or real-vs-fake labels.
    LearnPenalty {
        #[command(flatten)]
        population: PopulationArgs,
        /// Teams CSV with outcomes in the third column (regression mode).
        #[arg(long)]
        teams: PathBuf,
        #[arg(long, value_enum, default_value = "regression")]
        mode: LearnMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Pairwise Cramér's V matrix over the population's features.
    CramersV {
        #[command(flatten)]
        population: PopulationArgs,
        /// Output directory, or `-` for stdout.
        #[arg(long)]
        output: String,
    },
    /// Build the population encoding a clique-partitioning instance.
    ReduceClique {
        /// Edge list file: optional `nodes N` line, then `u v` pairs.
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        output: PathBuf,
    },
}

/// Command failures: flag misuse exits 2, infeasible sizes 3, IO/data 1.
enum CliError {
    Usage(String),
    Core(faultline::Error),
}

impl From<faultline::Error> for CliError {
    fn from(err: faultline::Error) -> CliError {
        CliError::Core(err)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(faultline::Error::Infeasible(_)) => 3,
            CliError::Core(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Partition {
            population,
            team_size,
            sizes,
            algorithm,
            matching,
            seed,
            restarts,
            max_iters,
            threads,
            output,
        } => commands::partition(
            &population,
            team_size,
            sizes,
            algorithm,
            matching,
            seed,
            restarts,
            max_iters,
            threads,
            &output,
        ),
        Command::Score {
            population,
            teams,
            measure,
            penalty,
            output,
        } => commands::score(&population, &teams, measure, penalty.as_deref(), &output),
        Command::MeasureCompare {
            population,
            teams,
            threads,
            output,
        } => commands::measure_compare(&population, &teams, threads, &output),
        Command::Synth1 {
            n,
            m,
            neg,
            pos,
            seed,
            output,
        } => commands::synth1(n, m, neg, pos, seed, &output),
        Command::Synth2 {
            team_sizes,
            subgroup_counts,
            teams_per_config,
            seed,
            output,
        } => commands::synth2(
            &team_sizes,
            subgroup_counts.as_deref(),
            teams_per_config,
            seed,
            &output,
        ),
        Command::LearnPenalty {
            population,
            teams,
            mode,
            seed,
            output,
        } => commands::learn_penalty(&population, &teams, mode, seed, &output),
        Command::CramersV { population, output } => commands::cramers_v(&population, &output),
        Command::ReduceClique { edges, k, output } => commands::reduce_clique(&edges, k, &output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
