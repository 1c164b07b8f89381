use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "obsgraph",
    version,
    about = "Structural and Lie-derivative observability analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a model file.
    Check {
        /// Model file, built-in key, or `-` for stdin.
        model: String,
    },
    /// Structural observability from the inference digraph.
    Analyze(AnalyzeArgs),
    /// Generic rank of the Lie-derivative observability matrix.
    Lie(LieArgs),
    /// Time graph analysis against Lie analysis.
    Bench(BenchArgs),
    /// List built-in models.
    Models {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Model file, built-in key, or `-` for stdin.
    pub model: String,
    /// Print the JSON report instead of text.
    #[arg(long)]
    pub json: bool,
    /// Write the digraph in DOT format (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    pub dot: Option<PathBuf>,
    /// Write the adjacency matrix as CSV (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Suggest a minimal set of states to measure.
    #[arg(long)]
    pub suggest: bool,
}

#[derive(Debug, Args)]
pub struct LieArgs {
    /// Model file, built-in key, or `-` for stdin.
    pub model: String,
    /// Highest derivative order [default: states - 1].
    #[arg(long)]
    pub order_cap: Option<usize>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,
    /// Relative pivot tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// RNG seed; OBSGRAPH_SEED takes precedence.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Differentiate each chain element symbolically instead of dual sweeps.
    #[arg(long)]
    pub symbolic_jacobian: bool,
    /// Stop raising the order once this many seconds have elapsed.
    #[arg(long, value_name = "SECONDS")]
    pub time_budget: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Model files or built-in keys.
    pub models: Vec<String>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeat: u64,
    #[arg(long, default_value_t = 2)]
    pub warmup: u64,
    /// RNG seed; OBSGRAPH_SEED takes precedence.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Also time graph analysis on synthetic chain-of-cycles systems with
    /// these edge counts.
    #[arg(long, value_delimiter = ',', value_name = "EDGES")]
    pub scaling: Vec<usize>,
    /// Write the JSON report here (`-` for stdout, replacing the table).
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}
