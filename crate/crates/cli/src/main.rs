//! `sbm`: fit Bayesian node-corrected blockmodels, estimate community
//! assignments, generate synthetic networks, and evaluate partitions.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.

mod estimate;
mod evaluate;
mod fit;
mod generate;
mod labelio;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sbm_core::Error;

#[derive(Parser)]
#[command(name = "sbm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic networks (edge list + reference labels).
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Fit the blockmodel: restarts, mode finding, then Gibbs chains.
    Fit(FitArgs),
    /// Turn a fitted run into point estimates and posterior summaries.
    Estimate(EstimateArgs),
    /// Misclassification rates of estimates against a reference partition.
    Evaluate(EvaluateArgs),
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Kernel-and-crown spike network (deterministic).
    Spike {
        /// Kernel size of community 1 (>= 3).
        #[arg(long)]
        n1: usize,
        /// Size ratio of community 2 (>= 1).
        #[arg(long)]
        r: usize,
        #[arg(long, env = "SBM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a graph from the blockmodel itself.
    Sbm {
        /// Community sizes, e.g. 50,50.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Off-diagonal block log-odds; one value broadcasts to all pairs.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        gamma: Vec<f64>,
        /// Constant node intercept.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta_const: f64,
        /// File with one intercept per line (overrides --eta-const).
        #[arg(long)]
        eta_file: Option<PathBuf>,
        #[arg(long, env = "SBM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Power-law benchmark graph with planted communities.
    Benchmark {
        #[arg(long)]
        n: usize,
        /// Degree power-law exponent.
        #[arg(long)]
        a: f64,
        /// Community-size power-law exponent.
        #[arg(long)]
        b: f64,
        /// Fraction of each node's edges that cross communities (0, 1).
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        avg_degree: f64,
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long)]
        min_community: Option<usize>,
        #[arg(long)]
        max_community: Option<usize>,
        #[arg(long, env = "SBM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FitArgs {
    /// Edge-list path, or '-' for standard input.
    #[arg(long)]
    graph: String,
    /// Number of communities (>= 2).
    #[arg(long, env = "SBM_K", value_parser = clap::value_parser!(u32).range(2..))]
    k: u32,
    /// Prior variance of the ridge prior on (gamma, eta).
    #[arg(long, env = "SBM_TAU2", default_value_t = 25.0)]
    tau2: f64,
    /// Dirichlet parameter; one value broadcasts to all K communities.
    #[arg(long, env = "SBM_ALPHA", value_delimiter = ',', default_value = "1.0")]
    alpha: Vec<f64>,
    #[arg(long, env = "SBM_ITERS", default_value_t = 5000)]
    iters: u64,
    #[arg(long, env = "SBM_BURNIN", default_value_t = 1000)]
    burnin: u64,
    #[arg(long, env = "SBM_THIN", default_value_t = 1)]
    thin: u64,
    #[arg(long, env = "SBM_CHAINS", default_value_t = 4)]
    chains: u32,
    /// Prior restarts for the mode search that initializes the chains.
    #[arg(long, env = "SBM_RESTARTS", default_value_t = 32)]
    restarts: u32,
    #[arg(long, env = "SBM_SEED", default_value_t = 0)]
    seed: u64,
    /// Remove zero-degree nodes during ingestion.
    #[arg(long)]
    drop_isolated: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum EstimatorKind {
    Centroid,
    Binder,
    Map,
}

impl EstimatorKind {
    fn name(self) -> &'static str {
        match self {
            EstimatorKind::Centroid => "centroid",
            EstimatorKind::Binder => "binder",
            EstimatorKind::Map => "map",
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Directory written by `sbm fit`.
    #[arg(long)]
    trace_dir: PathBuf,
    #[arg(long, value_enum)]
    estimator: EstimatorKind,
    /// Credible-interval level for the block log-odds.
    #[arg(long, default_value_t = 0.95, value_parser = parse_unit_open)]
    level: f64,
    /// Graph path override (defaults to the path recorded in metadata).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Output directory (defaults to the trace directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Label file of a single estimate.
    #[arg(long, required_unless_present = "runs_glob")]
    estimate: Option<PathBuf>,
    /// Glob over estimate label files from repeated runs.
    #[arg(long)]
    runs_glob: Option<String>,
    /// Reference label file.
    #[arg(long)]
    reference: PathBuf,
    /// q for the (q/2, 1-q/2) error interval over repeated runs.
    #[arg(long, default_value_t = 0.1, value_parser = parse_unit_open)]
    q: f64,
}

fn parse_unit_open(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} must lie strictly between 0 and 1"))
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { kind } => generate::run(kind),
        Command::Fit(args) => fit::run(args),
        Command::Estimate(args) => estimate::run(args),
        Command::Evaluate(args) => evaluate::run(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        let code = match e {
            Error::Numerical(_) => 4,
            _ => 3,
        };
        std::process::exit(code);
    }
}
