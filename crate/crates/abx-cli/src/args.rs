use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::list::{parse_pair, u32_list, usize_list, List};

/// Abstraction experiments on tabular POMDPs and randomized checks of their
/// performance-loss bounds.
///
/// Sweep flags accept comma lists and inclusive ranges, e.g. `--k 1:10` or
/// `--distances 3,10,50,100`. Flags override values read with `--config`.
#[derive(Debug, Parser)]
#[command(name = "abx", version, propagate_version = true)]
pub struct Cli {
    /// TOML file with experiment parameters; see README for the schema.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads (0 picks one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Suffix-length sweep on the warm-cold lattice; writes warm_cold.csv.
    WarmCold(WarmColdArgs),
    /// Sign-chain generalization; writes sign_chain.csv.
    SignChain(SignChainArgs),
    /// Transition error of the two-state chain abstraction; writes chain_error.csv.
    ChainError(ChainErrorArgs),
    /// Abstract-state-space trade-off curve; writes corollary.csv.
    Corollary(CorollaryArgs),
    /// Randomized bound and identity verification; writes report.json.
    VerifyBounds(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::WarmCold(_) => "warm-cold",
            Command::SignChain(_) => "sign-chain",
            Command::ChainError(_) => "chain-error",
            Command::Corollary(_) => "corollary",
            Command::VerifyBounds(_) => "verify-bounds",
        }
    }

    pub fn out(&self) -> &OutArgs {
        match self {
            Command::WarmCold(a) => &a.out,
            Command::SignChain(a) => &a.out,
            Command::ChainError(a) => &a.out,
            Command::Corollary(a) => &a.out,
            Command::VerifyBounds(a) => &a.out,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output directory (ABX_OUT takes precedence).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitialObs {
    Start,
    Cold,
}

#[derive(Debug, Args)]
pub struct WarmColdArgs {
    #[arg(long)]
    pub train_radius: Option<u32>,
    /// Suffix lengths.
    #[arg(long, value_parser = usize_list)]
    pub k: Option<List<usize>>,
    /// Test goal distances.
    #[arg(long, value_parser = u32_list)]
    pub distances: Option<List<u32>>,
    /// Walks per test start.
    #[arg(long)]
    pub walks: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enumeration horizon of every dictionary (default: the suffix length).
    #[arg(long)]
    pub dictionary_horizon: Option<usize>,
    /// Observation emitted before the first move.
    #[arg(long, value_enum)]
    pub initial_observation: Option<InitialObs>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SignChainArgs {
    /// Distances of training posts A and B, e.g. `5,5`.
    #[arg(long, value_parser = parse_pair)]
    pub train_offsets: Option<(u32, u32)>,
    /// Distances of both test posts.
    #[arg(long, value_parser = u32_list)]
    pub distances: Option<List<u32>>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dictionary_horizon: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ChainErrorArgs {
    /// Chain lengths N.
    #[arg(long = "n", value_parser = usize_list)]
    pub lengths: Option<List<usize>>,
    /// Probability that a left move succeeds.
    #[arg(long)]
    pub success_prob: Option<f64>,
    #[arg(long)]
    pub discount: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct CorollaryArgs {
    /// Numbers of training samples T.
    #[arg(long = "T", value_parser = usize_list)]
    pub t: Option<List<usize>>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Upper bound B on the learning-error term.
    #[arg(long = "B")]
    pub b: Option<f64>,
    #[arg(long)]
    pub actions: Option<usize>,
    /// Abstract state counts.
    #[arg(long, value_parser = usize_list)]
    pub s_phi: Option<List<usize>>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Trials per bound suite.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Instances per identity suite.
    #[arg(long)]
    pub identity_instances: Option<usize>,
    /// Monte-Carlo samples of each unknown-mass check.
    #[arg(long)]
    pub dirichlet_samples: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}
