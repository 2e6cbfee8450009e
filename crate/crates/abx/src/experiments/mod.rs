//! Policy-dictionary experiments and the drivers behind every output file.
//!
//! A policy dictionary maps abstract history keys to optimal-action counts
//! gathered by exhaustively enumerating training histories. Rollouts then
//! act from those counts on test starts and record their mistakes. The
//! drivers return sorted rows; [`output`] turns them into CSV and JSON.

mod config;
mod dictionary;
mod drivers;
pub mod output;
mod rollout;
mod summary;

pub use config::{
    ChainErrorExperiment, CorollaryExperiment, ExperimentConfig, SignChainExperiment, VerifyExperiment,
    WarmColdExperiment,
};
pub use dictionary::{build_policy_dictionary, PolicyDictionary, DEFAULT_DICTIONARY_CAP};
pub use drivers::{
    chain_error_experiment, corollary_experiment, sign_chain_experiment, verify_bounds_suite, warm_cold_dictionary,
    warm_cold_experiment, warm_cold_test_starts, ChainErrorRow, CorollaryRow, DirichletOutcome, SignChainRow, VerifyReport, WarmColdRow,
    SIGN_CHAIN_ABSTRACTIONS,
};
pub use rollout::{rollout_seed, run_rollouts, RolloutPolicy, RolloutRecord, RolloutSpec};
pub use summary::{sign_chain_summary, MeanSem, SignChainCell, WarmColdCell, WarmColdSummary};
