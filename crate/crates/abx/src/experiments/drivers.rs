use serde::{Deserialize, Serialize};

use crate::abstraction::{build_abstract_mdp, max_norm_reduction_errors, reduction_errors, KeyKind};
use crate::bounds::{
    corollary_expression, dirichlet_unknown_mass_check, run_bound_suite, run_identity_suite, BoundSuite,
    DirichletCheck, IdentityReport, IdentitySuite, SuiteReport,
};
use crate::envs::{chain, ChainConfig, LatticeState, SignChain, SignChainConfig, WarmCold};
use crate::error::Result;
use crate::par::Execution;
use crate::seed::{derive_seed, hash_str};
use crate::tabular::{normalized_sr, SrKind, DEFAULT_TOL};

use super::config::{ChainErrorExperiment, CorollaryExperiment, SignChainExperiment, VerifyExperiment, WarmColdExperiment};
use super::dictionary::{build_policy_dictionary, PolicyDictionary, DEFAULT_DICTIONARY_CAP};
use super::rollout::{run_rollouts, RolloutPolicy, RolloutSpec};

/// One row of `warm_cold.csv`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WarmColdRow {
    pub goal_distance: u32,
    pub suffix_k: usize,
    pub start_x: i64,
    pub start_y: i64,
    pub repeat: usize,
    pub steps: usize,
    pub reached_goal: bool,
    pub mistakes_total: u32,
    pub mistakes_known_key: u32,
    pub mistakes_missing_key: u32,
    pub seed: u64,
}

/// One row of `sign_chain.csv`: both test posts walked once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignChainRow {
    pub abstraction: String,
    pub distance: u32,
    pub repeat: usize,
    pub optimal_steps: u64,
    pub actual_steps: u64,
    pub ratio: f64,
    pub seed: u64,
}

/// One row of `chain_error.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainErrorRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub weighted_eps_p: f64,
    pub max_eps_p: f64,
}

/// One row of `corollary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryRow {
    pub s_phi: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub eps: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub bound: f64,
}

/// Suffix-`k` dictionary of the warm-cold training starts.
pub fn warm_cold_dictionary(env: &WarmCold, k: usize, horizon: Option<usize>, exec: Execution) -> Result<PolicyDictionary> {
    build_policy_dictionary(
        env,
        &env.training_starts(),
        horizon.unwrap_or(k),
        KeyKind::Suffix(k),
        DEFAULT_DICTIONARY_CAP,
        exec,
    )
}

/// Test starts for `distance`: the training starts when it equals the
/// training radius, the diamond `|x| + |y| = distance` otherwise.
pub fn warm_cold_test_starts(env: &WarmCold, distance: u32) -> Vec<LatticeState> {
    if distance == env.config().train_radius {
        env.training_starts()
    } else {
        WarmCold::diamond(distance)
    }
}

/// Walks from every test start at each distance with every suffix length.
/// Rows are sorted by distance, `k`, start and repeat.
pub fn warm_cold_experiment(config: &WarmColdExperiment, exec: Execution) -> Result<Vec<WarmColdRow>> {
    config.validate()?;
    let env = WarmCold::new(config.env.clone())?;
    let mut rows = Vec::new();
    for &k in &config.k_list {
        let dict = warm_cold_dictionary(&env, k, config.dictionary_horizon, exec)?;
        for &distance in &config.env.distances {
            let starts = warm_cold_test_starts(&env, distance);
            let spec = RolloutSpec {
                walks_per_start: config.walks,
                max_steps: config.max_steps,
                seed: config.seed,
                stream: derive_seed(&[k as u64, u64::from(distance)]),
            };
            for record in run_rollouts(&env, RolloutPolicy::Dictionary(&dict), &starts, &spec, exec) {
                rows.push(WarmColdRow {
                    goal_distance: distance,
                    suffix_k: k,
                    start_x: record.start[0],
                    start_y: record.start[1],
                    repeat: record.repeat,
                    steps: record.steps,
                    reached_goal: record.reached_goal,
                    mistakes_total: record.mistakes_total,
                    mistakes_known_key: record.mistakes_known_key,
                    mistakes_missing_key: record.mistakes_missing_key,
                    seed: record.seed,
                });
            }
        }
    }
    rows.sort();
    Ok(rows)
}

/// Abstractions compared in the sign-chain experiment, in output order.
pub const SIGN_CHAIN_ABSTRACTIONS: [&str; 3] = ["first_obs", "full_history", "random"];

/// Ratio of optimal to actual steps for walks from both test posts.
///
/// The first-observation and full-history dictionaries are built from the
/// training posts; `random` acts uniformly. A walk cut off at `max_steps`
/// counts `max_steps` steps.
pub fn sign_chain_experiment(config: &SignChainExperiment, exec: Execution) -> Result<Vec<SignChainRow>> {
    config.validate()?;
    let env_at = |d: u32| {
        SignChain::new(SignChainConfig {
            test_offsets: (d, d),
            ..config.env.clone()
        })
    };
    let train_env = env_at(config.distances[0])?;
    let train = train_env.train_starts();
    let dict = |kind| build_policy_dictionary(&train_env, &train, config.dictionary_horizon, kind, DEFAULT_DICTIONARY_CAP, exec);
    let first_obs = dict(KeyKind::FirstObservation)?;
    let full = dict(KeyKind::FullHistory)?;

    let mut rows = Vec::new();
    for &distance in &config.distances {
        let env = env_at(distance)?;
        let starts = env.test_starts();
        let optimal_steps: u64 = starts.iter().map(SignChain::goal_distance).sum();
        for label in SIGN_CHAIN_ABSTRACTIONS {
            let policy = match label {
                "first_obs" => RolloutPolicy::Dictionary(&first_obs),
                "full_history" => RolloutPolicy::Dictionary(&full),
                _ => RolloutPolicy::Uniform,
            };
            let spec = RolloutSpec {
                walks_per_start: config.repeats,
                max_steps: config.max_steps,
                seed: config.seed,
                stream: derive_seed(&[hash_str(label), u64::from(distance)]),
            };
            let records = run_rollouts(&env, policy, &starts, &spec, exec);
            for repeat in 0..config.repeats {
                let actual_steps: u64 = records.iter().filter(|r| r.repeat == repeat).map(|r| r.steps as u64).sum();
                rows.push(SignChainRow {
                    abstraction: label.to_string(),
                    distance,
                    repeat,
                    optimal_steps,
                    actual_steps,
                    ratio: optimal_steps as f64 / actual_steps as f64,
                    seed: config.seed,
                });
            }
        }
    }
    rows.sort_by(|a, b| (&a.abstraction, a.distance, a.repeat).cmp(&(&b.abstraction, b.distance, b.repeat)));
    Ok(rows)
}

/// Weighted and max-norm transition errors of the goal/non-goal chain
/// abstraction, weighted by the always-left state-action SR from `N`.
pub fn chain_error_experiment(config: &ChainErrorExperiment) -> Result<Vec<ChainErrorRow>> {
    config.validate()?;
    let mut lengths = config.lengths.clone();
    lengths.sort_unstable();
    lengths.dedup();
    lengths
        .into_iter()
        .map(|n| {
            let c = chain(&ChainConfig {
                length: n,
                success_prob: config.success_prob,
                discount: config.discount,
                ..ChainConfig::default()
            })?;
            let weights = normalized_sr(&c.mdp, &c.always_left(), &c.start_distribution(), SrKind::StateAction, DEFAULT_TOL)?;
            let abstract_mdp = build_abstract_mdp(&c.mdp, &c.phi, &weights)?;
            let weighted = reduction_errors(&c.mdp, &c.phi, &abstract_mdp, &weights)?;
            let max = max_norm_reduction_errors(&c.mdp, &c.phi, &abstract_mdp)?;
            Ok(ChainErrorRow {
                n,
                weighted_eps_p: weighted.eps_p,
                max_eps_p: max.eps_p,
            })
        })
        .collect()
}

/// The trade-off expression over every `(T, |S^φ|)` of the grid, sorted by
/// `T` then `|S^φ|`.
pub fn corollary_experiment(config: &CorollaryExperiment) -> Result<Vec<CorollaryRow>> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.t_list.len() * config.s_phi.len());
    for &t in &config.t_list {
        for &s_phi in &config.s_phi {
            rows.push(CorollaryRow {
                s_phi,
                t,
                eps: config.eps,
                b: config.b,
                bound: corollary_expression(s_phi, config.n_actions, t, config.eps, config.b),
            });
        }
    }
    rows.sort_by_key(|r| (r.t, r.s_phi));
    rows.dedup_by_key(|r| (r.t, r.s_phi));
    Ok(rows)
}

/// Outcome of the unknown-mass check for one `(n, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletOutcome {
    #[serde(flatten)]
    pub check: DirichletCheck,
    pub z: f64,
    pub passed: bool,
}

/// Aggregate verification report written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub bounds: Vec<SuiteReport>,
    pub identities: Vec<IdentityReport>,
    pub dirichlet: Vec<DirichletOutcome>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn violations(&self) -> usize {
        self.bounds.iter().map(|s| s.violations).sum::<usize>()
            + self.identities.iter().map(|s| s.failures).sum::<usize>()
            + self.dirichlet.iter().filter(|d| !d.passed).count()
    }
}

/// Runs every bound suite, identity suite and unknown-mass check.
pub fn verify_bounds_suite(config: &VerifyExperiment, exec: Execution) -> Result<VerifyReport> {
    config.validate()?;
    let bounds = BoundSuite::ALL
        .iter()
        .map(|&s| run_bound_suite(s, config.seed, config.trials, exec))
        .collect::<Result<Vec<_>>>()?;
    let identities = IdentitySuite::ALL
        .iter()
        .map(|&s| run_identity_suite(s, config.seed, config.identity_instances))
        .collect::<Result<Vec<_>>>()?;
    let dirichlet = config
        .dirichlet_cases
        .iter()
        .map(|&(n, t)| {
            let check = dirichlet_unknown_mass_check(n, t, config.dirichlet_samples, config.seed)?;
            let z = check.z_score();
            Ok(DirichletOutcome {
                passed: z.abs() <= config.dirichlet_z,
                check,
                z,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = VerifyReport {
        seed: config.seed,
        trials: config.trials,
        bounds,
        identities,
        dirichlet,
        passed: false,
    };
    report.passed = report.violations() == 0;
    Ok(report)
}
