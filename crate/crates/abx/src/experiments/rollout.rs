use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::TaskOracle;
use crate::par::{self, Execution};
use crate::pomdp::sample_from;
use crate::seed::{derive_seed, hash_str, rng_for};

use super::dictionary::PolicyDictionary;

/// How actions are chosen during a rollout.
#[derive(Debug, Clone, Copy)]
pub enum RolloutPolicy<'a> {
    /// Sample from the dictionary's normalized counts; uniform on a miss.
    Dictionary(&'a PolicyDictionary),
    /// Uniform over all actions at every step.
    Uniform,
}

/// Rollout protocol shared by all test starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolloutSpec {
    pub walks_per_start: usize,
    pub max_steps: usize,
    pub seed: u64,
    /// Extra seed component separating streams of different policies.
    pub stream: u64,
}

/// Outcome of one walk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RolloutRecord {
    pub env_id: String,
    pub start_index: usize,
    /// Coordinates of the start state.
    pub start: Vec<i64>,
    pub repeat: usize,
    pub steps: usize,
    pub reached_goal: bool,
    pub mistakes_total: u32,
    pub mistakes_known_key: u32,
    pub mistakes_missing_key: u32,
    pub seed: u64,
}

/// Seed of the walk `(start_index, repeat)`.
pub fn rollout_seed(spec: &RolloutSpec, env_id: &str, start_index: usize, repeat: usize) -> u64 {
    derive_seed(&[spec.seed, hash_str(env_id), spec.stream, start_index as u64, repeat as u64])
}

fn sample_counts<R: Rng>(rng: &mut R, counts: &[u32]) -> usize {
    let total: u32 = counts.iter().sum();
    let mut u = rng.gen_range(0..total);
    for (a, &c) in counts.iter().enumerate() {
        if u < c {
            return a;
        }
        u -= c;
    }
    unreachable!("u is below the total count")
}

/// Runs `walks_per_start` walks from every test start.
///
/// At each step the current history is looked up in the dictionary. A hit
/// samples from the stored counts and a suboptimal draw is a known-key
/// mistake; a miss draws uniformly and a suboptimal draw is a missing-key
/// mistake. A walk ends at a terminal state or after `max_steps` actions.
/// Records come back ordered by `(start_index, repeat)`.
pub fn run_rollouts<P: TaskOracle>(
    pomdp: &P,
    policy: RolloutPolicy<'_>,
    test_starts: &[P::State],
    spec: &RolloutSpec,
    exec: Execution,
) -> Vec<RolloutRecord> {
    let walks = spec.walks_per_start;
    par::map_range(exec, test_starts.len() * walks, |cell| {
        let (start_index, repeat) = (cell / walks, cell % walks);
        walk(pomdp, policy, &test_starts[start_index], start_index, repeat, spec)
    })
}

fn walk<P: TaskOracle>(
    pomdp: &P,
    policy: RolloutPolicy<'_>,
    start: &P::State,
    start_index: usize,
    repeat: usize,
    spec: &RolloutSpec,
) -> RolloutRecord {
    let seed = rollout_seed(spec, pomdp.env_id(), start_index, repeat);
    let mut rng = rng_for(&[seed]);
    let na = pomdp.n_actions();
    let mut state = start.clone();
    let initial = sample_from(&mut rng, &pomdp.observation(&state));
    let mut steps: Vec<(usize, usize)> = Vec::new();
    let (mut known, mut missing) = (0, 0);
    while steps.len() < spec.max_steps && !pomdp.is_terminal(&state) {
        let counts = match policy {
            RolloutPolicy::Dictionary(dict) => dict.lookup(initial, &steps),
            RolloutPolicy::Uniform => None,
        };
        let action = match counts {
            Some(c) => sample_counts(&mut rng, c),
            None => rng.gen_range(0..na),
        };
        if pomdp.optimal_action_mask(&state) & (1 << action) == 0 {
            if counts.is_some() {
                known += 1;
            } else {
                missing += 1;
            }
        }
        state = sample_from(&mut rng, &pomdp.transition(&state, action));
        let o = sample_from(&mut rng, &pomdp.observation(&state));
        steps.push((action, o));
    }
    RolloutRecord {
        env_id: pomdp.env_id().to_string(),
        start_index,
        start: pomdp.describe(start),
        repeat,
        steps: steps.len(),
        reached_goal: pomdp.is_terminal(&state),
        mistakes_total: known + missing,
        mistakes_known_key: known,
        mistakes_missing_key: missing,
        seed,
    }
}
