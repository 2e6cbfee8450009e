use serde::{Deserialize, Serialize};

use crate::abstraction::AbstractionFn;
use crate::error::{Error, Result};
use crate::tabular::{FiniteMdp, Policy, SparseRow};

/// Parameters of the chain `1, ..., N` whose left end is the goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    /// Start position `N`.
    pub length: usize,
    /// Probability that a left move succeeds; otherwise the agent stays.
    pub success_prob: f64,
    pub goal_reward: f64,
    pub discount: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            length: 10,
            success_prob: 1.0,
            goal_reward: 1.0,
            discount: 0.9,
        }
    }
}

/// The chain MDP with its goal/non-goal abstraction.
///
/// State `i` is position `i + 1`. Position 1 is absorbing with zero reward;
/// the goal reward is paid on the move that enters it.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub mdp: FiniteMdp,
    /// Goal to class 0, every other position to class 1.
    pub phi: AbstractionFn,
    pub start: usize,
}

impl Chain {
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;

    pub fn always_left(&self) -> Policy {
        Policy::deterministic(2, &vec![Self::LEFT; self.mdp.n_states()]).expect("action 0 exists")
    }

    /// Point mass on the start position `N`.
    pub fn start_distribution(&self) -> Vec<f64> {
        let mut d0 = vec![0.0; self.mdp.n_states()];
        d0[self.start] = 1.0;
        d0
    }
}

pub fn chain(config: &ChainConfig) -> Result<Chain> {
    let n = config.length;
    let p = config.success_prob;
    if n < 2 {
        return Err(Error::Config(format!("chain length {n} must be at least 2")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Config(format!("left success probability {p} must lie in (0, 1]")));
    }
    let mut rows: Vec<SparseRow> = Vec::with_capacity(2 * n);
    let mut rewards = Vec::with_capacity(2 * n);
    for i in 0..n {
        if i == 0 {
            rows.push(vec![(0, 1.0)]);
            rows.push(vec![(0, 1.0)]);
            rewards.extend([0.0, 0.0]);
            continue;
        }
        let mut left = vec![(i - 1, p)];
        if p < 1.0 {
            left.push((i, 1.0 - p));
        }
        rows.push(left);
        rows.push(vec![(i, 1.0)]);
        rewards.push(if i == 1 { p * config.goal_reward } else { 0.0 });
        rewards.push(0.0);
    }
    let mdp = FiniteMdp::new(n, 2, rows, rewards, config.discount, config.goal_reward)?;
    let phi = AbstractionFn::from_table((0..n).map(|i| usize::from(i != 0)).collect())?;
    Ok(Chain { mdp, phi, start: n - 1 })
}
