use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Tolerance used when validating probability vectors.
pub const PROB_TOL: f64 = 1e-12;

/// Slack allowed when checking that rewards lie in `[0, r_max]`.
const REWARD_TOL: f64 = 1e-9;

/// A sparse probability row: `(column, probability)` pairs sorted by column.
pub type SparseRow = Vec<(usize, f64)>;

/// Validates a distribution over `0..len` and renormalizes it exactly once.
///
/// Duplicate columns are merged and zero entries dropped. The entries must be
/// non-negative and sum to one within [`PROB_TOL`].
pub fn normalize_row(
    entries: impl IntoIterator<Item = (usize, f64)>,
    len: usize,
    context: &str,
) -> Result<SparseRow> {
    let mut row: SparseRow = entries.into_iter().collect();
    row.sort_by_key(|&(j, _)| j);
    let mut merged: SparseRow = Vec::with_capacity(row.len());
    for (j, p) in row {
        if j >= len {
            return Err(Error::Probability {
                context: context.to_string(),
                detail: format!("column {j} out of range 0..{len}"),
            });
        }
        if !p.is_finite() || p < 0.0 {
            return Err(Error::Probability {
                context: context.to_string(),
                detail: format!("entry {p} at column {j} is not a probability"),
            });
        }
        match merged.last_mut() {
            Some((last, q)) if *last == j => *q += p,
            _ => merged.push((j, p)),
        }
    }
    merged.retain(|&(_, p)| p > 0.0);
    let total: f64 = merged.iter().map(|&(_, p)| p).sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::Probability {
            context: context.to_string(),
            detail: format!("entries sum to {total}"),
        });
    }
    for (_, p) in merged.iter_mut() {
        *p /= total;
    }
    Ok(merged)
}

pub(crate) fn check_reward(r: f64, r_max: f64, context: &str) -> Result<f64> {
    if !r.is_finite() || r < -REWARD_TOL || r > r_max + REWARD_TOL {
        return Err(Error::InvalidModel(format!(
            "{context}: reward {r} outside [0, {r_max}]"
        )));
    }
    Ok(r.clamp(0.0, r_max))
}

fn check_discount(discount: f64) -> Result<()> {
    if (0.0..1.0).contains(&discount) {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("discount {discount} outside [0, 1)")))
    }
}

fn check_r_max(r_max: f64) -> Result<()> {
    if r_max.is_finite() && r_max >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("r_max {r_max} must be finite and non-negative")))
    }
}

/// Flat indexing of state-action pairs: `k(s, a) = s * n_actions + a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateActionIndexer {
    pub n_states: usize,
    pub n_actions: usize,
}

impl StateActionIndexer {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        Self { n_states, n_actions }
    }

    #[inline]
    pub fn index(&self, state: usize, action: usize) -> usize {
        debug_assert!(state < self.n_states && action < self.n_actions);
        state * self.n_actions + action
    }

    #[inline]
    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.n_actions, k % self.n_actions)
    }

    pub fn len(&self) -> usize {
        self.n_states * self.n_actions
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A finite MDP with sparse transition rows indexed by flat state-action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMdp {
    n_states: usize,
    n_actions: usize,
    transitions: Vec<SparseRow>,
    rewards: Vec<f64>,
    discount: f64,
    r_max: f64,
}

impl FiniteMdp {
    /// Builds an MDP from one transition row per flat state-action index.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transitions: Vec<SparseRow>,
        rewards: Vec<f64>,
        discount: f64,
        r_max: f64,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidModel("an MDP needs at least one state and one action".into()));
        }
        let n_sa = n_states * n_actions;
        check_len("transition rows", n_sa, transitions.len())?;
        check_len("reward table", n_sa, rewards.len())?;
        check_discount(discount)?;
        check_r_max(r_max)?;
        let transitions = transitions
            .into_iter()
            .enumerate()
            .map(|(k, row)| normalize_row(row, n_states, &format!("transition row {k}")))
            .collect::<Result<Vec<_>>>()?;
        let rewards = rewards
            .into_iter()
            .enumerate()
            .map(|(k, r)| check_reward(r, r_max, &format!("state-action {k}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_states,
            n_actions,
            transitions,
            rewards,
            discount,
            r_max,
        })
    }

    /// Builds an MDP from dense rows `rows[k(s, a)][s']`.
    pub fn from_dense(
        n_states: usize,
        n_actions: usize,
        rows: &[Vec<f64>],
        rewards: Vec<f64>,
        discount: f64,
        r_max: f64,
    ) -> Result<Self> {
        let sparse = rows
            .iter()
            .map(|row| {
                check_len("dense transition row", n_states, row.len())?;
                Ok(row.iter().copied().enumerate().collect())
            })
            .collect::<Result<Vec<SparseRow>>>()?;
        Self::new(n_states, n_actions, sparse, rewards, discount, r_max)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_state_actions(&self) -> usize {
        self.n_states * self.n_actions
    }

    pub fn indexer(&self) -> StateActionIndexer {
        StateActionIndexer::new(self.n_states, self.n_actions)
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Largest attainable value, `r_max / (1 - γ)`.
    pub fn v_max(&self) -> f64 {
        self.r_max / (1.0 - self.discount)
    }

    pub fn transitions(&self) -> &[SparseRow] {
        &self.transitions
    }

    pub fn row(&self, state: usize, action: usize) -> &SparseRow {
        &self.transitions[state * self.n_actions + action]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn reward(&self, state: usize, action: usize) -> f64 {
        self.rewards[state * self.n_actions + action]
    }

    /// Dense copy of the transition row for flat index `k`.
    pub fn dense_row(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_states];
        for &(j, p) in &self.transitions[k] {
            out[j] = p;
        }
        out
    }

    /// The Markov reward process induced by `policy`.
    pub fn mrp(&self, policy: &super::Policy) -> Result<FiniteMrp> {
        policy.check_shape(self.n_states, self.n_actions)?;
        let mut transitions = Vec::with_capacity(self.n_states);
        let mut rewards = Vec::with_capacity(self.n_states);
        for s in 0..self.n_states {
            let mut acc: Vec<(usize, f64)> = Vec::new();
            let mut r = 0.0;
            for a in 0..self.n_actions {
                let pa = policy.prob(s, a);
                if pa == 0.0 {
                    continue;
                }
                r += pa * self.reward(s, a);
                acc.extend(self.row(s, a).iter().map(|&(j, p)| (j, pa * p)));
            }
            acc.sort_by_key(|&(j, _)| j);
            let mut merged: SparseRow = Vec::with_capacity(acc.len());
            for (j, p) in acc {
                match merged.last_mut() {
                    Some((last, q)) if *last == j => *q += p,
                    _ => merged.push((j, p)),
                }
            }
            transitions.push(merged);
            rewards.push(r.clamp(0.0, self.r_max));
        }
        FiniteMrp::new(transitions, rewards, self.discount, self.r_max)
    }
}

/// A finite Markov reward process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMrp {
    transitions: Vec<SparseRow>,
    rewards: Vec<f64>,
    discount: f64,
    r_max: f64,
}

impl FiniteMrp {
    pub fn new(transitions: Vec<SparseRow>, rewards: Vec<f64>, discount: f64, r_max: f64) -> Result<Self> {
        let n = transitions.len();
        if n == 0 {
            return Err(Error::InvalidModel("an MRP needs at least one state".into()));
        }
        check_len("MRP rewards", n, rewards.len())?;
        check_discount(discount)?;
        check_r_max(r_max)?;
        let transitions = transitions
            .into_iter()
            .enumerate()
            .map(|(s, row)| normalize_row(row, n, &format!("MRP row {s}")))
            .collect::<Result<Vec<_>>>()?;
        let rewards = rewards
            .into_iter()
            .enumerate()
            .map(|(s, r)| check_reward(r, r_max, &format!("MRP state {s}")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            transitions,
            rewards,
            discount,
            r_max,
        })
    }

    pub fn from_dense(rows: &[Vec<f64>], rewards: Vec<f64>, discount: f64, r_max: f64) -> Result<Self> {
        let n = rows.len();
        let sparse = rows
            .iter()
            .map(|row| {
                check_len("dense MRP row", n, row.len())?;
                Ok(row.iter().copied().enumerate().collect())
            })
            .collect::<Result<Vec<SparseRow>>>()?;
        Self::new(sparse, rewards, discount, r_max)
    }

    pub fn n_states(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> &[SparseRow] {
        &self.transitions
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn v_max(&self) -> f64 {
        self.r_max / (1.0 - self.discount)
    }

    /// Value function `v = r + γ P v`, iterated to Bellman residual `tol`.
    pub fn evaluate(&self, tol: f64) -> Result<Vec<f64>> {
        super::solve::evaluate_rows(&self.transitions, &self.rewards, self.discount, self.v_max(), tol)
    }

    /// Normalized state SR `d = (1-γ) d0 + γ dᵀP`, iterated to L1 residual `tol`.
    pub fn state_sr(&self, d0: &[f64], tol: f64) -> Result<Vec<f64>> {
        check_len("MRP start distribution", self.n_states(), d0.len())?;
        super::sr::flow_fixed_point(&self.transitions, d0, self.discount, tol)
    }
}
