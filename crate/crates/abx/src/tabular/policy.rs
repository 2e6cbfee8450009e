use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

use super::mdp::PROB_TOL;

/// A stationary stochastic policy stored as a flat `n_states × n_actions` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl Policy {
    /// Builds a policy from one action distribution per state.
    pub fn new(n_actions: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n_states = rows.len();
        let flat = rows.into_iter().flatten().collect();
        Self::from_flat(n_states, n_actions, flat)
    }

    /// Builds a policy from a flat table indexed by `s * n_actions + a`.
    pub fn from_flat(n_states: usize, n_actions: usize, mut probs: Vec<f64>) -> Result<Self> {
        if n_actions == 0 {
            return Err(Error::InvalidModel("a policy needs at least one action".into()));
        }
        check_len("policy table", n_states * n_actions, probs.len())?;
        for (s, row) in probs.chunks_mut(n_actions).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::Probability {
                    context: format!("policy row {s}"),
                    detail: format!("{row:?} has a negative or non-finite entry"),
                });
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::Probability {
                    context: format!("policy row {s}"),
                    detail: format!("entries sum to {total}"),
                });
            }
            row.iter_mut().for_each(|p| *p /= total);
        }
        Ok(Self {
            n_states,
            n_actions,
            probs,
        })
    }

    /// The deterministic policy choosing `actions[s]` in state `s`.
    pub fn deterministic(n_actions: usize, actions: &[usize]) -> Result<Self> {
        let mut probs = vec![0.0; actions.len() * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::InvalidModel(format!(
                    "action {a} in state {s} exceeds {n_actions} actions"
                )));
            }
            probs[s * n_actions + a] = 1.0;
        }
        Self::from_flat(actions.len(), n_actions, probs)
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        let p = 1.0 / n_actions as f64;
        Self {
            n_states,
            n_actions,
            probs: vec![p; n_states * n_actions],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn prob(&self, state: usize, action: usize) -> f64 {
        self.probs[state * self.n_actions + action]
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.probs[state * self.n_actions..(state + 1) * self.n_actions]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.probs
    }

    /// The chosen action of each state if the policy is deterministic.
    pub fn deterministic_actions(&self) -> Option<Vec<usize>> {
        (0..self.n_states)
            .map(|s| self.row(s).iter().position(|&p| p == 1.0))
            .collect()
    }

    /// Total-variation style distance `‖π(·|s) − π'(·|s)‖₁` for one state.
    pub fn l1_distance_at(&self, other: &Policy, state: usize) -> f64 {
        self.row(state)
            .iter()
            .zip(other.row(state))
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub(crate) fn check_shape(&self, n_states: usize, n_actions: usize) -> Result<()> {
        check_len("policy states", n_states, self.n_states)?;
        check_len("policy actions", n_actions, self.n_actions)
    }
}
