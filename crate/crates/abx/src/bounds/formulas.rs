use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::tabular::{NormalizedSr, Policy, SrKind};

/// `(ε_r + (γ/2) v_max ε_p) / (1-γ)`.
pub fn simulation_lemma_bound(eps_r: f64, eps_p: f64, gamma: f64, v_max: f64) -> f64 {
    (eps_r + 0.5 * gamma * v_max * eps_p) / (1.0 - gamma)
}

/// Value loss between two MRPs, `‖v − v'‖_{d0}`, bounded with errors measured
/// under the normalized SR of either MRP. Same shape as the simulation lemma.
pub fn mrp_value_loss_bound(eps_r: f64, eps_p: f64, gamma: f64, v_max: f64) -> f64 {
    simulation_lemma_bound(eps_r, eps_p, gamma, v_max)
}

/// A policy learned from a finite amount of experience.
///
/// On `observed` states the policy is within `epsilon` (in L1) of an optimal
/// policy; elsewhere it is arbitrary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningOutcome {
    observed: Vec<usize>,
    pub epsilon: f64,
    pub policy: Policy,
}

impl LearningOutcome {
    pub fn new(mut observed: Vec<usize>, epsilon: f64, policy: Policy) -> Result<Self> {
        observed.sort_unstable();
        observed.dedup();
        if let Some(&s) = observed.iter().find(|&&s| s >= policy.n_states()) {
            return Err(Error::dim("observed state", policy.n_states(), s));
        }
        if epsilon.is_nan() || epsilon < 0.0 {
            return Err(Error::InvalidModel(format!("epsilon {epsilon} must be non-negative")));
        }
        Ok(Self {
            observed,
            epsilon,
            policy,
        })
    }

    pub fn observed(&self) -> &[usize] {
        &self.observed
    }

    pub fn is_observed(&self, state: usize) -> bool {
        self.observed.binary_search(&state).is_ok()
    }
}

/// `(d(obs) ε (r_max + (γ/2) v_max) + d(unk) v_max) / (1-γ)` under a state SR.
pub fn finite_learning_bound(outcome: &LearningOutcome, sr: &NormalizedSr, gamma: f64, r_max: f64) -> Result<f64> {
    if sr.kind() != SrKind::State {
        return Err(Error::InvalidModel("the learning bound needs a state SR".into()));
    }
    check_len("learning SR", outcome.policy.n_states(), sr.len())?;
    let v_max = r_max / (1.0 - gamma);
    let observed: f64 = outcome.observed.iter().map(|&s| sr[s]).sum();
    let unknown = (1.0 - observed).max(0.0);
    Ok((observed * outcome.epsilon * (r_max + 0.5 * gamma * v_max) + unknown * v_max) / (1.0 - gamma))
}

/// Shape of the abstract-state-space trade-off with unit constants:
/// `1/|S|^|A| + (1 − S) ε + S + B` where `S = (|S| − 1) / (T + |S| − 1)`.
///
/// The value describes the shape of the bound, not a certified constant.
pub fn corollary_expression(s_phi: usize, n_actions: usize, t: usize, eps: f64, b: f64) -> f64 {
    let s = s_phi as f64;
    let unseen = (s - 1.0) / (t as f64 + s - 1.0);
    s.powf(-(n_actions as f64)) + (1.0 - unseen) * eps + unseen + b
}
