use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

use super::mdp::{FiniteMdp, SparseRow};
use super::policy::Policy;

/// Default residual tolerance of the fixed-point solvers.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Iteration budget `10 · ⌈log(tol (1-γ) / scale) / log γ⌉`, at least 10.
pub fn iteration_cap(gamma: f64, tol: f64, scale: f64) -> usize {
    if gamma <= 0.0 || scale <= 0.0 {
        return 10;
    }
    let ratio = (tol * (1.0 - gamma) / scale).ln() / gamma.ln();
    let steps = if ratio.is_finite() { ratio.ceil().max(1.0) } else { 1.0 };
    10 * steps as usize
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("tolerance {tol} must be positive")))
    }
}

pub(crate) fn evaluate_rows(
    rows: &[SparseRow],
    rewards: &[f64],
    gamma: f64,
    v_max: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    check_tol(tol)?;
    let n = rows.len();
    let cap = iteration_cap(gamma, tol, v_max);
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cap {
        let mut delta: f64 = 0.0;
        for s in 0..n {
            let cont: f64 = rows[s].iter().map(|&(j, p)| p * v[j]).sum();
            next[s] = rewards[s] + gamma * cont;
            delta = delta.max((next[s] - v[s]).abs());
        }
        std::mem::swap(&mut v, &mut next);
        residual = gamma * delta;
        if residual <= tol {
            return Ok(v);
        }
    }
    Err(Error::NoConvergence {
        solver: "policy evaluation",
        iterations: cap,
        residual,
    })
}

/// State values of `policy`, with Bellman residual at most `tol`.
pub fn policy_evaluation(mdp: &FiniteMdp, policy: &Policy, tol: f64) -> Result<Vec<f64>> {
    mdp.mrp(policy)?.evaluate(tol)
}

/// `Q(k(s,a)) = r(s,a) + γ Σ_s' P(s'|s,a) v(s')`.
pub fn q_from_values(mdp: &FiniteMdp, v: &[f64]) -> Result<Vec<f64>> {
    check_len("state values", mdp.n_states(), v.len())?;
    let gamma = mdp.discount();
    Ok(mdp
        .transitions()
        .iter()
        .zip(mdp.rewards())
        .map(|(row, r)| r + gamma * row.iter().map(|&(j, p)| p * v[j]).sum::<f64>())
        .collect())
}

/// Action values `Q^π` over flat state-action indices.
pub fn action_values(mdp: &FiniteMdp, policy: &Policy, tol: f64) -> Result<Vec<f64>> {
    let v = policy_evaluation(mdp, policy, tol)?;
    q_from_values(mdp, &v)
}

/// Deterministic policy greedy with respect to `f`; ties go to the lowest action.
pub fn greedy_policy(n_states: usize, n_actions: usize, f: &[f64]) -> Result<Policy> {
    check_len("greedy action values", n_states * n_actions, f.len())?;
    let actions: Vec<usize> = f
        .chunks(n_actions)
        .map(|q| {
            let mut best = 0;
            for a in 1..n_actions {
                if q[a] > q[best] {
                    best = a;
                }
            }
            best
        })
        .collect();
    Policy::deterministic(n_actions, &actions)
}

/// Result of value iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalSolution {
    /// Deterministic policy greedy with respect to `q_values`.
    pub policy: Policy,
    /// State values with Bellman optimality residual at most the tolerance.
    pub values: Vec<f64>,
    /// Action values computed from `values`.
    pub q_values: Vec<f64>,
}

/// Optimal policy and values by value iteration.
pub fn optimal_policy(mdp: &FiniteMdp, tol: f64) -> Result<OptimalSolution> {
    check_tol(tol)?;
    let (n, na) = (mdp.n_states(), mdp.n_actions());
    let gamma = mdp.discount();
    let cap = iteration_cap(gamma, tol, mdp.v_max());
    let mut v = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cap {
        let mut delta: f64 = 0.0;
        for s in 0..n {
            let mut best = f64::NEG_INFINITY;
            for a in 0..na {
                let k = s * na + a;
                let cont: f64 = mdp.transitions()[k].iter().map(|&(j, p)| p * v[j]).sum();
                best = best.max(mdp.rewards()[k] + gamma * cont);
            }
            next[s] = best;
            delta = delta.max((best - v[s]).abs());
        }
        std::mem::swap(&mut v, &mut next);
        residual = gamma * delta;
        if residual <= tol {
            let q_values = q_from_values(mdp, &v)?;
            let policy = greedy_policy(n, na, &q_values)?;
            return Ok(OptimalSolution {
                policy,
                values: v,
                q_values,
            });
        }
    }
    Err(Error::NoConvergence {
        solver: "value iteration",
        iterations: cap,
        residual,
    })
}

/// Expected discounted return `d0 · v^π`.
pub fn discounted_return(mdp: &FiniteMdp, policy: &Policy, d0: &[f64]) -> Result<f64> {
    check_len("start distribution", mdp.n_states(), d0.len())?;
    let v = policy_evaluation(mdp, policy, DEFAULT_TOL)?;
    Ok(d0.iter().zip(&v).map(|(p, x)| p * x).sum())
}

/// State-action Bellman operator
/// `(B^π f)(k(s,a)) = r(s,a) + γ Σ_s' P(s'|s,a) Σ_a' π(a'|s') f(k(s',a'))`.
pub fn bellman_apply(mdp: &FiniteMdp, policy: &Policy, f: &[f64]) -> Result<Vec<f64>> {
    check_len("state-action vector", mdp.n_state_actions(), f.len())?;
    policy.check_shape(mdp.n_states(), mdp.n_actions())?;
    let na = mdp.n_actions();
    let nu: Vec<f64> = (0..mdp.n_states())
        .map(|s| (0..na).map(|a| policy.prob(s, a) * f[s * na + a]).sum())
        .collect();
    q_from_values(mdp, &nu)
}
