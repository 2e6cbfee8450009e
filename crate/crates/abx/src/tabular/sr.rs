use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

use super::mdp::{FiniteMdp, SparseRow};
use super::policy::Policy;
use super::solve::iteration_cap;

/// Tolerance on the total mass of a [`NormalizedSr`].
const SR_MASS_TOL: f64 = 1e-9;

/// Whether a distribution lives on states or on flat state-action indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SrKind {
    State,
    StateAction,
}

/// A probability vector of discounted visitation frequencies.
///
/// Start distributions are represented with the same type. Dereferences to
/// the weight slice so it can be passed wherever plain weights are expected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSr {
    weights: Vec<f64>,
    kind: SrKind,
}

impl NormalizedSr {
    pub fn new(weights: Vec<f64>, kind: SrKind) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Probability {
                context: "normalized SR".into(),
                detail: "empty weight vector".into(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Probability {
                context: "normalized SR".into(),
                detail: "negative or non-finite weight".into(),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SR_MASS_TOL {
            return Err(Error::Probability {
                context: "normalized SR".into(),
                detail: format!("weights sum to {total}"),
            });
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { weights, kind })
    }

    /// A state distribution putting all mass on `state`.
    pub fn point(n_states: usize, state: usize) -> Result<Self> {
        let mut w = vec![0.0; n_states];
        *w.get_mut(state).ok_or(Error::dim("point distribution", n_states, state))? = 1.0;
        Self::new(w, SrKind::State)
    }

    pub fn uniform(n_states: usize) -> Result<Self> {
        Self::new(vec![1.0 / n_states as f64; n_states], SrKind::State)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> SrKind {
        self.kind
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    /// Marginal over states of a state-action distribution.
    pub fn state_marginal(&self, n_actions: usize) -> Result<NormalizedSr> {
        match self.kind {
            SrKind::State => Ok(self.clone()),
            SrKind::StateAction => {
                let w = self.weights.chunks(n_actions).map(|c| c.iter().sum()).collect();
                NormalizedSr::new(w, SrKind::State)
            }
        }
    }
}

impl Deref for NormalizedSr {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.weights
    }
}

/// Fixed point of `d = (1-γ) d0 + γ dᵀP` for row-stochastic `rows`.
pub(crate) fn flow_fixed_point(rows: &[SparseRow], d0: &[f64], gamma: f64, tol: f64) -> Result<Vec<f64>> {
    let n = rows.len();
    let cap = iteration_cap(gamma, tol, 1.0);
    let mut d = d0.to_vec();
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cap {
        for (x, &x0) in next.iter_mut().zip(d0) {
            *x = (1.0 - gamma) * x0;
        }
        for (s, &mass) in d.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &(j, p) in &rows[s] {
                next[j] += gamma * mass * p;
            }
        }
        let delta: f64 = next.iter().zip(&d).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut d, &mut next);
        residual = gamma * delta;
        if residual <= tol {
            let total: f64 = d.iter().sum();
            d.iter_mut().for_each(|x| *x /= total);
            return Ok(d);
        }
    }
    Err(Error::NoConvergence {
        solver: "normalized SR",
        iterations: cap,
        residual,
    })
}

/// Normalized successor representation of `policy` from start distribution `d0`.
///
/// The first state `s_1` is drawn from `d0`, so `d0` carries weight `1-γ`.
/// The state-action variant is `d(k(s,a)) = d_S(s) π(a|s)`.
pub fn normalized_sr(
    mdp: &FiniteMdp,
    policy: &Policy,
    d0: &[f64],
    kind: SrKind,
    tol: f64,
) -> Result<NormalizedSr> {
    check_len("start distribution", mdp.n_states(), d0.len())?;
    let mrp = mdp.mrp(policy)?;
    let ds = mrp.state_sr(d0, tol)?;
    match kind {
        SrKind::State => NormalizedSr::new(ds, SrKind::State),
        SrKind::StateAction => {
            let na = mdp.n_actions();
            let mut w = vec![0.0; mdp.n_state_actions()];
            for (s, &m) in ds.iter().enumerate() {
                for a in 0..na {
                    w[s * na + a] = m * policy.prob(s, a);
                }
            }
            NormalizedSr::new(w, SrKind::StateAction)
        }
    }
}
