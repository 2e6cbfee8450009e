//! Random instance generators for the verification suites.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Exp1;

use crate::abstraction::AbstractionFn;
use crate::error::Result;
use crate::pomdp::TabularPomdp;
use crate::tabular::{FiniteMdp, Policy, SparseRow};

/// A random probability vector over `0..n` whose support has a random size.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let support = rng.gen_range(1..=n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let mut out = vec![0.0; n];
    for &i in &idx[..support] {
        out[i] = rng.sample::<f64, _>(Exp1) + 1e-3;
    }
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
    out
}

/// A random probability vector over `0..n` with full support.
pub fn random_full_distribution<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= total);
    out
}

fn sparse(v: &[f64]) -> SparseRow {
    v.iter().copied().enumerate().filter(|&(_, p)| p > 0.0).collect()
}

/// Random MDP with rewards uniform in `[0, 1]` and `r_max = 1`.
pub fn random_mdp<R: Rng + ?Sized>(rng: &mut R, n_states: usize, n_actions: usize, gamma: f64) -> Result<FiniteMdp> {
    let rows = (0..n_states * n_actions).map(|_| sparse(&random_distribution(rng, n_states))).collect();
    let rewards = (0..n_states * n_actions).map(|_| rng.gen::<f64>()).collect();
    FiniteMdp::new(n_states, n_actions, rows, rewards, gamma, 1.0)
}

/// Mixes each row of `mdp` with a random row and jitters the rewards.
pub fn perturb_mdp<R: Rng + ?Sized>(rng: &mut R, mdp: &FiniteMdp, scale: f64) -> Result<FiniteMdp> {
    let n = mdp.n_states();
    let rows = (0..mdp.n_state_actions())
        .map(|k| {
            let lambda = rng.gen::<f64>() * scale;
            let other = random_distribution(rng, n);
            let own = mdp.dense_row(k);
            sparse(&own.iter().zip(&other).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect::<Vec<_>>())
        })
        .collect();
    let rewards = mdp
        .rewards()
        .iter()
        .map(|r| (r + scale * (rng.gen::<f64>() - 0.5)).clamp(0.0, mdp.r_max()))
        .collect();
    FiniteMdp::new(n, mdp.n_actions(), rows, rewards, mdp.discount(), mdp.r_max())
}

/// Random stochastic policy; about a third of the time deterministic.
pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, n_states: usize, n_actions: usize) -> Policy {
    if rng.gen_bool(1.0 / 3.0) {
        let actions: Vec<usize> = (0..n_states).map(|_| rng.gen_range(0..n_actions)).collect();
        return Policy::deterministic(n_actions, &actions).expect("actions are in range");
    }
    let rows = (0..n_states).map(|_| random_distribution(rng, n_actions)).collect();
    Policy::new(n_actions, rows).expect("rows are distributions")
}

/// Random surjection of `0..n` onto `m` classes, ids in first-occurrence order.
pub fn random_abstraction<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> AbstractionFn {
    let m = m.clamp(1, n);
    let mut labels: Vec<usize> = (0..n).map(|i| if i < m { i } else { rng.gen_range(0..m) }).collect();
    labels.shuffle(rng);
    AbstractionFn::from_labels(labels)
}

/// Random POMDP; latent state 0 may be made terminal.
pub fn random_pomdp<R: Rng + ?Sized>(
    rng: &mut R,
    n_states: usize,
    n_actions: usize,
    n_observations: usize,
    gamma: f64,
) -> Result<TabularPomdp> {
    let dynamics = random_mdp(rng, n_states, n_actions, gamma)?;
    let emissions = (0..n_states).map(|_| sparse(&random_distribution(rng, n_observations))).collect();
    let mut terminal = vec![false; n_states];
    if n_states > 2 && rng.gen_bool(0.5) {
        terminal[0] = true;
    }
    let start = random_distribution(rng, n_states);
    TabularPomdp::new(dynamics, n_observations, emissions, terminal, start)
}
