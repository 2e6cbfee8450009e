//! Generative POMDPs and their exact history MDPs.
//!
//! A [`GenerativePomdp`] exposes its latent dynamics as finite distributions.
//! [`enumerate_histories`] expands every reachable observation-action history
//! up to a horizon into a [`HistoryMdp`], routing beyond-horizon and terminal
//! mass to an absorbing sink at index 0.

mod belief;
mod bisim;
mod history;
mod tabular;

use std::fmt::Debug;
use std::hash::Hash;

use rand::Rng;

pub use belief::{belief_update, Belief};
pub use bisim::{check_bisimilar, BisimulationCheck, BisimulationFailure};
pub use history::{
    enumerate_histories, enumerate_histories_capped, History, HistoryMdp, DEFAULT_HISTORY_CAP, SINK,
};
pub use tabular::TabularPomdp;

/// A POMDP whose latent dynamics can be queried as finite distributions.
///
/// Distributions are returned as `(outcome, probability)` lists. Terminal
/// latent states take no further actions: enumeration routes their mass to
/// the sink and simulation stops there.
pub trait GenerativePomdp: Sync {
    /// Opaque latent state with a stable total order.
    type State: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn n_actions(&self) -> usize;

    fn n_observations(&self) -> usize;

    fn discount(&self) -> f64;

    /// Upper bound on every reward.
    fn r_max(&self) -> f64;

    /// Default start distribution over latent states.
    fn start_distribution(&self) -> Vec<(Self::State, f64)>;

    fn transition(&self, state: &Self::State, action: usize) -> Vec<(Self::State, f64)>;

    fn reward(&self, state: &Self::State, action: usize) -> f64;

    /// Emission distribution `η(·|s)`.
    fn observation(&self, state: &Self::State) -> Vec<(usize, f64)>;

    fn is_terminal(&self, state: &Self::State) -> bool;

    fn v_max(&self) -> f64 {
        self.r_max() / (1.0 - self.discount())
    }
}

/// Draws an outcome from a finite distribution.
///
/// Point masses are returned without consuming randomness.
pub fn sample_from<T: Clone, R: Rng + ?Sized>(rng: &mut R, dist: &[(T, f64)]) -> T {
    assert!(!dist.is_empty(), "cannot sample from an empty distribution");
    if dist.len() == 1 {
        return dist[0].0.clone();
    }
    let total: f64 = dist.iter().map(|(_, p)| p).sum();
    let mut u = rng.gen::<f64>() * total;
    for (x, p) in dist {
        if u < *p {
            return x.clone();
        }
        u -= p;
    }
    dist.iter()
        .rev()
        .find(|(_, p)| *p > 0.0)
        .map(|(x, _)| x.clone())
        .unwrap_or_else(|| dist[dist.len() - 1].0.clone())
}
