//! The three concrete tasks: the warm-cold lattice, the sign chain and the
//! chain with a two-state abstraction.

mod chain;
mod sign_chain;
mod warm_cold;

use crate::pomdp::GenerativePomdp;

pub use chain::{chain, Chain, ChainConfig};
pub use sign_chain::{Segment, SignChain, SignChainConfig, SignState};
pub use warm_cold::{InitialObservation, LatticeState, WarmCold, WarmColdConfig};

/// Task knowledge used by the experiment drivers.
pub trait TaskOracle: GenerativePomdp {
    /// Stable identifier, mixed into per-rollout seeds.
    fn env_id(&self) -> &'static str;

    /// Bit mask of the optimal actions at a non-terminal latent state.
    fn optimal_action_mask(&self, state: &Self::State) -> u32;

    /// Integer coordinates of a latent state, used in output rows.
    fn describe(&self, state: &Self::State) -> Vec<i64>;
}
