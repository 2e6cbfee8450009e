//! Exact finite MDPs and MRPs: dynamic programming, normalized successor
//! representations, weighted L1 norms and the state-action Bellman operator.

mod mdp;
mod norm;
mod policy;
mod solve;
mod sr;

pub use mdp::{normalize_row, FiniteMdp, FiniteMrp, SparseRow, StateActionIndexer, PROB_TOL};
pub use norm::{sparse_row_l1_distance, weighted_l1_norm_mat, weighted_l1_norm_vec};
pub use policy::Policy;
pub use solve::{
    action_values, bellman_apply, discounted_return, greedy_policy, iteration_cap,
    optimal_policy, policy_evaluation, q_from_values, OptimalSolution, DEFAULT_TOL,
};
pub use sr::{normalized_sr, NormalizedSr, SrKind};
