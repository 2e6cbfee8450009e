//! Performance-loss bounds and their randomized verification.
//!
//! [`formulas`](self) evaluates each bound from its inputs, the instance
//! analyses compute bound and empirical gap on concrete models with exact
//! dynamic programming, and the suites run those analyses on random
//! instances with fixed seeds.

mod analysis;
mod dirichlet;
mod formulas;
mod identities;
pub mod random;
mod report;
mod scaling;
mod suites;

pub use analysis::{
    finite_learning_report, model_reduction_bound, ood_generalization_analysis,
    ood_generalization_bound, telescoping_gap_bound, OodAnalysis, SrChoice, EXACT_TOL,
};
pub use dirichlet::{dirichlet_unknown_mass_check, unknown_mass_formula, DirichletCheck};
pub use formulas::{
    corollary_expression, finite_learning_bound, mrp_value_loss_bound, simulation_lemma_bound,
    LearningOutcome,
};
pub use identities::{run_identity_suite, IdentityReport, IdentitySuite, IDENTITY_TOL};
pub use report::{BoundComponents, BoundReport, HOLDS_TOL};
pub use scaling::{approx_error_scaling_probe, scaling_table, ScalingFamily, ScalingRow};
pub use suites::{run_bound_suite, trial_seed, BoundSuite, Counterexample, SuiteReport};
