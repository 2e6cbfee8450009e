use serde::{Deserialize, Serialize};

use crate::abstraction::{
    build_abstract_mdp_partial, down_project_vec, error_profile, ood_errors, shared_key_abstractions,
    up_project_sa_dist, AbstractMdp, KeyKind,
};
use crate::error::{check_len, Result};
use crate::par::Execution;
use crate::pomdp::{enumerate_histories_capped, GenerativePomdp, DEFAULT_HISTORY_CAP};
use crate::tabular::{
    bellman_apply, greedy_policy, normalized_sr, optimal_policy, policy_evaluation, FiniteMdp,
    NormalizedSr, Policy, SrKind,
};

use super::formulas::{finite_learning_bound, LearningOutcome};
use super::report::{BoundComponents, BoundReport};

/// Solver tolerance used when a bound is checked against exact values.
pub const EXACT_TOL: f64 = 1e-12;

fn expected_return(mdp: &FiniteMdp, policy: &Policy, d0: &[f64]) -> Result<f64> {
    let v = policy_evaluation(mdp, policy, EXACT_TOL)?;
    Ok(d0.iter().zip(&v).map(|(p, x)| p * x).sum())
}

fn sa_sr(mdp: &FiniteMdp, policy: &Policy, d0: &[f64]) -> Result<NormalizedSr> {
    normalized_sr(mdp, policy, d0, SrKind::StateAction, EXACT_TOL)
}

/// Telescoping performance difference for the policy `π_f` greedy on `f`:
/// `J(π) − J(π_f) ≤ (‖f − B^{π_f} f‖_{d^π} + ‖f − B^{π_f} f‖_{d^{π_f}}) / (1-γ)`.
pub fn telescoping_gap_bound(mdp: &FiniteMdp, f: &[f64], pi: &Policy, d0: &[f64]) -> Result<BoundReport> {
    check_len("telescoping start distribution", mdp.n_states(), d0.len())?;
    let pi_f = greedy_policy(mdp.n_states(), mdp.n_actions(), f)?;
    let bf = bellman_apply(mdp, &pi_f, f)?;
    let residual: Vec<f64> = f.iter().zip(&bf).map(|(a, b)| (a - b).abs()).collect();
    let weighted = |d: &NormalizedSr| -> f64 { d.iter().zip(&residual).map(|(w, r)| w * r).sum() };
    let d_pi = sa_sr(mdp, pi, d0)?;
    let d_f = sa_sr(mdp, &pi_f, d0)?;
    let components = BoundComponents {
        bellman_residual: (weighted(&d_pi) + weighted(&d_f)) / (1.0 - mdp.discount()),
        ..BoundComponents::default()
    };
    let gap = expected_return(mdp, pi, d0)? - expected_return(mdp, &pi_f, d0)?;
    Ok(BoundReport::new(components, gap))
}

/// The abstract policy lifted to the ground model: greedy on `Φ↓Q*_φ`.
fn lifted_policy(ground: &FiniteMdp, abstract_mdp: &AbstractMdp, phi_ground: &crate::abstraction::AbstractionFn) -> Result<Policy> {
    let g = optimal_policy(&abstract_mdp.mdp, EXACT_TOL)?.q_values;
    let f = down_project_vec(phi_ground, ground.n_actions(), &g)?;
    greedy_policy(ground.n_states(), ground.n_actions(), &f)
}

/// Performance loss of the lifted abstract-optimal policy against the ground
/// optimum, bounded by successor-weighted reduction errors under both
/// policies' state-action SRs.
pub fn model_reduction_bound(ground: &FiniteMdp, abstract_mdp: &AbstractMdp, d0: &[f64]) -> Result<BoundReport> {
    check_len("reduction start distribution", ground.n_states(), d0.len())?;
    let phi = &abstract_mdp.phi;
    let pi_star = optimal_policy(ground, EXACT_TOL)?.policy;
    let pi_phi = lifted_policy(ground, abstract_mdp, phi)?;
    let profile = error_profile(ground, phi, &abstract_mdp.mdp)?;
    let scale = 1.0 / (1.0 - ground.discount());
    let half = 0.5 * ground.discount() * ground.v_max();
    let mut components = BoundComponents::default();
    for policy in [&pi_star, &pi_phi] {
        let (r, p) = profile.weighted(&sa_sr(ground, policy, d0)?)?;
        components.reward_approx += scale * r;
        components.transition_approx += scale * half * p;
    }
    let gap = expected_return(ground, &pi_star, d0)? - expected_return(ground, &pi_phi, d0)?;
    Ok(BoundReport::new(components, gap))
}

/// Which policy's state SR weighs the learning bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SrChoice {
    Optimal,
    Learned,
}

/// Learning-in-finite-steps bound evaluated against `J(π*) − J(π̂)`.
pub fn finite_learning_report(
    mdp: &FiniteMdp,
    outcome: &LearningOutcome,
    d0: &[f64],
    choice: SrChoice,
) -> Result<BoundReport> {
    let pi_star = optimal_policy(mdp, EXACT_TOL)?.policy;
    let weighting = match choice {
        SrChoice::Optimal => &pi_star,
        SrChoice::Learned => &outcome.policy,
    };
    let sr = normalized_sr(mdp, weighting, d0, SrKind::State, EXACT_TOL)?;
    let gamma = mdp.discount();
    let bound = finite_learning_bound(outcome, &sr, gamma, mdp.r_max())?;
    let observed: f64 = outcome.observed().iter().map(|&s| sr[s]).sum();
    let components = BoundComponents {
        known_mass: observed * outcome.epsilon * (mdp.r_max() + 0.5 * gamma * mdp.v_max()) / (1.0 - gamma),
        unknown_mass: (1.0 - observed).max(0.0) * mdp.v_max() / (1.0 - gamma),
        ..BoundComponents::default()
    };
    let gap = expected_return(mdp, &pi_star, d0)? - expected_return(mdp, &outcome.policy, d0)?;
    Ok(BoundReport::with_value(bound, components, gap))
}

/// Full breakdown of the out-of-distribution bound on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OodAnalysis {
    pub report: BoundReport,
    pub train_histories: usize,
    pub test_histories: usize,
    pub abstract_states: usize,
    /// `(‖ε_r^φ‖_d, ‖ε_p^φ‖_d)` under `d^{π*}` then `d^{π^φ}`.
    pub approximation: [(f64, f64); 2],
    /// `(‖ε_r^OOD‖_{Φ↑d}, ‖ε_p^OOD‖_{Φ↑d})` under `d^{π*}` then `d^{π^φ}`.
    pub ood: [(f64, f64); 2],
}

/// Evaluates the out-of-distribution generalization bound.
///
/// Train and test history MDPs are enumerated to `horizon` and abstracted
/// with the history key `kind` over one shared id space. Each abstract model
/// aggregates its ground model under the uniform-random policy's state-action
/// SR. The policy greedy on the lifted optimal action values of the training
/// abstraction is then run on the test task.
pub fn ood_generalization_analysis<P: GenerativePomdp>(
    pomdp: &P,
    d0_train: &[(P::State, f64)],
    d0_test: &[(P::State, f64)],
    kind: KeyKind,
    horizon: usize,
) -> Result<OodAnalysis> {
    let exec = Execution::Sequential;
    let train = enumerate_histories_capped(pomdp, d0_train, horizon, DEFAULT_HISTORY_CAP, exec)?;
    let test = enumerate_histories_capped(pomdp, d0_test, horizon, DEFAULT_HISTORY_CAP, exec)?;
    let phis = shared_key_abstractions(&[&train, &test], kind);
    let (phi_train, phi_test) = (&phis[0], &phis[1]);

    let build = |h: &crate::pomdp::HistoryMdp<P::State>, phi| -> Result<AbstractMdp> {
        let m = h.mdp();
        let uniform = Policy::uniform(m.n_states(), m.n_actions());
        let w = sa_sr(m, &uniform, h.start_distribution())?;
        build_abstract_mdp_partial(m, phi, &w)
    };
    let m_train = build(&train, phi_train)?;
    let m_test = build(&test, phi_test)?;

    let ground = test.mdp();
    let d0 = test.start_distribution();
    let na = ground.n_actions();
    let pi_star = optimal_policy(ground, EXACT_TOL)?.policy;
    let pi_phi = lifted_policy(ground, &m_train, phi_test)?;
    let profile = error_profile(ground, phi_test, &m_test.mdp)?;

    let gamma = ground.discount();
    let scale = 1.0 / (1.0 - gamma);
    let half = 0.5 * gamma * ground.v_max();
    let mut components = BoundComponents::default();
    let mut approximation = [(0.0, 0.0); 2];
    let mut ood = [(0.0, 0.0); 2];
    for (slot, policy) in [&pi_star, &pi_phi].into_iter().enumerate() {
        let d = sa_sr(ground, policy, d0)?;
        let (r, p) = profile.weighted(&d)?;
        let up = up_project_sa_dist(phi_test, na, &d)?;
        let (ro, po) = ood_errors(&m_train, &m_test, &up)?;
        components.reward_approx += scale * r;
        components.transition_approx += scale * half * p;
        components.reward_ood += scale * ro;
        components.transition_ood += scale * half * po;
        approximation[slot] = (r, p);
        ood[slot] = (ro, po);
    }
    let gap = expected_return(ground, &pi_star, d0)? - expected_return(ground, &pi_phi, d0)?;
    Ok(OodAnalysis {
        report: BoundReport::new(components, gap),
        train_histories: train.n_histories(),
        test_histories: test.n_histories(),
        abstract_states: phi_test.n_abstract(),
        approximation,
        ood,
    })
}

/// [`ood_generalization_analysis`] reduced to its [`BoundReport`].
pub fn ood_generalization_bound<P: GenerativePomdp>(
    pomdp: &P,
    d0_train: &[(P::State, f64)],
    d0_test: &[(P::State, f64)],
    kind: KeyKind,
    horizon: usize,
) -> Result<BoundReport> {
    Ok(ood_generalization_analysis(pomdp, d0_train, d0_test, kind, horizon)?.report)
}
