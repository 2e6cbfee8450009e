use abx::abstraction::{build_abstract_mdp, max_norm_reduction_errors, AbstractionFn, KeyKind};
use abx::bounds::random::{random_abstraction, random_full_distribution, random_mdp, random_policy};
use abx::bounds::{
    approx_error_scaling_probe, corollary_expression, dirichlet_unknown_mass_check, finite_learning_bound,
    finite_learning_report, model_reduction_bound, ood_generalization_analysis, ood_generalization_bound,
    run_bound_suite, run_identity_suite, simulation_lemma_bound, telescoping_gap_bound, trial_seed,
    unknown_mass_formula, BoundSuite, IdentitySuite, LearningOutcome, ScalingFamily, SrChoice, HOLDS_TOL,
    IDENTITY_TOL,
};
use abx::envs::{SignChain, SignChainConfig};
use abx::par::Execution;
use abx::pomdp::GenerativePomdp;
use abx::seed::rng_for;
use abx::tabular::{
    action_values, normalized_sr, optimal_policy, FiniteMdp, NormalizedSr, Policy, SrKind, DEFAULT_TOL,
};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn simulation_lemma_arithmetic() {
    assert_eq!(simulation_lemma_bound(0.0, 0.0, 0.7, 3.0), 0.0);
    assert!((simulation_lemma_bound(0.1, 0.0, 0.5, 2.0) - 0.2).abs() < 1e-15);
}

#[test]
fn every_bound_suite_holds() {
    for suite in BoundSuite::ALL {
        let trials = if suite == BoundSuite::OodGeneralization { 100 } else { 300 };
        let report = run_bound_suite(suite, 2024, trials, Execution::default()).unwrap();
        assert_eq!(report.trials, trials);
        assert!(report.checks >= trials);
        assert_eq!(report.violations, 0, "{}: {:?}", report.suite, report.counterexamples);
        assert!(report.min_slack >= -HOLDS_TOL);
        assert!(report.max_states <= 12 || suite == BoundSuite::OodGeneralization);
    }
}

#[test]
fn suites_are_independent_of_execution_mode() {
    for suite in [BoundSuite::SimulationLemma, BoundSuite::FiniteLearning] {
        let a = run_bound_suite(suite, 5, 40, Execution::Sequential).unwrap();
        let b = run_bound_suite(suite, 5, 40, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
    assert_ne!(trial_seed(1, BoundSuite::SimulationLemma, 0), trial_seed(1, BoundSuite::SimulationLemma, 1));
    assert_ne!(trial_seed(1, BoundSuite::SimulationLemma, 0), trial_seed(1, BoundSuite::Telescoping, 0));
}

#[test]
fn identity_suites_hold_to_machine_precision() {
    for suite in IdentitySuite::ALL {
        let report = run_identity_suite(suite, 3, 500).unwrap();
        assert!(report.passed(), "{}: deviation {:e}", report.suite, report.max_deviation);
        assert!(report.max_deviation <= IDENTITY_TOL);
        assert_eq!(report.instances, 500);
    }
}

#[test]
fn learning_bound_endpoints() {
    let mut rng = rng_for(&[4]);
    let gamma = 0.8;
    let sr = NormalizedSr::new(random_full_distribution(&mut rng, 4), SrKind::State).unwrap();
    let policy = Policy::uniform(4, 2);
    let all = LearningOutcome::new(vec![0, 1, 2, 3], 0.0, policy.clone()).unwrap();
    assert_eq!(finite_learning_bound(&all, &sr, gamma, 1.0).unwrap(), 0.0);
    let none = LearningOutcome::new(vec![], 0.3, policy.clone()).unwrap();
    let v_max = 1.0 / (1.0 - gamma);
    assert!((finite_learning_bound(&none, &sr, gamma, 1.0).unwrap() - v_max / (1.0 - gamma)).abs() < 1e-12);
    assert!(LearningOutcome::new(vec![4], 0.1, policy).is_err());
}

#[test]
fn learning_report_holds_for_both_weightings() {
    for seed in 0..50u64 {
        let mut rng = rng_for(&[seed, 88]);
        let mdp = random_mdp(&mut rng, 6, 2, 0.85).unwrap();
        let pi_star = optimal_policy(&mdp, DEFAULT_TOL).unwrap().policy;
        let noise = random_policy(&mut rng, 6, 2);
        let observed: Vec<usize> = (0..6).filter(|_| rng.gen_bool(0.5)).collect();
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|s| if observed.contains(&s) { pi_star.row(s).to_vec() } else { noise.row(s).to_vec() })
            .collect();
        let outcome = LearningOutcome::new(observed, 0.0, Policy::new(2, rows).unwrap()).unwrap();
        let d0 = random_full_distribution(&mut rng, 6);
        for choice in [SrChoice::Optimal, SrChoice::Learned] {
            let r = finite_learning_report(&mdp, &outcome, &d0, choice).unwrap();
            assert!(r.holds, "seed {seed} {choice:?}: gap {} bound {}", r.empirical_gap, r.bound_value);
        }
    }
}

#[test]
fn telescoping_examples() {
    let mut rng = rng_for(&[6]);
    let mdp = random_mdp(&mut rng, 5, 3, 0.9).unwrap();
    let d0 = random_full_distribution(&mut rng, 5);
    let sol = optimal_policy(&mdp, 1e-12).unwrap();
    let at_q = telescoping_gap_bound(&mdp, &sol.q_values, &sol.policy, &d0).unwrap();
    assert!(at_q.bound_value < 1e-9, "{}", at_q.bound_value);
    assert!(at_q.empirical_gap.abs() < 1e-9);

    // Strictly positive rewards make f = 0 a poor guess, so the bound is loose but valid.
    let positive = FiniteMdp::new(
        5,
        3,
        mdp.transitions().to_vec(),
        mdp.rewards().iter().map(|r| 0.1 + 0.9 * r).collect(),
        0.9,
        1.0,
    )
    .unwrap();
    let best = optimal_policy(&positive, 1e-12).unwrap().policy;
    let r = telescoping_gap_bound(&positive, &[0.0; 15], &best, &d0).unwrap();
    assert!(r.empirical_gap <= r.bound_value);
    assert!(r.bound_value > 0.0);
    assert!(r.holds);

    // Evaluation-consistent f: the residual vanishes and π_f = greedy(Q^π).
    let q = action_values(&positive, &Policy::uniform(5, 3), 1e-12).unwrap();
    assert!(telescoping_gap_bound(&positive, &q, &best, &d0).unwrap().holds);
}

#[test]
fn identity_and_exact_merges_have_zero_reduction_bound() {
    let mut rng = rng_for(&[10]);
    let mdp = random_mdp(&mut rng, 6, 2, 0.9).unwrap();
    let d0 = random_full_distribution(&mut rng, 6);
    let w = normalized_sr(&mdp, &Policy::uniform(6, 2), &d0, SrKind::StateAction, DEFAULT_TOL).unwrap();
    let id = build_abstract_mdp(&mdp, &AbstractionFn::identity(6), &w).unwrap();
    let r = model_reduction_bound(&mdp, &id, &d0).unwrap();
    assert!(r.bound_value < 1e-12, "{}", r.bound_value);
    assert!(r.empirical_gap.abs() < 1e-9);

    // Duplicate state 5 into state 4's dynamics; merging them is exact.
    let mut rows = mdp.transitions().to_vec();
    let mut rewards = mdp.rewards().to_vec();
    for a in 0..2 {
        rows[10 + a] = rows[8 + a].clone();
        rewards[10 + a] = rewards[8 + a];
    }
    let dup = FiniteMdp::new(6, 2, rows, rewards, 0.9, 1.0).unwrap();
    let w = normalized_sr(&dup, &Policy::uniform(6, 2), &d0, SrKind::StateAction, DEFAULT_TOL).unwrap();
    let phi = AbstractionFn::from_table(vec![0, 1, 2, 3, 4, 4]).unwrap();
    let merged = build_abstract_mdp(&dup, &phi, &w).unwrap();
    let r = model_reduction_bound(&dup, &merged, &d0).unwrap();
    assert!(r.bound_value < 1e-9, "{}", r.bound_value);
    assert!(r.empirical_gap.abs() < 1e-9);
}

#[test]
fn reduction_bound_never_exceeds_its_max_norm_analogue() {
    for seed in 0..200u64 {
        let mut rng = rng_for(&[seed, 55]);
        let n = rng.gen_range(2..=12);
        let gamma = rng.gen_range(0.3..0.95);
        let mdp = random_mdp(&mut rng, n, 2, gamma).unwrap();
        let m = rng.gen_range(1..=n);
        let phi = random_abstraction(&mut rng, n, m);
        let d0 = random_full_distribution(&mut rng, n);
        let w = normalized_sr(&mdp, &random_policy(&mut rng, n, 2), &d0, SrKind::StateAction, DEFAULT_TOL).unwrap();
        let m = build_abstract_mdp(&mdp, &phi, &w).unwrap();
        let r = model_reduction_bound(&mdp, &m, &d0).unwrap();
        let x = max_norm_reduction_errors(&mdp, &phi, &m).unwrap();
        let max_norm = 2.0 * simulation_lemma_bound(x.eps_r, x.eps_p, gamma, mdp.v_max());
        assert!(r.bound_value <= max_norm + 1e-12, "seed {seed}: {} > {max_norm}", r.bound_value);
        assert!(r.holds);
    }
}

#[test]
fn same_start_and_full_history_keys_give_zero_ood_bound() {
    let env = SignChain::new(SignChainConfig::default()).unwrap();
    let d0 = env.start_distribution();
    let a = ood_generalization_analysis(&env, &d0, &d0, KeyKind::FullHistory, 4).unwrap();
    assert_eq!(a.report.bound_value, 0.0);
    assert!(a.report.empirical_gap.abs() < 1e-9);
}

#[test]
fn sign_chain_first_observation_generalizes_without_loss() {
    let env = SignChain::new(SignChainConfig::default()).unwrap();
    let train: Vec<_> = env.train_starts().into_iter().map(|s| (s, 0.5)).collect();
    let test: Vec<_> = env.test_starts().into_iter().map(|s| (s, 0.5)).collect();
    for horizon in [4, 8, 12] {
        let a = ood_generalization_analysis(&env, &train, &test, KeyKind::FirstObservation, horizon).unwrap();
        assert_eq!(a.abstract_states, 3);
        assert!(a.report.empirical_gap.abs() < 1e-9, "horizon {horizon}: {}", a.report.empirical_gap);
        assert!(a.report.holds);
        // The truncated train and test chains have different lengths, so the
        // aggregated sign classes differ slightly in their dynamics.
        assert!(a.ood.iter().all(|&(r, p)| r < 0.05 && p < 0.05), "{:?}", a.ood);
    }
    let full = ood_generalization_bound(&env, &train, &test, KeyKind::FullHistory, 12).unwrap();
    assert!(full.empirical_gap > 0.1);
    assert!(full.holds);
}

#[test]
fn corollary_examples() {
    let v = corollary_expression(2, 2, 10, 0.01, 0.0);
    assert!((v - 0.35).abs() < 1e-12, "{v}");
    let expected = 0.25 + (10.0 / 11.0) * 0.01 + 1.0 / 11.0;
    assert!((v - expected).abs() < 1e-15);
    let big = corollary_expression(2, 2, 10, 0.01, 1e6);
    assert!((big - 1e6 - v).abs() < 1e-6);
}

#[test]
fn unknown_mass_formula_examples() {
    assert!((unknown_mass_formula(4, 10) - 12.0 / 13.0).abs() < 1e-15);
    assert!(unknown_mass_formula(2, 1_000_000_000) < 1e-8);
    let check = dirichlet_unknown_mass_check(4, 10, 100_000, 1).unwrap();
    assert!(check.z_score() <= 3.0, "{check:?}");
    assert!(dirichlet_unknown_mass_check(4, 10, 100, 1).is_err());
}

#[test]
fn scaling_probe_endpoints_and_monotone_suffix_sweep() {
    let family = ScalingFamily::WarmColdSuffix {
        train_radius: 3,
        horizon: 5,
    };
    let rows = approx_error_scaling_probe(family, &[1, 2, 3, 4, 5]).unwrap();
    let first = &rows[0];
    let last = rows.last().unwrap();
    assert_eq!(first.label, "all_to_one");
    assert_eq!(first.s_phi, 1);
    assert_eq!(last.label, "identity");
    assert!(last.eps_r < 1e-12 && last.eps_p < 1e-12, "{last:?}");
    let sweep = &rows[1..rows.len() - 1];
    for w in sweep.windows(2) {
        assert!(w[1].s_phi > w[0].s_phi);
        assert!(w[1].eps_r <= w[0].eps_r + 1e-12, "{} -> {}", w[0].label, w[1].label);
        assert!(w[1].eps_p <= w[0].eps_p + 1e-12, "{} -> {}", w[0].label, w[1].label);
    }
    // The coarsest abstraction has the largest reward error. Its transition
    // error is zero: a single class absorbs every row exactly.
    assert!(rows.iter().all(|r| r.eps_r <= first.eps_r + 1e-12));
    assert!(first.eps_p < 1e-12, "{}", first.eps_p);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn simulation_bound_is_monotone(
        r in 0.0f64..1.0, p in 0.0f64..2.0, dr in 0.0f64..1.0, dp in 0.0f64..1.0,
        gamma in 0.0f64..0.99, v_max in 0.0f64..100.0,
    ) {
        let base = simulation_lemma_bound(r, p, gamma, v_max);
        prop_assert!(simulation_lemma_bound(r + dr, p, gamma, v_max) >= base);
        prop_assert!(simulation_lemma_bound(r, p + dp, gamma, v_max) >= base);
    }

    #[test]
    fn corollary_is_monotone_in_eps_and_b(
        s in 1usize..100, a in 1usize..4, t in 0usize..1000,
        eps in 0.0f64..1.0, de in 0.0f64..1.0, b in 0.0f64..1.0, db in 0.0f64..1.0,
    ) {
        let base = corollary_expression(s, a, t, eps, b);
        prop_assert!(corollary_expression(s, a, t, eps + de, b) >= base);
        prop_assert!((corollary_expression(s, a, t, eps, b + db) - base - db).abs() < 1e-12);
    }
}
