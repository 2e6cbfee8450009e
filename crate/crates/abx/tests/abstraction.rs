use abx::abstraction::{
    build_abstract_mdp, down_project_vec, error_profile, first_observation_abstraction, key_abstraction,
    max_norm_reduction_errors, ood_errors, reduction_errors, suffix_abstraction, up_project_dist,
    up_project_sa_dist, AbstractionFn, HistoryKey, KeyKind,
};
use abx::bounds::random::{random_abstraction, random_full_distribution, random_mdp, random_policy};
use abx::envs::{chain, ChainConfig, WarmCold, WarmColdConfig};
use abx::pomdp::enumerate_histories;
use abx::seed::rng_for;
use abx::tabular::{normalized_sr, policy_evaluation, FiniteMdp, NormalizedSr, Policy, SrKind, DEFAULT_TOL};
use abx::Error;
use proptest::prelude::*;
use rand::Rng;

fn sa_weights(mdp: &FiniteMdp, policy: &Policy, d0: &[f64]) -> NormalizedSr {
    normalized_sr(mdp, policy, d0, SrKind::StateAction, DEFAULT_TOL).unwrap()
}

fn warm_cold_training_hmdp(horizon: usize) -> abx::pomdp::HistoryMdp<abx::envs::LatticeState> {
    let env = WarmCold::new(WarmColdConfig::default()).unwrap();
    let starts = env.training_starts();
    let p = 1.0 / starts.len() as f64;
    let d0: Vec<_> = starts.into_iter().map(|s| (s, p)).collect();
    enumerate_histories(&env, &d0, horizon).unwrap()
}

#[test]
fn suffix_one_keys_only_see_the_last_pair() {
    let a = HistoryKey::of(KeyKind::Suffix(1), 3, 0, &[(1, 2), (0, 1)]);
    let b = HistoryKey::of(KeyKind::Suffix(1), 3, 2, &[(1, 0), (0, 1)]);
    assert_eq!(a, b);
    let c = HistoryKey::of(KeyKind::Suffix(1), 3, 2, &[(1, 0), (1, 1)]);
    assert_ne!(a, c);
}

#[test]
fn short_histories_keep_their_initial_observation() {
    let a = HistoryKey::of(KeyKind::Suffix(2), 3, 0, &[(1, 2)]);
    let b = HistoryKey::of(KeyKind::Suffix(2), 3, 1, &[(1, 2)]);
    assert_ne!(a, b);
    assert_eq!(a, HistoryKey::of(KeyKind::FullHistory, 3, 0, &[(1, 2)]));
    let f = HistoryKey::of(KeyKind::FirstObservation, 3, 1, &[(0, 0), (1, 2)]);
    assert_eq!(f, HistoryKey::of(KeyKind::FirstObservation, 3, 1, &[]));
}

#[test]
fn long_suffix_is_injective_on_enumerated_histories() {
    let hmdp = warm_cold_training_hmdp(3);
    let phi = suffix_abstraction(&hmdp, 10);
    assert_eq!(phi.n_abstract(), hmdp.n_states());
    let full = key_abstraction(&hmdp, KeyKind::FullHistory);
    assert_eq!(full.n_abstract(), hmdp.n_states());
}

#[test]
fn warm_cold_suffix_class_count_grows_with_k() {
    let hmdp = warm_cold_training_hmdp(6);
    let counts: Vec<usize> = (1..=5).map(|k| suffix_abstraction(&hmdp, k).n_abstract()).collect();
    assert!(counts.windows(2).all(|w| w[0] < w[1]), "{counts:?}");
    // Suffix-k keys refine suffix-(k-1) keys only on histories of length >= k.
    for k in 2..=5 {
        let fine = suffix_abstraction(&hmdp, k);
        let coarse = suffix_abstraction(&hmdp, k - 1);
        for (i, h) in hmdp.histories().iter().enumerate() {
            for (j, g) in hmdp.histories().iter().enumerate().skip(i + 1).take(50) {
                if h.len() >= k && g.len() >= k && fine.apply(i + 1) == fine.apply(j + 1) {
                    assert_eq!(coarse.apply(i + 1), coarse.apply(j + 1));
                }
            }
        }
    }
}

#[test]
fn first_observation_abstraction_has_one_class_per_symbol() {
    let hmdp = warm_cold_training_hmdp(2);
    let phi = first_observation_abstraction(&hmdp);
    // The start symbol, plus the class shared by the sink and terminal histories.
    assert_eq!(phi.n_abstract(), 2);
}

#[test]
fn constructor_validation() {
    assert!(matches!(AbstractionFn::from_table(vec![0, 2]), Err(Error::EmptyClass(1))));
    let phi = AbstractionFn::from_labels(["b", "a", "b", "c"]);
    assert_eq!(phi.map(), &[0, 1, 0, 2]);
    assert_eq!(phi.class_sizes(), vec![2, 1, 1]);
    assert!(AbstractionFn::identity(4).refines(&phi));
    assert!(phi.refines(&AbstractionFn::all_to_one(4)));
    assert!(!AbstractionFn::all_to_one(4).refines(&phi));
}

#[test]
fn down_projection_examples() {
    let phi = AbstractionFn::from_table(vec![1, 0, 1]).unwrap();
    let constant = down_project_vec(&phi, 2, &[3.5; 4]).unwrap();
    assert_eq!(constant, vec![3.5; 6]);

    let id = AbstractionFn::identity(3);
    let v = [1.0, -2.0, 3.0, 4.0, 0.5, 6.0];
    assert_eq!(down_project_vec(&id, 2, &v).unwrap(), v.to_vec());

    // Hand table: ground states 0 and 2 read class 1, state 1 reads class 0.
    let abs = [10.0, 11.0, 20.0, 21.0];
    assert_eq!(down_project_vec(&phi, 2, &abs).unwrap(), vec![20.0, 21.0, 10.0, 11.0, 20.0, 21.0]);
}

#[test]
fn up_projection_examples() {
    let d = [0.1, 0.2, 0.3, 0.4];
    assert_eq!(up_project_dist(&AbstractionFn::identity(4), &d).unwrap(), d.to_vec());
    let one = up_project_dist(&AbstractionFn::all_to_one(4), &d).unwrap();
    assert_eq!(one.len(), 1);
    assert!((one[0] - 1.0).abs() < 1e-15);

    let mut rng = rng_for(&[8]);
    for _ in 0..20 {
        let phi = random_abstraction(&mut rng, 10, 4);
        let d = random_full_distribution(&mut rng, 10);
        let up = up_project_dist(&phi, &d).unwrap();
        let mut grouped = vec![0.0; phi.n_abstract()];
        for (i, p) in d.iter().enumerate() {
            grouped[phi.apply(i)] += p;
        }
        for (a, b) in up.iter().zip(&grouped) {
            assert!((a - b).abs() < 1e-15);
        }

        let dsa = random_full_distribution(&mut rng, 20);
        let up = up_project_sa_dist(&phi, 2, &dsa).unwrap();
        let mut grouped = vec![0.0; phi.n_abstract() * 2];
        for (k, p) in dsa.iter().enumerate() {
            grouped[phi.apply(k / 2) * 2 + k % 2] += p;
        }
        for (a, b) in up.iter().zip(&grouped) {
            assert!((a - b).abs() < 1e-15);
        }
    }
    let dsa = [0.25; 4];
    assert_eq!(up_project_sa_dist(&AbstractionFn::identity(2), 2, &dsa).unwrap(), dsa.to_vec());
}

#[test]
fn identity_abstraction_reproduces_the_ground_model() {
    let mut rng = rng_for(&[9]);
    let mdp = random_mdp(&mut rng, 5, 2, 0.9).unwrap();
    let w = sa_weights(&mdp, &random_policy(&mut rng, 5, 2), &random_full_distribution(&mut rng, 5));
    let phi = AbstractionFn::identity(5);
    let m = build_abstract_mdp(&mdp, &phi, &w).unwrap();
    assert_eq!(m.mdp.rewards(), mdp.rewards());
    for k in 0..10 {
        let (a, b) = (m.mdp.dense_row(k), mdp.dense_row(k));
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-15));
    }
    let e = reduction_errors(&mdp, &phi, &m, &w).unwrap();
    assert_eq!((e.eps_r, e.eps_p), (0.0, 0.0));
    let e = max_norm_reduction_errors(&mdp, &phi, &m).unwrap();
    assert_eq!((e.eps_r, e.eps_p), (0.0, 0.0));
}

/// A random MDP in which state `n-1` duplicates state `n-2`.
fn with_duplicate_state(seed: u64, n: usize) -> FiniteMdp {
    let mut rng = rng_for(&[seed]);
    let base = random_mdp(&mut rng, n, 2, 0.85).unwrap();
    let mut rows = base.transitions().to_vec();
    let mut rewards = base.rewards().to_vec();
    for a in 0..2 {
        rows[(n - 1) * 2 + a] = rows[(n - 2) * 2 + a].clone();
        rewards[(n - 1) * 2 + a] = rewards[(n - 2) * 2 + a];
    }
    FiniteMdp::new(n, 2, rows, rewards, 0.85, 1.0).unwrap()
}

#[test]
fn merging_duplicate_states_is_exact() {
    for seed in 0..20u64 {
        let n = 5;
        let mdp = with_duplicate_state(seed, n);
        let mut table: Vec<usize> = (0..n).collect();
        table[n - 1] = n - 2;
        let phi = AbstractionFn::from_table(table).unwrap();
        let mut rng = rng_for(&[seed, 2]);
        let w = sa_weights(&mdp, &Policy::uniform(n, 2), &random_full_distribution(&mut rng, n));
        let m = build_abstract_mdp(&mdp, &phi, &w).unwrap();
        let e = reduction_errors(&mdp, &phi, &m, &w).unwrap();
        assert!(e.eps_r < 1e-15 && e.eps_p < 1e-12, "{e:?}");

        // With zero errors, abstract evaluation lifts to ground evaluation.
        let abstract_policy = random_policy(&mut rng, n - 1, 2);
        let lifted_rows: Vec<Vec<f64>> = (0..n).map(|i| abstract_policy.row(phi.apply(i)).to_vec()).collect();
        let lifted = Policy::new(2, lifted_rows).unwrap();
        let v_abs = policy_evaluation(&m.mdp, &abstract_policy, DEFAULT_TOL).unwrap();
        let v = policy_evaluation(&mdp, &lifted, DEFAULT_TOL).unwrap();
        for i in 0..n {
            assert!((v[i] - v_abs[phi.apply(i)]).abs() < 1e-8);
        }
    }
}

#[test]
fn empty_abstract_class_is_rejected() {
    let mut rng = rng_for(&[1]);
    let mdp = random_mdp(&mut rng, 3, 1, 0.9).unwrap();
    let w = NormalizedSr::new(vec![1.0 / 3.0; 3], SrKind::StateAction).unwrap();
    let phi = AbstractionFn::with_codomain(vec![0, 0, 2], 3).unwrap();
    assert!(matches!(build_abstract_mdp(&mdp, &phi, &w), Err(Error::EmptyClass(1))));
}

#[test]
fn weight_masking_isolates_one_reward_error() {
    // Two states, one action, merged; abstract reward is their plain mean.
    let mdp = FiniteMdp::new(2, 1, vec![vec![(0, 1.0)], vec![(1, 1.0)]], vec![0.2, 0.8], 0.9, 1.0).unwrap();
    let phi = AbstractionFn::all_to_one(2);
    let m = build_abstract_mdp(&mdp, &phi, &NormalizedSr::new(vec![0.5, 0.5], SrKind::StateAction).unwrap()).unwrap();
    assert!((m.mdp.rewards()[0] - 0.5).abs() < 1e-15);
    let point = NormalizedSr::new(vec![1.0, 0.0], SrKind::StateAction).unwrap();
    let e = reduction_errors(&mdp, &phi, &m, &point).unwrap();
    assert!((e.eps_r - 0.3).abs() < 1e-15);
    assert_eq!(e.eps_p, 0.0);
    let profile = error_profile(&mdp, &phi, &m.mdp).unwrap();
    assert!((profile.max().0 - 0.3).abs() < 1e-15);
    assert_eq!(profile.max().1, 0.0);
}

#[test]
fn chain_compresses_to_two_abstract_states() {
    let c = chain(&ChainConfig::default()).unwrap();
    let w = sa_weights(&c.mdp, &c.always_left(), &c.start_distribution());
    let m = build_abstract_mdp(&c.mdp, &c.phi, &w).unwrap();
    assert_eq!(m.mdp.n_states(), 2);
    let weighted = reduction_errors(&c.mdp, &c.phi, &m, &w).unwrap();
    let max = max_norm_reduction_errors(&c.mdp, &c.phi, &m).unwrap();
    assert!(weighted.eps_p < max.eps_p);
    assert!(max.eps_p > 1.0, "{}", max.eps_p);
}

#[test]
fn chain_sr_is_geometric_along_the_line() {
    let c = chain(&ChainConfig::default()).unwrap();
    let gamma = 0.9f64;
    let sr = normalized_sr(&c.mdp, &c.always_left(), &c.start_distribution(), SrKind::State, DEFAULT_TOL).unwrap();
    let n = 10;
    for i in 1..n {
        let t = (n - 1 - i) as i32;
        assert!((sr.weights()[i] - (1.0 - gamma) * gamma.powi(t)).abs() < 1e-10, "position {}", i + 1);
    }
    assert!((sr.weights()[0] - gamma.powi(n as i32 - 1)).abs() < 1e-10);
}

#[test]
fn ood_error_examples() {
    let mut rng = rng_for(&[14]);
    let low = |r: f64| r * 0.6;
    let base = random_mdp(&mut rng, 6, 2, 0.9).unwrap();
    let shrunk = FiniteMdp::new(6, 2, base.transitions().to_vec(), base.rewards().iter().map(|&r| low(r)).collect(), 0.9, 1.0)
        .unwrap();
    let shifted = FiniteMdp::new(
        6,
        2,
        base.transitions().to_vec(),
        shrunk.rewards().iter().map(|&r| r + 0.25).collect(),
        0.9,
        1.0,
    )
    .unwrap();
    let phi = random_abstraction(&mut rng, 6, 3);
    let w = sa_weights(&shrunk, &Policy::uniform(6, 2), &[1.0 / 6.0; 6]);
    let a = build_abstract_mdp(&shrunk, &phi, &w).unwrap();
    let b = build_abstract_mdp(&shifted, &phi, &w).unwrap();
    let abs_w = random_full_distribution(&mut rng, phi.n_abstract() * 2);
    assert_eq!(ood_errors(&a, &a, &abs_w).unwrap(), (0.0, 0.0));
    let (r, p) = ood_errors(&a, &b, &abs_w).unwrap();
    assert!((r - 0.25).abs() < 1e-12);
    assert!(p < 1e-12);

    let other = build_abstract_mdp(&shrunk, &AbstractionFn::identity(6), &w).unwrap();
    assert!(matches!(ood_errors(&a, &other, &abs_w), Err(Error::AbstractMismatch { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn aggregated_models_are_valid_and_errors_bounded(seed in any::<u64>(), n in 2usize..=10, m in 1usize..=5) {
        let mut rng = rng_for(&[seed]);
        let na = rng.gen_range(1..=3);
        let mdp = random_mdp(&mut rng, n, na, 0.9).unwrap();
        let phi = random_abstraction(&mut rng, n, m.min(n));
        let w = sa_weights(&mdp, &random_policy(&mut rng, n, na), &random_full_distribution(&mut rng, n));
        let a = build_abstract_mdp(&mdp, &phi, &w).unwrap();
        prop_assert_eq!(a.mdp.n_states(), phi.n_abstract());
        let e = reduction_errors(&mdp, &phi, &a, &w).unwrap();
        let x = max_norm_reduction_errors(&mdp, &phi, &a).unwrap();
        prop_assert!(e.eps_p <= 2.0 + 1e-12 && e.eps_r <= mdp.r_max() + 1e-12);
        prop_assert!(e.eps_p <= x.eps_p + 1e-12 && e.eps_r <= x.eps_r + 1e-12);
    }

    #[test]
    fn abstract_ids_are_contiguous_in_first_occurrence_order(labels in proptest::collection::vec(0u8..6, 1..40)) {
        let phi = AbstractionFn::from_labels(labels.iter().copied());
        let mut next = 0;
        for &c in phi.map() {
            prop_assert!(c <= next);
            if c == next {
                next += 1;
            }
        }
        prop_assert_eq!(next, phi.n_abstract());
        prop_assert!(phi.class_sizes().iter().all(|&s| s > 0));
    }
}
