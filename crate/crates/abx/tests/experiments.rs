use abx::abstraction::{HistoryKey, KeyKind};
use abx::envs::{SignChain, SignChainConfig, TaskOracle, WarmCold, WarmColdConfig};
use abx::experiments::output::{read_csv, write_csv, RunManifest};
use abx::experiments::{
    build_policy_dictionary, chain_error_experiment, corollary_experiment, run_rollouts, sign_chain_experiment,
    sign_chain_summary, warm_cold_dictionary, warm_cold_experiment, warm_cold_test_starts, ChainErrorExperiment,
    CorollaryExperiment, ExperimentConfig, MeanSem, PolicyDictionary, RolloutPolicy, RolloutSpec, SignChainExperiment,
    WarmColdExperiment, WarmColdRow, WarmColdSummary, DEFAULT_DICTIONARY_CAP,
};
use abx::par::{self, Execution};
use abx::Error;
use proptest::prelude::*;

fn warm_cold() -> WarmCold {
    WarmCold::new(WarmColdConfig::default()).unwrap()
}

fn small_warm_cold() -> WarmColdExperiment {
    WarmColdExperiment {
        env: WarmColdConfig {
            distances: vec![3, 10],
            ..WarmColdConfig::default()
        },
        k_list: vec![1, 2, 3],
        walks: 2,
        max_steps: 200,
        seed: 11,
        dictionary_horizon: None,
    }
}

fn small_sign_chain() -> SignChainExperiment {
    SignChainExperiment {
        distances: vec![8, 12, 20],
        repeats: 3,
        ..SignChainExperiment::default()
    }
}

fn csv_bytes<T: serde::Serialize>(rows: &[T]) -> Vec<u8> {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    write_csv(&path, rows).unwrap();
    std::fs::read(path).unwrap()
}

#[test]
fn suffix_one_dictionary_holds_the_eight_pairs_and_the_start() {
    let env = warm_cold();
    let dict = warm_cold_dictionary(&env, 1, None, Execution::default()).unwrap();
    let entries = dict.sorted_entries();
    assert_eq!(entries.len(), 9);
    let start_key = HistoryKey::of(KeyKind::Suffix(1), 3, WarmCold::START, &[]);
    let mut pairs = 0;
    for (key, counts) in &entries {
        assert!(counts.iter().any(|&c| c > 0), "{key:?} has no positive count");
        if *key != start_key {
            pairs += 1;
        }
    }
    assert_eq!(pairs, 4 * 2);
    for a in 0..4 {
        for o in [WarmCold::WARM, WarmCold::COLD] {
            assert!(dict.lookup(WarmCold::START, &[(a, o)]).is_some(), "missing pair ({a}, {o})");
        }
    }
    // At the start every direction except straight away from the goal is optimal somewhere.
    let at_start = dict.get(&start_key).unwrap();
    assert!(at_start.iter().all(|&c| c > 0));
}

#[test]
fn dictionary_counts_follow_the_optimal_masks() {
    let env = warm_cold();
    // Moving right and getting warmer means x < 0 now, so right stays optimal.
    let dict = warm_cold_dictionary(&env, 1, None, Execution::default()).unwrap();
    let counts = dict.lookup(WarmCold::START, &[(WarmCold::RIGHT, WarmCold::WARM)]).unwrap();
    assert!(counts[WarmCold::RIGHT] > 0);
    assert_eq!(counts[WarmCold::LEFT], 0);
}

#[test]
fn dictionary_is_independent_of_execution_mode() {
    let env = warm_cold();
    let a = warm_cold_dictionary(&env, 3, None, Execution::Sequential).unwrap();
    let b = warm_cold_dictionary(&env, 3, None, Execution::Parallel).unwrap();
    assert_eq!(a.sorted_entries(), b.sorted_entries());
    let c = par::with_threads(3, || warm_cold_dictionary(&env, 3, None, Execution::Parallel).unwrap());
    assert_eq!(a.sorted_entries(), c.sorted_entries());
}

#[test]
fn empty_start_set_gives_an_empty_dictionary() {
    let env = warm_cold();
    let dict = build_policy_dictionary(&env, &[], 4, KeyKind::Suffix(2), DEFAULT_DICTIONARY_CAP, Execution::default())
        .unwrap();
    assert!(dict.is_empty());
}

#[test]
fn dictionary_capacity_is_enforced() {
    let env = warm_cold();
    let err = build_policy_dictionary(&env, &env.training_starts(), 6, KeyKind::Suffix(6), 1000, Execution::Sequential)
        .unwrap_err();
    assert!(matches!(err, Error::Capacity { .. }), "{err}");
}

#[test]
fn sign_chain_first_observation_dictionary_has_two_keys() {
    let env = SignChain::new(SignChainConfig::default()).unwrap();
    let dict = build_policy_dictionary(
        &env,
        &env.train_starts(),
        10,
        KeyKind::FirstObservation,
        DEFAULT_DICTIONARY_CAP,
        Execution::default(),
    )
    .unwrap();
    assert_eq!(dict.len(), 2);
    let right = dict.lookup(SignChain::RIGHT_SIGN, &[]).unwrap();
    let left = dict.lookup(SignChain::LEFT_SIGN, &[]).unwrap();
    assert_eq!(right[SignChain::LEFT], 0);
    assert!(right[SignChain::RIGHT] > 0);
    assert_eq!(left[SignChain::RIGHT], 0);
    assert!(left[SignChain::LEFT] > 0);
}

#[test]
fn optimal_dictionary_makes_no_mistakes() {
    let env = SignChain::new(SignChainConfig {
        test_offsets: (17, 23),
        ..SignChainConfig::default()
    })
    .unwrap();
    let dict = build_policy_dictionary(
        &env,
        &env.train_starts(),
        10,
        KeyKind::FirstObservation,
        DEFAULT_DICTIONARY_CAP,
        Execution::default(),
    )
    .unwrap();
    let spec = RolloutSpec {
        walks_per_start: 4,
        max_steps: 500,
        seed: 3,
        stream: 0,
    };
    for r in run_rollouts(&env, RolloutPolicy::Dictionary(&dict), &env.test_starts(), &spec, Execution::default()) {
        assert_eq!(r.mistakes_total, 0);
        assert!(r.reached_goal);
        assert_eq!(r.steps as i64, r.start[1].abs());
    }
}

#[test]
fn empty_dictionary_behaves_like_the_uniform_policy() {
    let env = warm_cold();
    let empty = PolicyDictionary::empty(KeyKind::Suffix(3), 4, 3);
    let spec = RolloutSpec {
        walks_per_start: 3,
        max_steps: 100,
        seed: 5,
        stream: 9,
    };
    let starts = WarmCold::diamond(4);
    let a = run_rollouts(&env, RolloutPolicy::Dictionary(&empty), &starts, &spec, Execution::default());
    let b = run_rollouts(&env, RolloutPolicy::Uniform, &starts, &spec, Execution::default());
    assert_eq!(a, b);
    assert!(a.iter().all(|r| r.mistakes_known_key == 0));
}

#[test]
fn rollouts_are_ordered_and_reproducible() {
    let env = warm_cold();
    let dict = warm_cold_dictionary(&env, 2, None, Execution::default()).unwrap();
    let spec = RolloutSpec {
        walks_per_start: 3,
        max_steps: 300,
        seed: 8,
        stream: 1,
    };
    let starts = WarmCold::diamond(5);
    let seq = run_rollouts(&env, RolloutPolicy::Dictionary(&dict), &starts, &spec, Execution::Sequential);
    let par = run_rollouts(&env, RolloutPolicy::Dictionary(&dict), &starts, &spec, Execution::Parallel);
    assert_eq!(seq, par);
    let keys: Vec<(usize, usize)> = seq.iter().map(|r| (r.start_index, r.repeat)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(seq.len(), starts.len() * 3);
    assert_eq!(seq[0].env_id, env.env_id());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rollout_records_account_for_every_mistake(seed in any::<u64>(), k in 0usize..4, d in 1u32..20, max_steps in 1usize..120) {
        let env = warm_cold();
        let dict = warm_cold_dictionary(&env, k, None, Execution::Sequential).unwrap();
        let spec = RolloutSpec { walks_per_start: 2, max_steps, seed, stream: 0 };
        for r in run_rollouts(&env, RolloutPolicy::Dictionary(&dict), &WarmCold::diamond(d), &spec, Execution::Sequential) {
            prop_assert_eq!(r.mistakes_total, r.mistakes_known_key + r.mistakes_missing_key);
            prop_assert!(r.steps <= max_steps);
            prop_assert!(r.reached_goal || r.steps == max_steps);
            prop_assert!(r.mistakes_total as usize <= r.steps);
            if r.reached_goal {
                // Every mistake costs two extra steps on the lattice.
                prop_assert_eq!(r.steps, d as usize + 2 * r.mistakes_total as usize);
            }
        }
    }
}

#[test]
fn warm_cold_rows_cover_every_cell() {
    let config = small_warm_cold();
    let rows = warm_cold_experiment(&config, Execution::default()).unwrap();
    let env = WarmCold::new(config.env.clone()).unwrap();
    let per_k: usize = config.env.distances.iter().map(|&d| warm_cold_test_starts(&env, d).len()).sum();
    assert_eq!(rows.len(), per_k * config.k_list.len() * config.walks);
    let mut sorted = rows.clone();
    sorted.sort();
    assert_eq!(rows, sorted);
    // In distribution the training starts are reused.
    assert_eq!(warm_cold_test_starts(&env, 3), env.training_starts());
    assert_eq!(warm_cold_test_starts(&env, 10), WarmCold::diamond(10));
    assert!(rows.iter().all(|r| r.seed != 0));
}

#[test]
fn warm_cold_csv_is_identical_across_thread_counts() {
    let config = small_warm_cold();
    let reference = csv_bytes(&warm_cold_experiment(&config, Execution::Sequential).unwrap());
    for threads in [1, 2, 4] {
        let rows = par::with_threads(threads, || warm_cold_experiment(&config, Execution::Parallel).unwrap());
        assert_eq!(csv_bytes(&rows), reference, "{threads} threads");
    }
    let header = String::from_utf8(reference).unwrap();
    assert!(header.starts_with(
        "goal_distance,suffix_k,start_x,start_y,repeat,steps,reached_goal,mistakes_total,mistakes_known_key,mistakes_missing_key,seed\n"
    ));
}

#[test]
fn sign_chain_shapes_and_determinism() {
    let config = small_sign_chain();
    let rows = sign_chain_experiment(&config, Execution::Sequential).unwrap();
    assert_eq!(rows.len(), 3 * config.distances.len() * config.repeats);
    for r in &rows {
        assert_eq!(r.optimal_steps, 2 * u64::from(r.distance));
        assert_eq!(r.ratio, r.optimal_steps as f64 / r.actual_steps as f64);
        match r.abstraction.as_str() {
            "first_obs" => assert_eq!(r.ratio, 1.0),
            "random" => assert!(r.ratio < 1.0),
            "full_history" => assert!(r.ratio <= 1.0),
            other => panic!("unexpected abstraction {other}"),
        }
    }
    let summary = sign_chain_summary(&rows);
    assert_eq!(summary.len(), 9);

    let parallel = par::with_threads(3, || sign_chain_experiment(&config, Execution::Parallel).unwrap());
    assert_eq!(csv_bytes(&rows), csv_bytes(&parallel));
    assert!(String::from_utf8(csv_bytes(&rows))
        .unwrap()
        .starts_with("abstraction,distance,repeat,optimal_steps,actual_steps,ratio,seed\n"));
}

#[test]
fn sign_chain_rejects_distances_inside_the_training_posts() {
    let config = SignChainExperiment {
        distances: vec![5],
        ..SignChainExperiment::default()
    };
    assert!(sign_chain_experiment(&config, Execution::default()).is_err());
}

#[test]
fn chain_error_matches_hand_computation() {
    let rows = chain_error_experiment(&ChainErrorExperiment::default()).unwrap();
    assert_eq!(rows.len(), 99);
    assert_eq!(rows[0].n, 2);
    // Two positions, two classes: the abstraction is exact.
    assert_eq!((rows[0].weighted_eps_p, rows[0].max_eps_p), (0.0, 0.0));
    // N = 3: SR weights 0.1 on position 3 and 0.09 on position 2 under "left".
    // The merged class moves to the goal with probability 9/19, so the row
    // errors are 18/19 and 20/19.
    let n3 = &rows[1];
    assert!((n3.weighted_eps_p - 3.6 / 19.0).abs() < 1e-9, "{}", n3.weighted_eps_p);
    assert!((n3.max_eps_p - 20.0 / 19.0).abs() < 1e-9, "{}", n3.max_eps_p);
    for r in &rows {
        assert!(r.weighted_eps_p <= r.max_eps_p);
    }
    assert!(String::from_utf8(csv_bytes(&rows)).unwrap().starts_with("N,weighted_eps_p,max_eps_p\n"));
}

#[test]
fn corollary_grid_has_an_interior_minimum() {
    let config = CorollaryExperiment {
        t_list: vec![10],
        ..CorollaryExperiment::default()
    };
    let rows = corollary_experiment(&config).unwrap();
    assert_eq!(rows.len(), 63);
    assert_eq!(rows[0].s_phi, 2);
    assert!((rows[0].bound - 0.35).abs() < 1e-4);
    let best = rows.iter().min_by(|a, b| a.bound.total_cmp(&b.bound)).unwrap();
    assert!(best.s_phi > 2 && best.s_phi < 64);
    assert!(String::from_utf8(csv_bytes(&rows)).unwrap().starts_with("s_phi,T,eps,B,bound\n"));
}

#[test]
fn csv_round_trip() {
    let rows = warm_cold_experiment(&small_warm_cold(), Execution::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wc.csv");
    assert_eq!(write_csv(&path, &rows).unwrap(), rows.len());
    let back: Vec<WarmColdRow> = read_csv(&path).unwrap();
    assert_eq!(back, rows);
    let missing = read_csv::<WarmColdRow>(&dir.path().join("nope.csv")).unwrap_err();
    assert!(missing.is_io());
}

#[test]
fn run_manifest_records_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_warm_cold();
    let mut manifest = RunManifest::new("warm-cold", Some(config.seed), 2, &config);
    manifest.record("warm_cold.csv", 10);
    manifest.finish(std::time::Duration::from_millis(1500));
    let path = manifest.write(dir.path()).unwrap();
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(value["command"], "warm-cold");
    assert_eq!(value["seed"], 11);
    assert_eq!(value["threads"], 2);
    assert_eq!(value["wall_clock_seconds"], 1.5);
    assert_eq!(value["files"][0]["rows"], 10);
    assert_eq!(value["config"]["walks"], 2);
    assert!(value["version"].as_str().unwrap().starts_with("abx v"));
}

#[test]
fn config_round_trips_through_toml() {
    let config = ExperimentConfig::default();
    let text = toml::to_string(&config).unwrap();
    assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), config);

    let partial = ExperimentConfig::from_toml_str("[warm_cold]\nwalks = 3\nk_list = [1, 4]\n").unwrap();
    assert_eq!(partial.warm_cold.walks, 3);
    assert_eq!(partial.warm_cold.k_list, vec![1, 4]);
    assert_eq!(partial.sign_chain, SignChainExperiment::default());

    assert!(ExperimentConfig::from_toml_str("[warm_cold]\nwalkz = 3\n").is_err());
    assert!(ExperimentConfig::from_toml_str("[warm_cold]\nk_list = []\n").is_err());
    assert!(ExperimentConfig::from_toml_str("[verify_bounds]\ntrials = 0\n").is_err());
}

#[test]
fn summaries() {
    let m = MeanSem::of([1.0, 2.0, 3.0, 4.0]);
    assert_eq!(m.n, 4);
    assert_eq!(m.mean, 2.5);
    assert!((m.sem - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    assert_eq!(MeanSem::of([7.0]).sem, 0.0);

    let row = |d, k, total| WarmColdRow {
        goal_distance: d,
        suffix_k: k,
        start_x: 0,
        start_y: d as i64,
        repeat: 0,
        steps: 0,
        reached_goal: true,
        mistakes_total: total,
        mistakes_known_key: total,
        mistakes_missing_key: 0,
        seed: 1,
    };
    let s = WarmColdSummary::from_rows(&[row(5, 1, 4), row(5, 2, 3), row(5, 3, 3), row(9, 1, 1)]);
    assert_eq!(s.best_k(5), Some(2));
    assert_eq!(s.best_k(9), Some(1));
    assert_eq!(s.best_k(7), None);
    assert_eq!(s.at_distance(5).len(), 3);
    assert_eq!(s.cell(5, 3).unwrap().total.mean, 3.0);
}
