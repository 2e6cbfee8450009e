use abx::abstraction::KeyKind;
use abx::bounds::{run_bound_suite, BoundSuite};
use abx::envs::{WarmCold, WarmColdConfig};
use abx::experiments::{build_policy_dictionary, run_rollouts, RolloutPolicy, RolloutSpec, DEFAULT_DICTIONARY_CAP};
use abx::par::Execution;
use abx::pomdp::enumerate_histories_capped;
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn rollouts(c: &mut Criterion) {
    let env = WarmCold::new(WarmColdConfig::default()).unwrap();
    let starts = WarmCold::diamond(50);
    let dict = build_policy_dictionary(
        &env,
        &env.training_starts(),
        4,
        KeyKind::Suffix(4),
        DEFAULT_DICTIONARY_CAP,
        Execution::Parallel,
    )
    .unwrap();
    let spec = RolloutSpec {
        walks_per_start: 2,
        max_steps: 500,
        seed: 1,
        stream: 0,
    };
    let mut group = c.benchmark_group("rollouts");
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_rollouts(&env, RolloutPolicy::Dictionary(&dict), black_box(&starts), &spec, exec))
        });
    }
    group.finish();
}

fn dictionary(c: &mut Criterion) {
    let env = WarmCold::new(WarmColdConfig::default()).unwrap();
    let starts = env.training_starts();
    let mut group = c.benchmark_group("dictionary");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| build_policy_dictionary(&env, &starts, 6, KeyKind::Suffix(6), DEFAULT_DICTIONARY_CAP, exec))
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let env = WarmCold::new(WarmColdConfig::default()).unwrap();
    let starts: Vec<_> = env.training_starts().into_iter().map(|s| (s, 1.0 / 24.0)).collect();
    let mut group = c.benchmark_group("enumeration");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| enumerate_histories_capped(&env, black_box(&starts), 5, 10_000_000, exec))
        });
    }
    group.finish();
}

fn bound_suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("model_reduction_suite");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_bound_suite(BoundSuite::ModelReduction, 1, 100, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, rollouts, dictionary, enumeration, bound_suites);
criterion_main!(benches);
