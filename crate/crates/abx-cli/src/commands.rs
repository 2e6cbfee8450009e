use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use abx::envs::InitialObservation;
use abx::experiments::output::{ensure_dir, write_csv, write_json, RunManifest};
use abx::experiments::{
    chain_error_experiment, corollary_experiment, sign_chain_experiment, sign_chain_summary, verify_bounds_suite,
    warm_cold_experiment, ExperimentConfig, WarmColdSummary,
};
use abx::par::{self, Execution};
use abx::Error;

use crate::args::{ChainErrorArgs, Cli, Command, CorollaryArgs, InitialObs, SignChainArgs, VerifyArgs, WarmColdArgs};

/// Why a run failed, with the process exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Invalid input or a failed computation.
    Validation(String),
    /// At least one bound or identity check failed.
    Violation(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Violation(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Violation(m) | Failure::Io(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

/// Output directory: `ABX_OUT`, then `--out`, then `runs/<command>`.
fn output_dir(command: &Command) -> PathBuf {
    match std::env::var_os("ABX_OUT") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => command
            .out()
            .out
            .clone()
            .unwrap_or_else(|| Path::new("runs").join(command.name())),
    }
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::default(),
    };
    let dir = output_dir(&cli.command);
    let threads = cli.threads;
    let started = Instant::now();
    let command = cli.command;
    par::with_threads(threads, move || {
        let exec = Execution::default();
        ensure_dir(&dir)?;
        let mut manifest = match &command {
            Command::WarmCold(args) => warm_cold(&mut config, args, &dir, exec)?,
            Command::SignChain(args) => sign_chain(&mut config, args, &dir, exec)?,
            Command::ChainError(args) => chain_error(&mut config, args, &dir)?,
            Command::Corollary(args) => corollary(&mut config, args, &dir)?,
            Command::VerifyBounds(args) => return verify(&mut config, args, &dir, exec, started),
        };
        manifest.threads = par::workers(exec);
        manifest.finish(started.elapsed());
        let path = manifest.write(&dir)?;
        println!("{}: run manifest, {:.2} s", path.display(), manifest.wall_clock_seconds);
        Ok(())
    })
}

fn warm_cold(config: &mut ExperimentConfig, args: &WarmColdArgs, dir: &Path, exec: Execution) -> Result<RunManifest, Failure> {
    let c = &mut config.warm_cold;
    if let Some(r) = args.train_radius {
        c.env.train_radius = r;
    }
    if let Some(k) = &args.k {
        c.k_list = k.0.clone();
    }
    if let Some(d) = &args.distances {
        c.env.distances = d.0.clone();
    }
    if let Some(w) = args.walks {
        c.walks = w;
    }
    if let Some(m) = args.max_steps {
        c.max_steps = m;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(h) = args.dictionary_horizon {
        c.dictionary_horizon = Some(h);
    }
    if let Some(o) = args.initial_observation {
        c.env.initial_observation = match o {
            InitialObs::Start => InitialObservation::Start,
            InitialObs::Cold => InitialObservation::Cold,
        };
    }
    let rows = warm_cold_experiment(c, exec)?;
    let path = dir.join("warm_cold.csv");
    let n = write_csv(&path, &rows)?;
    let summary = WarmColdSummary::from_rows(&rows);
    let best: Vec<String> = c
        .env
        .distances
        .iter()
        .filter_map(|&d| {
            let k = summary.best_k(d)?;
            let mean = summary.cell(d, k)?.total.mean;
            Some(format!("d={d}: k={k} ({mean:.2})"))
        })
        .collect();
    println!("{}: {n} rows; best k by mean mistakes {}", path.display(), best.join(", "));
    let mut manifest = RunManifest::new("warm-cold", Some(c.seed), 0, c);
    manifest.record("warm_cold.csv", n);
    Ok(manifest)
}

fn sign_chain(config: &mut ExperimentConfig, args: &SignChainArgs, dir: &Path, exec: Execution) -> Result<RunManifest, Failure> {
    let c = &mut config.sign_chain;
    if let Some(t) = args.train_offsets {
        c.env.train_offsets = t;
    }
    if let Some(d) = &args.distances {
        c.distances = d.0.clone();
    }
    if let Some(r) = args.repeats {
        c.repeats = r;
    }
    if let Some(m) = args.max_steps {
        c.max_steps = m;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(h) = args.dictionary_horizon {
        c.dictionary_horizon = h;
    }
    let rows = sign_chain_experiment(c, exec)?;
    let path = dir.join("sign_chain.csv");
    let n = write_csv(&path, &rows)?;
    let means: Vec<String> = sign_chain_summary(&rows)
        .into_iter()
        .filter(|cell| cell.distance == *c.distances.iter().max().expect("validated non-empty"))
        .map(|cell| format!("{} {:.3}", cell.abstraction, cell.ratio.mean))
        .collect();
    println!(
        "{}: {n} rows; mean ratio at distance {}: {}",
        path.display(),
        c.distances.iter().max().expect("validated non-empty"),
        means.join(", ")
    );
    let mut manifest = RunManifest::new("sign-chain", Some(c.seed), 0, c);
    manifest.record("sign_chain.csv", n);
    Ok(manifest)
}

fn chain_error(config: &mut ExperimentConfig, args: &ChainErrorArgs, dir: &Path) -> Result<RunManifest, Failure> {
    let c = &mut config.chain_error;
    if let Some(l) = &args.lengths {
        c.lengths = l.0.clone();
    }
    if let Some(p) = args.success_prob {
        c.success_prob = p;
    }
    if let Some(g) = args.discount {
        c.discount = g;
    }
    let rows = chain_error_experiment(c)?;
    let path = dir.join("chain_error.csv");
    let n = write_csv(&path, &rows)?;
    let above = rows.iter().filter(|r| r.max_eps_p > 1.0).count();
    let dominated = rows.iter().all(|r| r.weighted_eps_p <= r.max_eps_p);
    println!(
        "{}: {n} rows; max-norm error above 1 for {above} lengths; weighted <= max-norm everywhere: {dominated}",
        path.display()
    );
    let mut manifest = RunManifest::new("chain-error", None, 0, c);
    manifest.record("chain_error.csv", n);
    Ok(manifest)
}

fn corollary(config: &mut ExperimentConfig, args: &CorollaryArgs, dir: &Path) -> Result<RunManifest, Failure> {
    let c = &mut config.corollary;
    if let Some(t) = &args.t {
        c.t_list = t.0.clone();
    }
    if let Some(e) = args.eps {
        c.eps = e;
    }
    if let Some(b) = args.b {
        c.b = b;
    }
    if let Some(a) = args.actions {
        c.n_actions = a;
    }
    if let Some(s) = &args.s_phi {
        c.s_phi = s.0.clone();
    }
    let rows = corollary_experiment(c)?;
    let path = dir.join("corollary.csv");
    let n = write_csv(&path, &rows)?;
    let minima: Vec<String> = c
        .t_list
        .iter()
        .filter_map(|&t| {
            rows.iter()
                .filter(|r| r.t == t)
                .min_by(|a, b| a.bound.total_cmp(&b.bound))
                .map(|r| format!("T={t}: |S|={} ({:.4})", r.s_phi, r.bound))
        })
        .collect();
    println!("{}: {n} rows (bound shape, not a certified constant); minima {}", path.display(), minima.join(", "));
    let mut manifest = RunManifest::new("corollary", None, 0, c);
    manifest.record("corollary.csv", n);
    Ok(manifest)
}

fn verify(
    config: &mut ExperimentConfig,
    args: &VerifyArgs,
    dir: &Path,
    exec: Execution,
    started: Instant,
) -> Result<(), Failure> {
    let c = &mut config.verify_bounds;
    if let Some(t) = args.trials {
        c.trials = t;
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(i) = args.identity_instances {
        c.identity_instances = i;
    }
    if let Some(n) = args.dirichlet_samples {
        c.dirichlet_samples = n;
    }
    let report = verify_bounds_suite(c, exec)?;
    let path = dir.join("report.json");
    write_json(&path, &report)?;
    let checks: usize = report.bounds.iter().map(|s| s.checks).sum();
    let min_slack = report.bounds.iter().map(|s| s.min_slack).fold(f64::INFINITY, f64::min);
    println!(
        "{}: {} bound suites ({checks} checks, min slack {min_slack:.3e}), {} identity suites, {} unknown-mass checks; {} violations",
        path.display(),
        report.bounds.len(),
        report.identities.len(),
        report.dirichlet.len(),
        report.violations()
    );
    let mut manifest = RunManifest::new("verify-bounds", Some(c.seed), par::workers(exec), c);
    manifest.record("report.json", report.bounds.len() + report.identities.len() + report.dirichlet.len());
    manifest.finish(started.elapsed());
    let manifest_path = manifest.write(dir)?;
    println!("{}: run manifest, {:.2} s", manifest_path.display(), manifest.wall_clock_seconds);
    if report.passed {
        return Ok(());
    }
    for suite in report.bounds.iter().filter(|s| s.violations > 0) {
        let examples = serde_json::to_string(&suite.counterexamples).unwrap_or_default();
        eprintln!("{}: {} violations; counterexamples {examples}", suite.suite, suite.violations);
    }
    for suite in report.identities.iter().filter(|s| s.failures > 0) {
        eprintln!("{}: {} failures, max deviation {:e}", suite.suite, suite.failures, suite.max_deviation);
    }
    for d in report.dirichlet.iter().filter(|d| !d.passed) {
        eprintln!("unknown mass n={} T={}: z = {:.2}", d.check.n, d.check.t, d.z);
    }
    Err(Failure::Violation(format!("{} checks failed; see {}", report.violations(), path.display())))
}
