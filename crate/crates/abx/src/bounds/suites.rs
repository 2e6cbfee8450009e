use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abstraction::{build_abstract_mdp, KeyKind};
use crate::error::Result;
use crate::par::{self, Execution};
use crate::seed::{derive_seed, hash_str, rng_for};
use crate::tabular::{
    normalized_sr, optimal_policy, sparse_row_l1_distance, FiniteMrp, Policy, SparseRow, SrKind,
};

use super::analysis::{
    finite_learning_report, model_reduction_bound, ood_generalization_analysis, telescoping_gap_bound,
    SrChoice, EXACT_TOL,
};
use super::formulas::{mrp_value_loss_bound, simulation_lemma_bound, LearningOutcome};
use super::random::{
    perturb_mdp, random_abstraction, random_distribution, random_mdp, random_policy, random_pomdp,
};
use super::report::{BoundComponents, BoundReport};

/// The randomized inequality suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSuite {
    SimulationLemma,
    MrpValueLoss,
    Telescoping,
    ModelReduction,
    OodGeneralization,
    FiniteLearning,
}

impl BoundSuite {
    pub const ALL: [BoundSuite; 6] = [
        BoundSuite::SimulationLemma,
        BoundSuite::MrpValueLoss,
        BoundSuite::Telescoping,
        BoundSuite::ModelReduction,
        BoundSuite::OodGeneralization,
        BoundSuite::FiniteLearning,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BoundSuite::SimulationLemma => "simulation_lemma",
            BoundSuite::MrpValueLoss => "mrp_value_loss",
            BoundSuite::Telescoping => "telescoping",
            BoundSuite::ModelReduction => "model_reduction",
            BoundSuite::OodGeneralization => "ood_generalization",
            BoundSuite::FiniteLearning => "finite_learning",
        }
    }
}

/// Seed of trial `trial` in `suite` under suite seed `seed`.
pub fn trial_seed(seed: u64, suite: BoundSuite, trial: usize) -> u64 {
    derive_seed(&[seed, hash_str(suite.name()), trial as u64])
}

/// A trial whose gap exceeded its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub trial_seed: u64,
    pub bound: f64,
    pub gap: f64,
    pub detail: String,
}

/// Aggregate outcome of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    /// Individual inequality checks; some trials check more than one.
    pub checks: usize,
    pub violations: usize,
    pub min_slack: f64,
    pub max_slack: f64,
    /// Largest ground state count among the trials.
    pub max_states: usize,
    pub counterexamples: Vec<Counterexample>,
}

struct Trial {
    reports: Vec<BoundReport>,
    states: usize,
    detail: String,
}

const MAX_COUNTEREXAMPLES: usize = 5;

/// Runs `trials` random instances of `suite`; trial `i` draws from its own
/// stream seeded by [`trial_seed`].
pub fn run_bound_suite(suite: BoundSuite, seed: u64, trials: usize, exec: Execution) -> Result<SuiteReport> {
    let outcomes = par::map_range(exec, trials, |i| {
        let mut rng = rng_for(&[trial_seed(seed, suite, i)]);
        run_trial(suite, &mut rng)
    });
    let mut report = SuiteReport {
        suite: suite.name().to_string(),
        seed,
        trials,
        checks: 0,
        violations: 0,
        min_slack: f64::INFINITY,
        max_slack: f64::NEG_INFINITY,
        max_states: 0,
        counterexamples: Vec::new(),
    };
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let trial = outcome?;
        report.max_states = report.max_states.max(trial.states);
        for r in trial.reports {
            report.checks += 1;
            report.min_slack = report.min_slack.min(r.slack);
            report.max_slack = report.max_slack.max(r.slack);
            if !r.holds {
                report.violations += 1;
                if report.counterexamples.len() < MAX_COUNTEREXAMPLES {
                    report.counterexamples.push(Counterexample {
                        trial: i,
                        trial_seed: trial_seed(seed, suite, i),
                        bound: r.bound_value,
                        gap: r.empirical_gap,
                        detail: trial.detail.clone(),
                    });
                }
            }
        }
    }
    Ok(report)
}

fn run_trial(suite: BoundSuite, rng: &mut ChaCha8Rng) -> Result<Trial> {
    match suite {
        BoundSuite::SimulationLemma => simulation_trial(rng),
        BoundSuite::MrpValueLoss => mrp_trial(rng),
        BoundSuite::Telescoping => telescoping_trial(rng),
        BoundSuite::ModelReduction => reduction_trial(rng),
        BoundSuite::OodGeneralization => ood_trial(rng),
        BoundSuite::FiniteLearning => learning_trial(rng),
    }
}

fn weighted_gap(d0: &[f64], v: &[f64], w: &[f64]) -> f64 {
    d0.iter().zip(v.iter().zip(w)).map(|(p, (a, b))| p * (a - b).abs()).sum()
}

fn mrp_errors(a: &FiniteMrp, b: &FiniteMrp, weights: &[f64]) -> (f64, f64) {
    let mut eps_r = 0.0;
    let mut eps_p = 0.0;
    for (s, &w) in weights.iter().enumerate() {
        eps_r += w * (a.rewards()[s] - b.rewards()[s]).abs();
        eps_p += w * sparse_row_l1_distance(&a.transitions()[s], &b.transitions()[s]);
    }
    (eps_r, eps_p)
}

fn value_loss_report(eps_r: f64, eps_p: f64, gamma: f64, v_max: f64, gap: f64) -> BoundReport {
    let components = BoundComponents {
        reward_approx: eps_r / (1.0 - gamma),
        transition_approx: 0.5 * gamma * v_max * eps_p / (1.0 - gamma),
        ..BoundComponents::default()
    };
    BoundReport::with_value(simulation_lemma_bound(eps_r, eps_p, gamma, v_max), components, gap)
}

fn simulation_trial(rng: &mut ChaCha8Rng) -> Result<Trial> {
    let n = rng.gen_range(2..=12);
    let na = rng.gen_range(1..=3);
    let gamma = rng.gen_range(0.3..0.95);
    let scale = rng.gen_range(0.0..0.6);
    let m = random_mdp(rng, n, na, gamma)?;
    let m_hat = perturb_mdp(rng, &m, scale)?;
    let pi = random_policy(rng, n, na);
    let d0 = random_distribution(rng, n);
    let (mrp, mrp_hat) = (m.mrp(&pi)?, m_hat.mrp(&pi)?);
    let (v, v_hat) = (mrp.evaluate(EXACT_TOL)?, mrp_hat.evaluate(EXACT_TOL)?);
    let d_hat = normalized_sr(&m_hat, &pi, &d0, SrKind::State, EXACT_TOL)?;
    let (eps_r, eps_p) = mrp_errors(&mrp, &mrp_hat, &d_hat);
    let gap = weighted_gap(&d0, &v, &v_hat);
    Ok(Trial {
        reports: vec![value_loss_report(eps_r, eps_p, gamma, m.v_max(), gap)],
        states: n,
        detail: format!("n={n} actions={na} gamma={gamma:.4} perturbation={scale:.4}"),
    })
}

fn random_mrp(rng: &mut ChaCha8Rng, n: usize, gamma: f64) -> Result<FiniteMrp> {
    let rows: Vec<SparseRow> = (0..n)
        .map(|_| random_distribution(rng, n).into_iter().enumerate().filter(|&(_, p)| p > 0.0).collect())
        .collect();
    let rewards = (0..n).map(|_| rng.gen::<f64>()).collect();
    FiniteMrp::new(rows, rewards, gamma, 1.0)
}

fn mrp_trial(rng: &mut ChaCha8Rng) -> Result<Trial> {
    let n = rng.gen_range(1..=12);
    let gamma = rng.gen_range(0.3..0.95);
    let a = random_mrp(rng, n, gamma)?;
    let b = random_mrp(rng, n, gamma)?;
    let d0 = random_distribution(rng, n);
    let (va, vb) = (a.evaluate(EXACT_TOL)?, b.evaluate(EXACT_TOL)?);
    let d = a.state_sr(&d0, EXACT_TOL)?;
    let (eps_r, eps_p) = mrp_errors(&a, &b, &d);
    let gap = weighted_gap(&d0, &va, &vb);
    let mut report = value_loss_report(eps_r, eps_p, gamma, a.v_max(), gap);
    report.bound_value = mrp_value_loss_bound(eps_r, eps_p, gamma, a.v_max());
    Ok(Trial {
        reports: vec![report],
        states: n,
        detail: format!("n={n} gamma={gamma:.4}"),
    })
}

fn telescoping_trial(rng: &mut ChaCha8Rng) -> Result<Trial> {
    let n = rng.gen_range(2..=12);
    let na = rng.gen_range(2..=3);
    let gamma = rng.gen_range(0.3..0.95);
    let m = random_mdp(rng, n, na, gamma)?;
    let v_max = m.v_max();
    let f: Vec<f64> = (0..n * na).map(|_| rng.gen_range(-0.5 * v_max..1.5 * v_max)).collect();
    let pi = random_policy(rng, n, na);
    let d0 = random_distribution(rng, n);
    Ok(Trial {
        reports: vec![telescoping_gap_bound(&m, &f, &pi, &d0)?],
        states: n,
        detail: format!("n={n} actions={na} gamma={gamma:.4}"),
    })
}

fn reduction_trial(rng: &mut ChaCha8Rng) -> Result<Trial> {
    let n = rng.gen_range(2..=12);
    let na = rng.gen_range(2..=3);
    let gamma = rng.gen_range(0.3..0.95);
    let classes = rng.gen_range(1..=n);
    let ground = random_mdp(rng, n, na, gamma)?;
    let phi = random_abstraction(rng, n, classes);
    let behaviour = random_policy(rng, n, na);
    let d_build = random_distribution(rng, n);
    let weights = normalized_sr(&ground, &behaviour, &d_build, SrKind::StateAction, EXACT_TOL)?;
    let abstract_mdp = build_abstract_mdp(&ground, &phi, &weights)?;
    let d0 = random_distribution(rng, n);
    Ok(Trial {
        reports: vec![model_reduction_bound(&ground, &abstract_mdp, &d0)?],
        states: n,
        detail: format!("n={n} actions={na} classes={} gamma={gamma:.4}", phi.n_abstract()),
    })
}

fn ood_trial(rng: &mut ChaCha8Rng) -> Result<Trial> {
    let n = rng.gen_range(2..=6);
    let n_obs = rng.gen_range(2..=3);
    let gamma = rng.gen_range(0.5..0.9);
    let horizon = rng.gen_range(2..=3);
    let pomdp = random_pomdp(rng, n, 2, n_obs, gamma)?;
    let train = pomdp.start_list(&random_distribution(rng, n));
    let test = pomdp.start_list(&random_distribution(rng, n));
    let kind = match rng.gen_range(0..6) {
        k @ 0..=3 => KeyKind::Suffix(k),
        4 => KeyKind::FirstObservation,
        _ => KeyKind::FullHistory,
    };
    let analysis = ood_generalization_analysis(&pomdp, &train, &test, kind, horizon)?;
    Ok(Trial {
        reports: vec![analysis.report],
        states: pomdp.n_states(),
        detail: format!(
            "latent={n} observations={n_obs} gamma={gamma:.4} horizon={horizon} key={kind:?} histories={}/{}",
            analysis.train_histories, analysis.test_histories
        ),
    })
}

fn learning_trial(rng: &mut ChaCha8Rng) -> Result<Trial> {
    let n = 6;
    let na = rng.gen_range(2..=3);
    let gamma = rng.gen_range(0.3..0.95);
    let m = random_mdp(rng, n, na, gamma)?;
    let pi_star = optimal_policy(&m, EXACT_TOL)?.policy;
    let epsilon = rng.gen_range(0.0..0.5);
    let observed: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        if observed.contains(&s) {
            let u = random_distribution(rng, na);
            rows.push(pi_star.row(s).iter().zip(&u).map(|(p, q)| (1.0 - 0.5 * epsilon) * p + 0.5 * epsilon * q).collect());
        } else {
            rows.push(random_distribution(rng, na));
        }
    }
    let outcome = LearningOutcome::new(observed, epsilon, Policy::new(na, rows)?)?;
    let d0 = random_distribution(rng, n);
    let reports = vec![
        finite_learning_report(&m, &outcome, &d0, SrChoice::Optimal)?,
        finite_learning_report(&m, &outcome, &d0, SrChoice::Learned)?,
    ];
    Ok(Trial {
        reports,
        states: n,
        detail: format!(
            "actions={na} gamma={gamma:.4} epsilon={epsilon:.4} observed={:?}",
            outcome.observed()
        ),
    })
}

