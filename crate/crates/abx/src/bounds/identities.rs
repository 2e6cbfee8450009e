//! Randomized checks of the norm and projection identities the bounds rely on.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::abstraction::{down_project_vec, up_project_dist, up_project_row, up_project_sa_dist, AbstractionFn};
use crate::error::Result;
use crate::seed::{derive_seed, hash_str, rng_for};
use crate::tabular::{weighted_l1_norm_vec, SparseRow};

use super::random::{random_abstraction, random_distribution};

/// Absolute tolerance of every identity check.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentitySuite {
    /// Positivity, absolute homogeneity and the triangle inequality of `‖·‖_d`.
    NormAxioms,
    /// `Σ_i p(i) ‖v‖_{P(i)} = ‖v‖_{pᵀP}`.
    PushForward,
    /// `|vᵀw| ≤ ‖w‖_∞ ‖v‖_1`.
    Holder,
    /// Linearity of both projections.
    ProjectionAssociativity,
    /// `‖Φ↓v − Φ↓v'‖_p = ‖v − v'‖_{Φ↑p}`.
    NormProjection,
    /// `P(i)·(Φ↓x) = (Φ↑P(i))·x`.
    UpDown,
}

impl IdentitySuite {
    pub const ALL: [IdentitySuite; 6] = [
        IdentitySuite::NormAxioms,
        IdentitySuite::PushForward,
        IdentitySuite::Holder,
        IdentitySuite::ProjectionAssociativity,
        IdentitySuite::NormProjection,
        IdentitySuite::UpDown,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentitySuite::NormAxioms => "norm_axioms",
            IdentitySuite::PushForward => "push_forward",
            IdentitySuite::Holder => "holder",
            IdentitySuite::ProjectionAssociativity => "projection_associativity",
            IdentitySuite::NormProjection => "norm_projection",
            IdentitySuite::UpDown => "up_down",
        }
    }
}

/// Outcome of one identity suite. Inequalities report how far they were
/// exceeded, equalities the absolute difference of both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub suite: String,
    pub instances: usize,
    pub seed: u64,
    pub max_deviation: f64,
    /// Instances whose deviation exceeded [`IDENTITY_TOL`].
    pub failures: usize,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub fn run_identity_suite(suite: IdentitySuite, seed: u64, instances: usize) -> Result<IdentityReport> {
    let mut max_deviation: f64 = 0.0;
    let mut failures = 0;
    for i in 0..instances {
        let mut rng = rng_for(&[derive_seed(&[seed, hash_str(suite.name()), i as u64])]);
        let deviation = match suite {
            IdentitySuite::NormAxioms => norm_axioms(&mut rng)?,
            IdentitySuite::PushForward => push_forward(&mut rng)?,
            IdentitySuite::Holder => holder(&mut rng),
            IdentitySuite::ProjectionAssociativity => associativity(&mut rng)?,
            IdentitySuite::NormProjection => norm_projection(&mut rng)?,
            IdentitySuite::UpDown => up_down(&mut rng)?,
        };
        if deviation.is_nan() || deviation > IDENTITY_TOL {
            failures += 1;
        }
        max_deviation = max_deviation.max(deviation);
    }
    Ok(IdentityReport {
        suite: suite.name().to_string(),
        instances,
        seed,
        max_deviation,
        failures,
    })
}

fn vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sparse(v: &[f64]) -> SparseRow {
    v.iter().copied().enumerate().filter(|&(_, p)| p > 0.0).collect()
}

fn norm_axioms(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.gen_range(1..=12);
    let d = random_distribution(rng, n);
    let (v, w) = (vector(rng, n), vector(rng, n));
    let c = rng.gen_range(-3.0..3.0);
    let norm = |x: &[f64]| weighted_l1_norm_vec(&d, x);
    let sum: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
    let scaled: Vec<f64> = v.iter().map(|a| c * a).collect();
    let triangle = norm(&sum)? - norm(&v)? - norm(&w)?;
    let homogeneity = (norm(&scaled)? - c.abs() * norm(&v)?).abs();
    let positivity = -norm(&v)?;
    let zero = norm(&vec![0.0; n])?.abs();
    Ok(triangle.max(homogeneity).max(positivity).max(zero).max(0.0))
}

fn push_forward(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.gen_range(1..=12);
    let m = rng.gen_range(1..=12);
    let p = random_distribution(rng, n);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| random_distribution(rng, m)).collect();
    let v = vector(rng, m);
    let mut pushed = vec![0.0; m];
    let mut lhs = 0.0;
    for (pi, row) in p.iter().zip(&rows) {
        lhs += pi * weighted_l1_norm_vec(row, &v)?;
        for (acc, x) in pushed.iter_mut().zip(row) {
            *acc += pi * x;
        }
    }
    Ok((lhs - weighted_l1_norm_vec(&pushed, &v)?).abs())
}

fn holder(rng: &mut ChaCha8Rng) -> f64 {
    let n = rng.gen_range(1..=12);
    let (v, w) = (vector(rng, n), vector(rng, n));
    let sup = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    (dot(&v, &w).abs() - sup * l1).max(0.0)
}

fn abstraction(rng: &mut ChaCha8Rng) -> AbstractionFn {
    let n = rng.gen_range(1..=12);
    let m = rng.gen_range(1..=n);
    random_abstraction(rng, n, m)
}

fn associativity(rng: &mut ChaCha8Rng) -> Result<f64> {
    let phi = abstraction(rng);
    let na = rng.gen_range(1..=3);
    let len = phi.n_abstract() * na;
    let (v, w) = (vector(rng, len), vector(rng, len));
    let alpha = rng.gen_range(-3.0..3.0);
    let down = |x: &[f64]| down_project_vec(&phi, na, x);

    let scaled: Vec<f64> = v.iter().map(|x| alpha * x).collect();
    let sum: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + b).collect();
    let (dv, dw) = (down(&v)?, down(&w)?);
    let mut deviation = max_abs_diff(&down(&scaled)?, &dv.iter().map(|x| alpha * x).collect::<Vec<_>>());
    let dsum: Vec<f64> = dv.iter().zip(&dw).map(|(a, b)| a + b).collect();
    deviation = deviation.max(max_abs_diff(&down(&sum)?, &dsum));

    let n = phi.n_ground() * na;
    let (p, q) = (vector(rng, n), vector(rng, n));
    let up = |x: &[f64]| up_project_sa_dist(&phi, na, x);
    let (up_p, up_q) = (up(&p)?, up(&q)?);
    let scaled: Vec<f64> = p.iter().map(|x| alpha * x).collect();
    let sum: Vec<f64> = p.iter().zip(&q).map(|(a, b)| a + b).collect();
    deviation = deviation.max(max_abs_diff(&up(&scaled)?, &up_p.iter().map(|x| alpha * x).collect::<Vec<_>>()));
    let usum: Vec<f64> = up_p.iter().zip(&up_q).map(|(a, b)| a + b).collect();
    Ok(deviation.max(max_abs_diff(&up(&sum)?, &usum)))
}

fn norm_projection(rng: &mut ChaCha8Rng) -> Result<f64> {
    let phi = abstraction(rng);
    let na = rng.gen_range(1..=3);
    let len = phi.n_abstract() * na;
    let (v, w) = (vector(rng, len), vector(rng, len));
    let p = random_distribution(rng, phi.n_ground() * na);
    let (dv, dw) = (down_project_vec(&phi, na, &v)?, down_project_vec(&phi, na, &w)?);
    let ground_diff: Vec<f64> = dv.iter().zip(&dw).map(|(a, b)| a - b).collect();
    let abstract_diff: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a - b).collect();
    let lhs = weighted_l1_norm_vec(&p, &ground_diff)?;
    let rhs = weighted_l1_norm_vec(&up_project_sa_dist(&phi, na, &p)?, &abstract_diff)?;
    Ok((lhs - rhs).abs())
}

fn up_down(rng: &mut ChaCha8Rng) -> Result<f64> {
    let phi = abstraction(rng);
    let row = random_distribution(rng, phi.n_ground());
    let x = vector(rng, phi.n_abstract());
    let lhs = dot(&row, &down_project_vec(&phi, 1, &x)?);
    let sparse_rhs: f64 = up_project_row(&phi, &sparse(&row)).iter().map(|&(c, p)| p * x[c]).sum();
    let dense_rhs = dot(&up_project_dist(&phi, &row)?, &x);
    Ok((lhs - sparse_rhs).abs().max((lhs - dense_rhs).abs()))
}
