use rand::distributions::{Distribution, WeightedIndex};
use rand_distr::Dirichlet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;

/// Expected number of never-sampled indices after `t` draws from a flat
/// Dirichlet over `n` outcomes: `n (n − 1) / (t + n − 1)`.
pub fn unknown_mass_formula(n: usize, t: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / (t as f64 + n - 1.0)
}

/// Monte-Carlo estimate next to the closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletCheck {
    pub n: usize,
    pub t: usize,
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
    pub formula: f64,
}

impl DirichletCheck {
    /// Distance between estimate and formula in standard errors.
    pub fn z_score(&self) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == self.formula {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - self.formula).abs() / self.std_error
        }
    }
}

/// Draws `p ~ Dirichlet(1, ..., 1)`, samples `t` indices from `p` with
/// replacement and counts the indices never drawn, `samples` times.
pub fn dirichlet_unknown_mass_check(n: usize, t: usize, samples: usize, seed: u64) -> Result<DirichletCheck> {
    if n < 2 {
        return Err(Error::Config(format!("the Dirichlet check needs n >= 2, got {n}")));
    }
    if samples < 10_000 {
        return Err(Error::Config(format!("the Dirichlet check needs at least 10^4 samples, got {samples}")));
    }
    let dirichlet = Dirichlet::new(&vec![1.0; n]).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = rng_for(&[seed, n as u64, t as u64]);
    let mut seen = vec![false; n];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let p: Vec<f64> = dirichlet.sample(&mut rng);
        seen.iter_mut().for_each(|s| *s = false);
        if t > 0 {
            let index = WeightedIndex::new(&p).map_err(|e| Error::Config(e.to_string()))?;
            for _ in 0..t {
                seen[index.sample(&mut rng)] = true;
            }
        }
        let unseen = seen.iter().filter(|s| !**s).count() as f64;
        sum += unseen;
        sum_sq += unseen * unseen;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(DirichletCheck {
        n,
        t,
        samples,
        seed,
        mean,
        std_error: (var / m).sqrt(),
        formula: unknown_mass_formula(n, t),
    })
}
