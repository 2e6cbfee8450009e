use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::envs::{SignChainConfig, WarmColdConfig};
use crate::error::{Error, Result};

/// Warm-cold generalization sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarmColdExperiment {
    /// Lattice parameters; `env.distances` lists the test goal distances.
    pub env: WarmColdConfig,
    /// Suffix lengths to evaluate.
    pub k_list: Vec<usize>,
    pub walks: usize,
    pub max_steps: usize,
    pub seed: u64,
    /// History length enumerated when building a dictionary. By default a
    /// suffix-`k` dictionary enumerates histories up to length `k`.
    pub dictionary_horizon: Option<usize>,
}

impl Default for WarmColdExperiment {
    fn default() -> Self {
        Self {
            env: WarmColdConfig::default(),
            k_list: (1..=10).collect(),
            walks: 5,
            max_steps: 500,
            seed: 7,
            dictionary_horizon: None,
        }
    }
}

/// Sign-chain generalization sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignChainExperiment {
    /// Training posts and rewards; the test offsets are replaced by each distance.
    pub env: SignChainConfig,
    /// Distances of both test posts from the goal.
    pub distances: Vec<u32>,
    pub repeats: usize,
    pub max_steps: usize,
    pub seed: u64,
    pub dictionary_horizon: usize,
}

impl Default for SignChainExperiment {
    fn default() -> Self {
        Self {
            env: SignChainConfig::default(),
            distances: vec![6, 8, 10, 15, 20, 30, 40, 50],
            repeats: 5,
            max_steps: 500,
            seed: 7,
            dictionary_horizon: 10,
        }
    }
}

/// Transition error of the two-state chain abstraction over chain lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainErrorExperiment {
    pub lengths: Vec<usize>,
    pub success_prob: f64,
    pub discount: f64,
}

impl Default for ChainErrorExperiment {
    fn default() -> Self {
        Self {
            lengths: (2..=100).collect(),
            success_prob: 1.0,
            discount: 0.9,
        }
    }
}

/// Grid of the abstract-state-space trade-off expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorollaryExperiment {
    pub t_list: Vec<usize>,
    pub eps: f64,
    pub b: f64,
    pub n_actions: usize,
    pub s_phi: Vec<usize>,
}

impl Default for CorollaryExperiment {
    fn default() -> Self {
        Self {
            t_list: vec![10, 100],
            eps: 0.01,
            b: 0.0,
            n_actions: 2,
            s_phi: (2..=64).collect(),
        }
    }
}

/// Randomized verification of every bound and identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyExperiment {
    pub seed: u64,
    /// Trials per bound suite.
    pub trials: usize,
    /// Instances per identity suite.
    pub identity_instances: usize,
    pub dirichlet_samples: usize,
    /// `(n, T)` pairs of the unknown-mass check.
    pub dirichlet_cases: Vec<(usize, usize)>,
    /// Allowed |z| of the unknown-mass check.
    pub dirichlet_z: f64,
}

impl Default for VerifyExperiment {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 500,
            identity_instances: 500,
            dirichlet_samples: 100_000,
            dirichlet_cases: vec![(4, 10), (8, 20), (16, 50)],
            dirichlet_z: 3.0,
        }
    }
}

/// Every experiment's parameters; each table of a TOML file is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub warm_cold: WarmColdExperiment,
    pub sign_chain: SignChainExperiment,
    pub chain_error: ChainErrorExperiment,
    pub corollary: CorollaryExperiment,
    pub verify_bounds: VerifyExperiment,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.warm_cold.validate()?;
        self.sign_chain.validate()?;
        self.chain_error.validate()?;
        self.corollary.validate()?;
        self.verify_bounds.validate()
    }
}

fn require(ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(message.to_string()))
    }
}

impl WarmColdExperiment {
    pub fn validate(&self) -> Result<()> {
        require(!self.k_list.is_empty(), "warm-cold k list is empty")?;
        require(!self.env.distances.is_empty(), "warm-cold distance list is empty")?;
        require(self.walks >= 1, "warm-cold needs at least one walk per start")?;
        require(self.max_steps >= 1, "warm-cold needs max_steps >= 1")?;
        crate::envs::WarmCold::new(self.env.clone()).map(|_| ())
    }
}

impl SignChainExperiment {
    pub fn validate(&self) -> Result<()> {
        require(!self.distances.is_empty(), "sign-chain distance list is empty")?;
        require(self.repeats >= 1, "sign chain needs at least one repeat")?;
        require(self.max_steps >= 1, "sign chain needs max_steps >= 1")?;
        let (a, b) = self.env.train_offsets;
        for &d in &self.distances {
            if d <= a || d <= b {
                return Err(Error::Config(format!(
                    "sign-chain test distance {d} must exceed the train offsets ({a}, {b})"
                )));
            }
        }
        Ok(())
    }
}

impl ChainErrorExperiment {
    pub fn validate(&self) -> Result<()> {
        require(!self.lengths.is_empty(), "chain length list is empty")?;
        require(self.lengths.iter().all(|&n| n >= 2), "chain lengths must be at least 2")?;
        require(
            self.success_prob > 0.0 && self.success_prob <= 1.0,
            "chain success probability must lie in (0, 1]",
        )?;
        require((0.0..1.0).contains(&self.discount), "chain discount must lie in [0, 1)")
    }
}

impl CorollaryExperiment {
    pub fn validate(&self) -> Result<()> {
        require(!self.t_list.is_empty(), "corollary T list is empty")?;
        require(!self.s_phi.is_empty(), "corollary abstract-size list is empty")?;
        require(self.s_phi.iter().all(|&s| s >= 1), "abstract state counts must be positive")?;
        require(self.n_actions >= 1, "corollary needs at least one action")?;
        require(self.eps >= 0.0 && self.b >= 0.0, "corollary eps and B must be non-negative")
    }
}

impl VerifyExperiment {
    pub fn validate(&self) -> Result<()> {
        require(self.trials >= 1, "verification needs at least one trial")?;
        require(self.identity_instances >= 1, "identity suites need at least one instance")?;
        require(
            self.dirichlet_cases.iter().all(|&(n, _)| n >= 2),
            "unknown-mass checks need n >= 2",
        )?;
        require(self.dirichlet_samples >= 10_000, "unknown-mass checks need at least 10^4 samples")
    }
}
