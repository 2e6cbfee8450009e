use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::tabular::{normalize_row, FiniteMdp, SparseRow};

use super::GenerativePomdp;

/// A POMDP over latent states `0..n_states` given by explicit tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularPomdp {
    n_states: usize,
    n_actions: usize,
    n_observations: usize,
    transitions: Vec<SparseRow>,
    rewards: Vec<f64>,
    emissions: Vec<SparseRow>,
    terminal: Vec<bool>,
    start: Vec<f64>,
    discount: f64,
    r_max: f64,
}

impl TabularPomdp {
    /// Combines an MDP over latent states with emission rows and a start distribution.
    pub fn new(
        dynamics: FiniteMdp,
        n_observations: usize,
        emissions: Vec<SparseRow>,
        terminal: Vec<bool>,
        start: Vec<f64>,
    ) -> Result<Self> {
        let n = dynamics.n_states();
        check_len("emission rows", n, emissions.len())?;
        check_len("terminal flags", n, terminal.len())?;
        check_len("start distribution", n, start.len())?;
        let emissions = emissions
            .into_iter()
            .enumerate()
            .map(|(s, row)| normalize_row(row, n_observations, &format!("emission row {s}")))
            .collect::<Result<Vec<_>>>()?;
        let start_row = normalize_row(start.iter().copied().enumerate(), n, "start distribution")?;
        let mut start = vec![0.0; n];
        for (s, p) in start_row {
            start[s] = p;
        }
        if n_observations == 0 {
            return Err(Error::InvalidModel("a POMDP needs at least one observation".into()));
        }
        Ok(Self {
            n_states: n,
            n_actions: dynamics.n_actions(),
            n_observations,
            transitions: dynamics.transitions().to_vec(),
            rewards: dynamics.rewards().to_vec(),
            emissions,
            terminal,
            start,
            discount: dynamics.discount(),
            r_max: dynamics.r_max(),
        })
    }

    /// The POMDP that reveals its latent state: `η(o = s | s) = 1`.
    pub fn fully_observable(dynamics: FiniteMdp, start: Vec<f64>) -> Result<Self> {
        let n = dynamics.n_states();
        let emissions = (0..n).map(|s| vec![(s, 1.0)]).collect();
        Self::new(dynamics, n, emissions, vec![false; n], start)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn start(&self) -> &[f64] {
        &self.start
    }

    /// Point-mass start list usable with history enumeration.
    pub fn start_list(&self, d0: &[f64]) -> Vec<(usize, f64)> {
        d0.iter().copied().enumerate().filter(|&(_, p)| p > 0.0).collect()
    }
}

impl GenerativePomdp for TabularPomdp {
    type State = usize;

    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn n_observations(&self) -> usize {
        self.n_observations
    }

    fn discount(&self) -> f64 {
        self.discount
    }

    fn r_max(&self) -> f64 {
        self.r_max
    }

    fn start_distribution(&self) -> Vec<(usize, f64)> {
        self.start_list(&self.start)
    }

    fn transition(&self, state: &usize, action: usize) -> Vec<(usize, f64)> {
        self.transitions[state * self.n_actions + action].clone()
    }

    fn reward(&self, state: &usize, action: usize) -> f64 {
        self.rewards[state * self.n_actions + action]
    }

    fn observation(&self, state: &usize) -> Vec<(usize, f64)> {
        self.emissions[*state].clone()
    }

    fn is_terminal(&self, state: &usize) -> bool {
        self.terminal[*state]
    }
}
