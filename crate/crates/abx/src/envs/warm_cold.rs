use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pomdp::GenerativePomdp;

use super::TaskOracle;

/// Observation emitted before the first move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialObservation {
    /// A dedicated start symbol.
    Start,
    /// Pretend the first observation is cold.
    Cold,
}

/// Parameters of the warm-cold lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarmColdConfig {
    /// Training starts are all lattice points within this Manhattan radius.
    pub train_radius: u32,
    /// Goal distances used for testing.
    pub distances: Vec<u32>,
    pub goal_reward: f64,
    pub initial_observation: InitialObservation,
    /// Largest start distance accepted.
    pub max_extent: u32,
    pub discount: f64,
}

impl Default for WarmColdConfig {
    fn default() -> Self {
        Self {
            train_radius: 3,
            distances: vec![3, 10, 50, 100],
            goal_reward: 1.0,
            initial_observation: InitialObservation::Start,
            max_extent: 10_000,
            discount: 0.9,
        }
    }
}

/// Latent state: lattice position and the action that led there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeState {
    pub x: i64,
    pub y: i64,
    pub last: Option<u8>,
}

impl LatticeState {
    pub fn distance(&self) -> i64 {
        self.x.abs() + self.y.abs()
    }
}

/// A lattice walk to the origin that only reports whether the last move
/// got warmer (closer) or colder.
#[derive(Debug, Clone, PartialEq)]
pub struct WarmCold {
    config: WarmColdConfig,
}

impl WarmCold {
    pub const UP: usize = 0;
    pub const DOWN: usize = 1;
    pub const LEFT: usize = 2;
    pub const RIGHT: usize = 3;

    pub const WARM: usize = 0;
    pub const COLD: usize = 1;
    pub const START: usize = 2;

    const MOVES: [(i64, i64); 4] = [(0, 1), (0, -1), (-1, 0), (1, 0)];

    pub fn new(config: WarmColdConfig) -> Result<Self> {
        if config.train_radius < 1 {
            return Err(Error::Config("warm-cold train radius must be at least 1".into()));
        }
        if config.distances.iter().any(|&d| d < 1 || d > config.max_extent) {
            return Err(Error::Config(format!(
                "warm-cold distances must lie in 1..={}",
                config.max_extent
            )));
        }
        if !(0.0..1.0).contains(&config.discount) || config.goal_reward < 0.0 {
            return Err(Error::Config("warm-cold needs 0 <= discount < 1 and a non-negative reward".into()));
        }
        Ok(Self { config })
    }

    pub fn config(&self) -> &WarmColdConfig {
        &self.config
    }

    pub fn delta(action: usize) -> (i64, i64) {
        Self::MOVES[action]
    }

    pub fn start_state(x: i64, y: i64) -> LatticeState {
        LatticeState { x, y, last: None }
    }

    /// Start states on the diamond `|x| + |y| = d`, sorted by `(x, y)`.
    pub fn diamond(d: u32) -> Vec<LatticeState> {
        let d = i64::from(d);
        let mut out = Vec::new();
        for x in -d..=d {
            let r = d - x.abs();
            out.push(Self::start_state(x, -r));
            if r != 0 {
                out.push(Self::start_state(x, r));
            }
        }
        out.sort();
        out
    }

    /// All start states with `1 <= |x| + |y| <= train_radius`, sorted by `(x, y)`.
    pub fn training_starts(&self) -> Vec<LatticeState> {
        let mut out: Vec<_> = (1..=self.config.train_radius).flat_map(Self::diamond).collect();
        out.sort();
        out
    }
}

impl GenerativePomdp for WarmCold {
    type State = LatticeState;

    fn n_actions(&self) -> usize {
        4
    }

    fn n_observations(&self) -> usize {
        3
    }

    fn discount(&self) -> f64 {
        self.config.discount
    }

    fn r_max(&self) -> f64 {
        self.config.goal_reward
    }

    fn start_distribution(&self) -> Vec<(LatticeState, f64)> {
        let starts = self.training_starts();
        let p = 1.0 / starts.len() as f64;
        starts.into_iter().map(|s| (s, p)).collect()
    }

    fn transition(&self, state: &LatticeState, action: usize) -> Vec<(LatticeState, f64)> {
        if self.is_terminal(state) {
            return vec![(*state, 1.0)];
        }
        let (dx, dy) = Self::delta(action);
        let next = LatticeState {
            x: state.x + dx,
            y: state.y + dy,
            last: Some(action as u8),
        };
        vec![(next, 1.0)]
    }

    fn reward(&self, state: &LatticeState, action: usize) -> f64 {
        let (dx, dy) = Self::delta(action);
        if !self.is_terminal(state) && state.x + dx == 0 && state.y + dy == 0 {
            self.config.goal_reward
        } else {
            0.0
        }
    }

    fn observation(&self, state: &LatticeState) -> Vec<(usize, f64)> {
        let o = match state.last {
            None => match self.config.initial_observation {
                InitialObservation::Start => Self::START,
                InitialObservation::Cold => Self::COLD,
            },
            Some(a) => {
                let (dx, dy) = Self::delta(usize::from(a));
                let before = (state.x - dx).abs() + (state.y - dy).abs();
                if state.distance() < before {
                    Self::WARM
                } else {
                    Self::COLD
                }
            }
        };
        vec![(o, 1.0)]
    }

    fn is_terminal(&self, state: &LatticeState) -> bool {
        state.x == 0 && state.y == 0
    }
}

impl TaskOracle for WarmCold {
    fn env_id(&self) -> &'static str {
        "warm_cold"
    }

    fn optimal_action_mask(&self, state: &LatticeState) -> u32 {
        let mut mask = 0;
        if state.x > 0 {
            mask |= 1 << Self::LEFT;
        }
        if state.x < 0 {
            mask |= 1 << Self::RIGHT;
        }
        if state.y > 0 {
            mask |= 1 << Self::DOWN;
        }
        if state.y < 0 {
            mask |= 1 << Self::UP;
        }
        mask
    }

    fn describe(&self, state: &LatticeState) -> Vec<i64> {
        vec![state.x, state.y]
    }
}
