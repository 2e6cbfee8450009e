use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pomdp::GenerativePomdp;

use super::TaskOracle;

/// Parameters of the sign chain.
///
/// Training posts A and B sit at `-train_offsets.0` and `+train_offsets.1` on
/// one line; test posts C and D sit at `-test_offsets.0` and `+test_offsets.1`
/// on a second line. Both lines end in the same goal cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignChainConfig {
    pub train_offsets: (u32, u32),
    pub test_offsets: (u32, u32),
    pub goal_reward: f64,
    pub discount: f64,
}

impl Default for SignChainConfig {
    fn default() -> Self {
        Self {
            train_offsets: (5, 5),
            test_offsets: (10, 10),
            goal_reward: 1.0,
            discount: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SignState {
    Goal,
    Cell { segment: Segment, pos: i64 },
}

/// Two corridors sharing a goal; a sign at each start post points to it.
#[derive(Debug, Clone, PartialEq)]
pub struct SignChain {
    config: SignChainConfig,
}

impl SignChain {
    pub const LEFT: usize = 0;
    pub const RIGHT: usize = 1;

    pub const LEFT_SIGN: usize = 0;
    pub const RIGHT_SIGN: usize = 1;
    pub const BLANK: usize = 2;
    pub const GOAL: usize = 3;

    pub fn new(config: SignChainConfig) -> Result<Self> {
        let (a, b) = config.train_offsets;
        let (c, d) = config.test_offsets;
        if a == 0 || b == 0 {
            return Err(Error::Config("sign-chain train offsets must be positive".into()));
        }
        if c <= a || d <= b {
            return Err(Error::Config(format!(
                "sign-chain test offsets ({c}, {d}) must exceed the train offsets ({a}, {b})"
            )));
        }
        if !(0.0..1.0).contains(&config.discount) || config.goal_reward < 0.0 {
            return Err(Error::Config("sign chain needs 0 <= discount < 1 and a non-negative reward".into()));
        }
        Ok(Self { config })
    }

    pub fn config(&self) -> &SignChainConfig {
        &self.config
    }

    fn offsets(&self, segment: Segment) -> (i64, i64) {
        let (l, r) = match segment {
            Segment::Train => self.config.train_offsets,
            Segment::Test => self.config.test_offsets,
        };
        (i64::from(l), i64::from(r))
    }

    pub fn post_a(&self) -> SignState {
        SignState::Cell {
            segment: Segment::Train,
            pos: -self.offsets(Segment::Train).0,
        }
    }

    pub fn post_b(&self) -> SignState {
        SignState::Cell {
            segment: Segment::Train,
            pos: self.offsets(Segment::Train).1,
        }
    }

    pub fn post_c(&self) -> SignState {
        SignState::Cell {
            segment: Segment::Test,
            pos: -self.offsets(Segment::Test).0,
        }
    }

    pub fn post_d(&self) -> SignState {
        SignState::Cell {
            segment: Segment::Test,
            pos: self.offsets(Segment::Test).1,
        }
    }

    pub fn train_starts(&self) -> Vec<SignState> {
        vec![self.post_a(), self.post_b()]
    }

    pub fn test_starts(&self) -> Vec<SignState> {
        vec![self.post_c(), self.post_d()]
    }

    /// Steps from `state` to the goal under the optimal policy.
    pub fn goal_distance(state: &SignState) -> u64 {
        match state {
            SignState::Goal => 0,
            SignState::Cell { pos, .. } => pos.unsigned_abs(),
        }
    }
}

impl GenerativePomdp for SignChain {
    type State = SignState;

    fn n_actions(&self) -> usize {
        2
    }

    fn n_observations(&self) -> usize {
        4
    }

    fn discount(&self) -> f64 {
        self.config.discount
    }

    fn r_max(&self) -> f64 {
        self.config.goal_reward
    }

    fn start_distribution(&self) -> Vec<(SignState, f64)> {
        vec![(self.post_a(), 0.5), (self.post_b(), 0.5)]
    }

    fn transition(&self, state: &SignState, action: usize) -> Vec<(SignState, f64)> {
        let next = match *state {
            SignState::Goal => SignState::Goal,
            SignState::Cell { segment, pos } => {
                let pos = if action == Self::LEFT { pos - 1 } else { pos + 1 };
                if pos == 0 {
                    SignState::Goal
                } else {
                    SignState::Cell { segment, pos }
                }
            }
        };
        vec![(next, 1.0)]
    }

    fn reward(&self, state: &SignState, action: usize) -> f64 {
        match *state {
            SignState::Cell { pos: -1, .. } if action == Self::RIGHT => self.config.goal_reward,
            SignState::Cell { pos: 1, .. } if action == Self::LEFT => self.config.goal_reward,
            _ => 0.0,
        }
    }

    fn observation(&self, state: &SignState) -> Vec<(usize, f64)> {
        let o = match *state {
            SignState::Goal => Self::GOAL,
            SignState::Cell { segment, pos } => {
                let (l, r) = self.offsets(segment);
                if pos == -l {
                    Self::RIGHT_SIGN
                } else if pos == r {
                    Self::LEFT_SIGN
                } else {
                    Self::BLANK
                }
            }
        };
        vec![(o, 1.0)]
    }

    fn is_terminal(&self, state: &SignState) -> bool {
        *state == SignState::Goal
    }
}

impl TaskOracle for SignChain {
    fn env_id(&self) -> &'static str {
        "sign_chain"
    }

    fn optimal_action_mask(&self, state: &SignState) -> u32 {
        match *state {
            SignState::Goal => 0,
            SignState::Cell { pos, .. } if pos < 0 => 1 << Self::RIGHT,
            SignState::Cell { .. } => 1 << Self::LEFT,
        }
    }

    fn describe(&self, state: &SignState) -> Vec<i64> {
        match *state {
            SignState::Goal => vec![0, 0],
            SignState::Cell { segment, pos } => vec![i64::from(segment == Segment::Test), pos],
        }
    }
}
