use std::fmt;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::pomdp::HistoryMdp;

use super::AbstractionFn;

const SINK_TOKEN: u16 = 0;
const ABSORBING_TOKEN: u16 = 1;
const FIRST_FREE_TOKEN: usize = 2;

/// Which part of a history an abstraction keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyKind {
    /// The trailing `k` action-observation pairs. Shorter histories keep
    /// everything, including `o_0`.
    Suffix(usize),
    /// Only `o_0`. Terminal histories and the sink share one absorbing class.
    FirstObservation,
    /// The whole history.
    FullHistory,
}

impl KeyKind {
    /// Label used in output files: the suffix length, `first_obs` or `full_history`.
    pub fn label(&self) -> String {
        match self {
            KeyKind::Suffix(k) => k.to_string(),
            KeyKind::FirstObservation => "first_obs".into(),
            KeyKind::FullHistory => "full_history".into(),
        }
    }
}

/// Compact token encoding of an abstract history key.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HistoryKey(SmallVec<[u16; 16]>);

impl HistoryKey {
    /// Key of the history `(initial, steps)` over an alphabet of `n_observations`.
    pub fn of(kind: KeyKind, n_observations: usize, initial: usize, steps: &[(usize, usize)]) -> Self {
        HistoryKey(key_tokens(kind, n_observations, initial, steps).collect())
    }

    pub(crate) fn from_tokens(tokens: &[u16]) -> Self {
        HistoryKey(SmallVec::from_slice(tokens))
    }

    /// Key of the absorbing sink.
    pub fn sink(kind: KeyKind) -> Self {
        match kind {
            KeyKind::FirstObservation => Self::absorbing(),
            _ => HistoryKey(SmallVec::from_slice(&[SINK_TOKEN])),
        }
    }

    /// Shared key of terminal histories under the first-observation abstraction.
    pub fn absorbing() -> Self {
        HistoryKey(SmallVec::from_slice(&[ABSORBING_TOKEN]))
    }

    pub fn tokens(&self) -> &[u16] {
        &self.0
    }
}

/// Number of distinct tokens a key over `n_actions` and `n_observations` can hold.
pub(crate) fn token_alphabet(n_actions: usize, n_observations: usize) -> usize {
    FIRST_FREE_TOKEN + n_observations * (1 + n_actions)
}

/// Tokens of the key of `(initial, steps)`, without allocating.
pub(crate) fn key_tokens(
    kind: KeyKind,
    n_observations: usize,
    initial: usize,
    steps: &[(usize, usize)],
) -> impl Iterator<Item = u16> + '_ {
    let obs = (FIRST_FREE_TOKEN + initial) as u16;
    let (head, tail) = match kind {
        KeyKind::FirstObservation => (Some(obs), &steps[..0]),
        KeyKind::Suffix(k) if steps.len() >= k => (None, &steps[steps.len() - k..]),
        KeyKind::Suffix(_) | KeyKind::FullHistory => (Some(obs), steps),
    };
    let pair = move |&(a, o): &(usize, usize)| (FIRST_FREE_TOKEN + n_observations + a * n_observations + o) as u16;
    head.into_iter().chain(tail.iter().map(pair))
}

impl fmt::Debug for HistoryKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HistoryKey{:?}", self.0.as_slice())
    }
}

fn ground_key<S>(hmdp: &HistoryMdp<S>, kind: KeyKind, n_observations: usize, index: usize) -> HistoryKey {
    match hmdp.history(index) {
        None => HistoryKey::sink(kind),
        Some(_) if kind == KeyKind::FirstObservation && hmdp.is_terminal(index) => HistoryKey::absorbing(),
        Some(h) => HistoryKey::of(kind, n_observations, h.initial, &h.steps),
    }
}

/// Abstraction of a history MDP by history key, ids in first-occurrence order.
pub fn key_abstraction<S>(hmdp: &HistoryMdp<S>, kind: KeyKind) -> AbstractionFn {
    let n_obs = hmdp.n_observations();
    AbstractionFn::from_labels((0..hmdp.n_states()).map(|i| ground_key(hmdp, kind, n_obs, i)))
}

/// Maps each history to its trailing `k` action-observation pairs.
pub fn suffix_abstraction<S>(hmdp: &HistoryMdp<S>, k: usize) -> AbstractionFn {
    key_abstraction(hmdp, KeyKind::Suffix(k))
}

/// Maps each history to its first observation.
pub fn first_observation_abstraction<S>(hmdp: &HistoryMdp<S>) -> AbstractionFn {
    key_abstraction(hmdp, KeyKind::FirstObservation)
}

/// Key abstractions of several history MDPs over one shared id space.
///
/// Ids are assigned by first occurrence, scanning the models in order. A key
/// seen in only one model yields a class with no members in the others.
pub fn shared_key_abstractions<S>(hmdps: &[&HistoryMdp<S>], kind: KeyKind) -> Vec<AbstractionFn> {
    let n_obs = hmdps.iter().map(|h| h.n_observations()).max().unwrap_or(1);
    let mut ids: FxHashMap<HistoryKey, usize> = FxHashMap::default();
    let maps: Vec<Vec<usize>> = hmdps
        .iter()
        .map(|h| {
            (0..h.n_states())
                .map(|i| {
                    let next = ids.len();
                    *ids.entry(ground_key(h, kind, n_obs, i)).or_insert(next)
                })
                .collect()
        })
        .collect();
    let n = ids.len();
    maps.into_iter()
        .map(|m| AbstractionFn::with_codomain(m, n).expect("ids come from the shared interner"))
        .collect()
}
