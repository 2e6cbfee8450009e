use rustc_hash::FxHashMap;

use crate::abstraction::{key_tokens, token_alphabet, HistoryKey, KeyKind};
use crate::envs::TaskOracle;
use crate::error::{Error, Result};
use crate::par::{self, Execution};

/// Map from abstract history keys to how often each action was optimal.
///
/// Keys whose tokens fit in 63 bits are stored packed behind a sentinel bit;
/// longer keys fall back to a map keyed by [`HistoryKey`]. Counts live in one
/// flat vector, `n_actions` per entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDictionary {
    kind: KeyKind,
    n_actions: usize,
    n_observations: usize,
    bits: u32,
    packed: FxHashMap<u64, u32>,
    wide: FxHashMap<HistoryKey, u32>,
    counts: Vec<u32>,
}

/// A key in either representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Slot {
    Packed(u64),
    Wide(HistoryKey),
}

impl PolicyDictionary {
    pub fn empty(kind: KeyKind, n_actions: usize, n_observations: usize) -> Self {
        let alphabet = token_alphabet(n_actions, n_observations) as u64;
        Self {
            kind,
            n_actions,
            n_observations,
            bits: 64 - (alphabet - 1).leading_zeros(),
            packed: FxHashMap::default(),
            wide: FxHashMap::default(),
            counts: Vec::new(),
        }
    }

    pub fn kind(&self) -> KeyKind {
        self.kind
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_observations(&self) -> usize {
        self.n_observations
    }

    pub fn len(&self) -> usize {
        self.packed.len() + self.wide.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn pack(&self, tokens: impl Iterator<Item = u16>) -> Option<u64> {
        let mut value: u64 = 1;
        for t in tokens {
            if value.leading_zeros() < self.bits {
                return None;
            }
            value = (value << self.bits) | u64::from(t);
        }
        Some(value)
    }

    fn unpack(&self, mut value: u64) -> HistoryKey {
        let mut tokens = Vec::new();
        let mask = (1u64 << self.bits) - 1;
        while value > 1 {
            tokens.push((value & mask) as u16);
            value >>= self.bits;
        }
        tokens.reverse();
        HistoryKey::from_tokens(&tokens)
    }

    fn slot(&self, initial: usize, steps: &[(usize, usize)]) -> Slot {
        match self.pack(key_tokens(self.kind, self.n_observations, initial, steps)) {
            Some(p) => Slot::Packed(p),
            None => Slot::Wide(self.key(initial, steps)),
        }
    }

    fn slot_of(&self, key: &HistoryKey) -> Slot {
        match self.pack(key.tokens().iter().copied()) {
            Some(p) => Slot::Packed(p),
            None => Slot::Wide(key.clone()),
        }
    }

    fn row(&self, slot: &Slot) -> Option<&[u32]> {
        let index = match slot {
            Slot::Packed(p) => self.packed.get(p),
            Slot::Wide(k) => self.wide.get(k),
        }?;
        let start = *index as usize * self.n_actions;
        Some(&self.counts[start..start + self.n_actions])
    }

    fn row_mut(&mut self, slot: Slot) -> &mut [u32] {
        let next = (self.counts.len() / self.n_actions) as u32;
        let index = match slot {
            Slot::Packed(p) => *self.packed.entry(p).or_insert(next),
            Slot::Wide(k) => *self.wide.entry(k).or_insert(next),
        };
        if index == next {
            self.counts.resize(self.counts.len() + self.n_actions, 0);
        }
        let start = index as usize * self.n_actions;
        &mut self.counts[start..start + self.n_actions]
    }

    pub fn get(&self, key: &HistoryKey) -> Option<&[u32]> {
        self.row(&self.slot_of(key))
    }

    /// Counts stored under the key of history `(initial, steps)`.
    pub fn lookup(&self, initial: usize, steps: &[(usize, usize)]) -> Option<&[u32]> {
        if self.is_empty() {
            return None;
        }
        self.row(&self.slot(initial, steps))
    }

    pub fn key(&self, initial: usize, steps: &[(usize, usize)]) -> HistoryKey {
        HistoryKey::of(self.kind, self.n_observations, initial, steps)
    }

    /// Adds one to every action whose bit is set in `mask` under the key of
    /// `(initial, steps)`. An empty mask leaves the dictionary unchanged.
    pub fn record(&mut self, initial: usize, steps: &[(usize, usize)], mask: u32) {
        if mask == 0 {
            return;
        }
        let slot = self.slot(initial, steps);
        add_mask(self.row_mut(slot), mask);
    }

    /// Like [`record`](Self::record) for an explicit key.
    pub fn record_key(&mut self, key: &HistoryKey, mask: u32) {
        if mask == 0 {
            return;
        }
        let slot = self.slot_of(key);
        add_mask(self.row_mut(slot), mask);
    }

    /// Adds the counts of `other`, which must use the same key kind and sizes.
    pub fn merge(&mut self, other: PolicyDictionary) {
        debug_assert_eq!((self.kind, self.n_actions), (other.kind, other.n_actions));
        let na = other.n_actions;
        let rows = |index: u32| {
            let start = index as usize * na;
            start..start + na
        };
        for (p, index) in &other.packed {
            let mine = self.row_mut(Slot::Packed(*p));
            mine.iter_mut().zip(&other.counts[rows(*index)]).for_each(|(a, b)| *a += b);
        }
        for (k, index) in &other.wide {
            let mine = self.row_mut(Slot::Wide(k.clone()));
            mine.iter_mut().zip(&other.counts[rows(*index)]).for_each(|(a, b)| *a += b);
        }
    }

    /// Entries sorted by key.
    pub fn sorted_entries(&self) -> Vec<(HistoryKey, &[u32])> {
        let mut out: Vec<(HistoryKey, &[u32])> = self
            .packed
            .keys()
            .map(|&p| (self.unpack(p), self.row(&Slot::Packed(p)).expect("stored key")))
            .chain(self.wide.keys().map(|k| (k.clone(), self.row(&Slot::Wide(k.clone())).expect("stored key"))))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

fn add_mask(row: &mut [u32], mask: u32) {
    for (a, c) in row.iter_mut().enumerate() {
        if mask & (1 << a) != 0 {
            *c += 1;
        }
    }
}

/// Largest number of history nodes one worker may visit while building a
/// dictionary.
pub const DEFAULT_DICTIONARY_CAP: usize = 200_000_000;

struct Walker<'a, P: TaskOracle> {
    pomdp: &'a P,
    horizon: usize,
    cap: usize,
    visited: usize,
    dict: PolicyDictionary,
    steps: Vec<(usize, usize)>,
}

impl<P: TaskOracle> Walker<'_, P> {
    fn visit(&mut self, state: &P::State, initial: usize) -> Result<()> {
        if self.pomdp.is_terminal(state) {
            return Ok(());
        }
        self.visited += 1;
        if self.visited > self.cap {
            return Err(Error::Capacity {
                cap: self.cap,
                depth: self.steps.len(),
            });
        }
        self.dict.record(initial, &self.steps, self.pomdp.optimal_action_mask(state));
        if self.steps.len() == self.horizon {
            return Ok(());
        }
        for a in 0..self.pomdp.n_actions() {
            for (next, p) in self.pomdp.transition(state, a) {
                if p <= 0.0 {
                    continue;
                }
                for (o, q) in self.pomdp.observation(&next) {
                    if q <= 0.0 {
                        continue;
                    }
                    self.steps.push((a, o));
                    let result = self.visit(&next, initial);
                    self.steps.pop();
                    result?;
                }
            }
        }
        Ok(())
    }
}

/// Enumerates every history of length at most `horizon` reachable from each
/// start and counts, under the history's key, the actions that are optimal at
/// the latent state it was reached in.
///
/// Under a suffix key, histories shorter than `k` keep their initial
/// observation, so a suffix-`k` dictionary holds the `k`-step suffixes seen in
/// training plus the complete shorter histories.
///
/// Starts are split into one chunk per worker and the per-chunk counts are
/// summed; counts are integers, so the result does not depend on the split. Terminal states contribute nothing.
pub fn build_policy_dictionary<P: TaskOracle>(
    pomdp: &P,
    starts: &[P::State],
    horizon: usize,
    kind: KeyKind,
    cap: usize,
    exec: Execution,
) -> Result<PolicyDictionary> {
    let (na, no) = (pomdp.n_actions(), pomdp.n_observations());
    let chunk = starts.len().div_ceil(par::workers(exec)).max(1);
    let chunks: Vec<&[P::State]> = starts.chunks(chunk).collect();
    let per_chunk = par::map(exec, &chunks, |chunk| -> Result<PolicyDictionary> {
        let mut walker = Walker {
            pomdp,
            horizon,
            cap,
            visited: 0,
            dict: PolicyDictionary::empty(kind, na, no),
            steps: Vec::with_capacity(horizon),
        };
        for start in chunk.iter() {
            for (o, q) in pomdp.observation(start) {
                if q > 0.0 {
                    walker.visit(start, o)?;
                }
            }
        }
        Ok(walker.dict)
    });
    let mut dict = PolicyDictionary::empty(kind, na, no);
    for d in per_chunk {
        dict.merge(d?);
    }
    Ok(dict)
}
