use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::tabular::{FiniteMdp, SparseRow};

use super::belief::{merge, Belief};
use super::GenerativePomdp;

/// Index of the absorbing sink in every [`HistoryMdp`].
pub const SINK: usize = 0;

/// Default limit on the number of enumerated histories.
pub const DEFAULT_HISTORY_CAP: usize = 5_000_000;

/// An observation-action history `(o_0, a_1, o_1, ..., a_t, o_t)`.
///
/// Histories are ordered by length, then by their observation sequence, then
/// by their action sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct History {
    pub initial: usize,
    /// `(action, observation)` pairs in time order.
    pub steps: Vec<(usize, usize)>,
}

impl History {
    pub fn new(initial: usize) -> Self {
        Self {
            initial,
            steps: Vec::new(),
        }
    }

    /// Number of `(action, observation)` pairs.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn extended(&self, action: usize, observation: usize) -> Self {
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.extend_from_slice(&self.steps);
        steps.push((action, observation));
        Self {
            initial: self.initial,
            steps,
        }
    }

    pub fn observations(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.initial).chain(self.steps.iter().map(|&(_, o)| o))
    }

    pub fn actions(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|&(a, _)| a)
    }

    pub fn last_observation(&self) -> usize {
        self.steps.last().map_or(self.initial, |&(_, o)| o)
    }
}

impl Ord for History {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.observations().cmp(other.observations()))
            .then_with(|| self.actions().cmp(other.actions()))
    }
}

impl PartialOrd for History {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Finite history MDP truncated at a horizon.
///
/// Index 0 is a zero-reward absorbing sink. Indices `1..` hold the reachable
/// histories in increasing [`History`] order, so the index realizes a
/// bijection between the enumerated histories and an initial segment of the
/// naturals.
#[derive(Debug, Clone)]
pub struct HistoryMdp<S> {
    mdp: FiniteMdp,
    histories: Vec<History>,
    beliefs: Vec<Belief<S>>,
    terminal: Vec<bool>,
    start: Vec<f64>,
    horizon: usize,
    n_observations: usize,
}

impl<S> HistoryMdp<S> {
    /// Size of the observation alphabet of the source POMDP.
    pub fn n_observations(&self) -> usize {
        self.n_observations
    }

    pub fn mdp(&self) -> &FiniteMdp {
        &self.mdp
    }

    /// Number of MDP states including the sink.
    pub fn n_states(&self) -> usize {
        self.mdp.n_states()
    }

    /// Number of enumerated histories, excluding the sink.
    pub fn n_histories(&self) -> usize {
        self.histories.len()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// History at `index`, or `None` for the sink.
    pub fn history(&self, index: usize) -> Option<&History> {
        index.checked_sub(1).and_then(|i| self.histories.get(i))
    }

    /// Belief over latent states at `index`, or `None` for the sink.
    pub fn belief(&self, index: usize) -> Option<&Belief<S>> {
        index.checked_sub(1).and_then(|i| self.beliefs.get(i))
    }

    pub fn histories(&self) -> &[History] {
        &self.histories
    }

    pub fn is_sink(&self, index: usize) -> bool {
        index == SINK
    }

    /// True for the sink and for histories whose belief is entirely terminal.
    pub fn is_terminal(&self, index: usize) -> bool {
        self.terminal[index]
    }

    /// Start distribution over MDP indices (mass on length-0 histories).
    pub fn start_distribution(&self) -> &[f64] {
        &self.start
    }

    pub fn index_of(&self, history: &History) -> Option<usize> {
        self.histories.binary_search(history).ok().map(|i| i + 1)
    }
}

struct Node<S> {
    history: History,
    belief: Belief<S>,
    terminal: bool,
}

struct Child<S> {
    parent_action: usize,
    node: Node<S>,
    prob: f64,
}

struct Expansion<S> {
    rewards: Vec<f64>,
    sink_mass: Vec<f64>,
    children: Vec<Child<S>>,
}

fn expand<P: GenerativePomdp>(pomdp: &P, node: &Node<P::State>, at_horizon: bool) -> Expansion<P::State> {
    let na = pomdp.n_actions();
    if node.terminal {
        return Expansion {
            rewards: vec![0.0; na],
            sink_mass: vec![1.0; na],
            children: Vec::new(),
        };
    }
    let mut rewards = Vec::with_capacity(na);
    let mut sink_mass = Vec::with_capacity(na);
    let mut children = Vec::new();
    for a in 0..na {
        let mut reward = 0.0;
        let mut terminal_mass = 0.0;
        let mut pred = Vec::new();
        for (s, b) in &node.belief {
            if pomdp.is_terminal(s) {
                terminal_mass += b;
                continue;
            }
            reward += b * pomdp.reward(s, a);
            pred.extend(pomdp.transition(s, a).into_iter().map(|(t, p)| (t, b * p)));
        }
        rewards.push(reward);
        if at_horizon {
            sink_mass.push(1.0);
            continue;
        }
        sink_mass.push(terminal_mass);
        let mut by_obs: BTreeMap<usize, Vec<(P::State, f64)>> = BTreeMap::new();
        for (t, m) in merge(pred) {
            for (o, q) in pomdp.observation(&t) {
                if q > 0.0 {
                    by_obs.entry(o).or_default().push((t.clone(), m * q));
                }
            }
        }
        for (o, joint) in by_obs {
            let joint = merge(joint);
            let marginal: f64 = joint.iter().map(|(_, p)| p).sum();
            if marginal <= 0.0 {
                continue;
            }
            let belief: Belief<P::State> = joint.into_iter().map(|(s, p)| (s, p / marginal)).collect();
            let terminal = belief.iter().all(|(s, _)| pomdp.is_terminal(s));
            children.push(Child {
                parent_action: a,
                node: Node {
                    history: node.history.extended(a, o),
                    belief,
                    terminal,
                },
                prob: marginal,
            });
        }
    }
    Expansion {
        rewards,
        sink_mass,
        children,
    }
}

/// Enumerates all histories reachable from `d0` within `horizon` steps.
pub fn enumerate_histories<P: GenerativePomdp>(
    pomdp: &P,
    d0: &[(P::State, f64)],
    horizon: usize,
) -> Result<HistoryMdp<P::State>> {
    enumerate_histories_capped(pomdp, d0, horizon, DEFAULT_HISTORY_CAP, Execution::default())
}

/// [`enumerate_histories`] with an explicit capacity and execution mode.
///
/// Each depth level is expanded as an independent batch.
pub fn enumerate_histories_capped<P: GenerativePomdp>(
    pomdp: &P,
    d0: &[(P::State, f64)],
    horizon: usize,
    cap: usize,
    exec: Execution,
) -> Result<HistoryMdp<P::State>> {
    let na = pomdp.n_actions();
    let total: f64 = d0.iter().map(|(_, p)| p).sum();
    if d0.is_empty() || (total - 1.0).abs() > 1e-9 || d0.iter().any(|(_, p)| *p < 0.0) {
        return Err(Error::Probability {
            context: "history start distribution".into(),
            detail: format!("mass {total}"),
        });
    }

    let mut by_obs: BTreeMap<usize, Vec<(P::State, f64)>> = BTreeMap::new();
    for (s, m) in d0 {
        for (o, q) in pomdp.observation(s) {
            if q > 0.0 && *m > 0.0 {
                by_obs.entry(o).or_default().push((s.clone(), m / total * q));
            }
        }
    }
    let mut start_probs = Vec::new();
    let mut level: Vec<Node<P::State>> = Vec::new();
    for (o, joint) in by_obs {
        let joint = merge(joint);
        let marginal: f64 = joint.iter().map(|(_, p)| p).sum();
        let belief: Belief<P::State> = joint.into_iter().map(|(s, p)| (s, p / marginal)).collect();
        let terminal = belief.iter().all(|(s, _)| pomdp.is_terminal(s));
        start_probs.push(marginal);
        level.push(Node {
            history: History::new(o),
            belief,
            terminal,
        });
    }
    if level.len() > cap {
        return Err(Error::Capacity { cap, depth: 0 });
    }

    let mut histories = Vec::new();
    let mut beliefs = Vec::new();
    let mut terminal = vec![true];
    let mut rows: Vec<SparseRow> = vec![vec![(SINK, 1.0)]; na];
    let mut rewards = vec![0.0; na];

    let mut depth = 0;
    loop {
        let level_offset = 1 + histories.len();
        let at_horizon = depth == horizon;
        let expansions = par::map(exec, &level, |node| expand(pomdp, node, at_horizon));

        let next_offset = level_offset + level.len();
        let mut children: Vec<Child<P::State>> = Vec::new();
        let mut parent_rows: Vec<Vec<SparseRow>> = Vec::with_capacity(level.len());
        for exp in expansions {
            let mut node_rows: Vec<SparseRow> = exp
                .sink_mass
                .iter()
                .map(|&m| if m > 0.0 { vec![(SINK, m)] } else { Vec::new() })
                .collect();
            rewards.extend(exp.rewards);
            for child in exp.children {
                // Placeholder column; fixed once the level is sorted.
                node_rows[child.parent_action].push((usize::MAX - children.len(), child.prob));
                children.push(child);
            }
            parent_rows.push(node_rows);
        }

        if next_offset - 1 + children.len() > cap {
            return Err(Error::Capacity { cap, depth: depth + 1 });
        }

        let mut order: Vec<usize> = (0..children.len()).collect();
        order.sort_by(|&x, &y| children[x].node.history.cmp(&children[y].node.history));
        let mut rank = vec![0; children.len()];
        for (r, &c) in order.iter().enumerate() {
            rank[c] = r;
        }
        for node_rows in &mut parent_rows {
            for row in node_rows.iter_mut() {
                for entry in row.iter_mut() {
                    if entry.0 != SINK {
                        let child = usize::MAX - entry.0;
                        entry.0 = next_offset + rank[child];
                    }
                }
            }
            rows.append(node_rows);
        }

        for node in level {
            terminal.push(node.terminal);
            histories.push(node.history);
            beliefs.push(node.belief);
        }

        let mut slots: Vec<Option<Child<P::State>>> = children.into_iter().map(Some).collect();
        level = order
            .iter()
            .map(|&c| slots[c].take().expect("each child is moved once").node)
            .collect();
        if level.is_empty() {
            break;
        }
        depth += 1;
    }

    let n_states = 1 + histories.len();
    let mut start = vec![0.0; n_states];
    start[1..1 + start_probs.len()].copy_from_slice(&start_probs);
    let mdp = FiniteMdp::new(n_states, na, rows, rewards, pomdp.discount(), pomdp.r_max())?;
    Ok(HistoryMdp {
        mdp,
        histories,
        beliefs,
        terminal,
        start,
        horizon,
        n_observations: pomdp.n_observations(),
    })
}
