use serde::{Deserialize, Serialize};

use crate::tabular::FiniteMdp;

const BISIM_TOL: f64 = 1e-10;

/// Why a related pair fails to be bisimilar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BisimulationFailure {
    ActionCount { left: usize, right: usize },
    OutOfRange { pair: (usize, usize) },
    Reward { pair: (usize, usize), action: usize, left: f64, right: f64 },
    Transition { pair: (usize, usize), action: usize, class: usize, left: f64, right: f64 },
}

/// Outcome of [`check_bisimilar`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisimulationCheck {
    pub bisimilar: bool,
    pub counterexample: Option<BisimulationFailure>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Checks that `relation` is a bisimulation between `m1` and `m2`.
///
/// The relation is closed into equivalence classes over the disjoint union of
/// both state sets. Every related pair must agree on rewards and on the
/// transition mass sent into each class, for every action.
pub fn check_bisimilar(m1: &FiniteMdp, m2: &FiniteMdp, relation: &[(usize, usize)]) -> BisimulationCheck {
    let fail = |f| BisimulationCheck {
        bisimilar: false,
        counterexample: Some(f),
    };
    if m1.n_actions() != m2.n_actions() {
        return fail(BisimulationFailure::ActionCount {
            left: m1.n_actions(),
            right: m2.n_actions(),
        });
    }
    let (n1, n2) = (m1.n_states(), m2.n_states());
    let mut parent: Vec<usize> = (0..n1 + n2).collect();
    for &(i, j) in relation {
        if i >= n1 || j >= n2 {
            return fail(BisimulationFailure::OutOfRange { pair: (i, j) });
        }
        let (a, b) = (find(&mut parent, i), find(&mut parent, n1 + j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let class: Vec<usize> = (0..n1 + n2).map(|x| find(&mut parent, x)).collect();

    let mut mass = vec![0.0; n1 + n2];
    for &(i, j) in relation {
        for a in 0..m1.n_actions() {
            let (r1, r2) = (m1.reward(i, a), m2.reward(j, a));
            if (r1 - r2).abs() > BISIM_TOL {
                return fail(BisimulationFailure::Reward {
                    pair: (i, j),
                    action: a,
                    left: r1,
                    right: r2,
                });
            }
            let mut touched = Vec::new();
            for &(t, p) in m1.row(i, a) {
                mass[class[t]] += p;
                touched.push(class[t]);
            }
            for &(t, p) in m2.row(j, a) {
                mass[class[n1 + t]] -= p;
                touched.push(class[n1 + t]);
            }
            touched.sort_unstable();
            touched.dedup();
            let mut failure = None;
            for &c in &touched {
                if failure.is_none() && mass[c].abs() > BISIM_TOL {
                    let left: f64 = m1.row(i, a).iter().filter(|(t, _)| class[*t] == c).map(|(_, p)| p).sum();
                    let right: f64 = m2.row(j, a).iter().filter(|(t, _)| class[n1 + *t] == c).map(|(_, p)| p).sum();
                    failure = Some(BisimulationFailure::Transition {
                        pair: (i, j),
                        action: a,
                        class: c,
                        left,
                        right,
                    });
                }
                mass[c] = 0.0;
            }
            if let Some(f) = failure {
                return fail(f);
            }
        }
    }
    BisimulationCheck {
        bisimilar: true,
        counterexample: None,
    }
}
