//! Abstraction functions, projection operators and successor-weighted model
//! reductions.

mod keys;
mod project;
mod reduce;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use keys::{
    first_observation_abstraction, key_abstraction, shared_key_abstractions, suffix_abstraction,
    HistoryKey, KeyKind,
};
pub(crate) use keys::{key_tokens, token_alphabet};
pub use project::{
    down_project_rows, down_project_vec, up_project_dist, up_project_matrix, up_project_row,
    up_project_sa_dist, up_project_transitions,
};
pub use reduce::{
    build_abstract_mdp, build_abstract_mdp_partial, error_profile, max_norm_reduction_errors,
    ood_errors, reduction_errors, AbstractMdp, ErrorProfile, ReductionErrors,
};

/// Total map from ground state indices to abstract state ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractionFn {
    map: Vec<usize>,
    n_abstract: usize,
}

impl AbstractionFn {
    /// Uses `table` as given; its ids must cover `0..=max` without gaps.
    pub fn from_table(table: Vec<usize>) -> Result<Self> {
        let n_abstract = table.iter().max().map_or(0, |m| m + 1);
        let f = Self::with_codomain(table, n_abstract)?;
        if let Some(c) = f.class_sizes().iter().position(|&n| n == 0) {
            return Err(Error::EmptyClass(c));
        }
        Ok(f)
    }

    /// Relabels arbitrary labels by order of first occurrence.
    pub fn from_labels<T: std::hash::Hash + Eq>(labels: impl IntoIterator<Item = T>) -> Self {
        let mut ids = rustc_hash::FxHashMap::default();
        let map: Vec<usize> = labels
            .into_iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(l).or_insert(next)
            })
            .collect();
        Self {
            n_abstract: ids.len(),
            map,
        }
    }

    /// A map into `0..n_abstract` where some ids may have no ground members.
    ///
    /// Used when several ground models share one abstract id space.
    pub fn with_codomain(map: Vec<usize>, n_abstract: usize) -> Result<Self> {
        if let Some(&bad) = map.iter().find(|&&c| c >= n_abstract) {
            return Err(Error::dim("abstraction codomain", n_abstract, bad));
        }
        Ok(Self { map, n_abstract })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
            n_abstract: n,
        }
    }

    pub fn all_to_one(n: usize) -> Self {
        Self {
            map: vec![0; n],
            n_abstract: usize::from(n > 0),
        }
    }

    pub fn n_ground(&self) -> usize {
        self.map.len()
    }

    pub fn n_abstract(&self) -> usize {
        self.n_abstract
    }

    #[inline]
    pub fn apply(&self, ground: usize) -> usize {
        self.map[ground]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_abstract];
        for &c in &self.map {
            sizes[c] += 1;
        }
        sizes
    }

    /// Ground members of each abstract class, in increasing order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_abstract];
        for (i, &c) in self.map.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// True if every class of `self` lies inside one class of `coarser`.
    pub fn refines(&self, coarser: &AbstractionFn) -> bool {
        if self.n_ground() != coarser.n_ground() {
            return false;
        }
        let mut image = vec![usize::MAX; self.n_abstract];
        self.map.iter().zip(&coarser.map).all(|(&c, &d)| {
            if image[c] == usize::MAX {
                image[c] = d;
            }
            image[c] == d
        })
    }
}
