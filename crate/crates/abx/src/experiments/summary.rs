use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::drivers::{SignChainRow, WarmColdRow};

/// Sample mean and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSem {
    pub n: usize,
    pub mean: f64,
    pub sem: f64,
}

impl MeanSem {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let values: Vec<f64> = values.into_iter().collect();
        let n = values.len();
        if n == 0 {
            return Self {
                n,
                mean: f64::NAN,
                sem: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sem = if n > 1 {
            let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { n, mean, sem }
    }
}

/// Mean mistakes of one `(distance, k)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmColdCell {
    pub distance: u32,
    pub k: usize,
    pub total: MeanSem,
    pub known_key: MeanSem,
    pub missing_key: MeanSem,
    pub steps: MeanSem,
}

/// Per-cell statistics of a warm-cold run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmColdSummary {
    pub cells: Vec<WarmColdCell>,
}

impl WarmColdSummary {
    pub fn from_rows(rows: &[WarmColdRow]) -> Self {
        let mut groups: BTreeMap<(u32, usize), Vec<&WarmColdRow>> = BTreeMap::new();
        for r in rows {
            groups.entry((r.goal_distance, r.suffix_k)).or_default().push(r);
        }
        let cells = groups
            .into_iter()
            .map(|((distance, k), rs)| WarmColdCell {
                distance,
                k,
                total: MeanSem::of(rs.iter().map(|r| f64::from(r.mistakes_total))),
                known_key: MeanSem::of(rs.iter().map(|r| f64::from(r.mistakes_known_key))),
                missing_key: MeanSem::of(rs.iter().map(|r| f64::from(r.mistakes_missing_key))),
                steps: MeanSem::of(rs.iter().map(|r| r.steps as f64)),
            })
            .collect();
        Self { cells }
    }

    pub fn cell(&self, distance: u32, k: usize) -> Option<&WarmColdCell> {
        self.cells.iter().find(|c| c.distance == distance && c.k == k)
    }

    /// Cells at `distance` in increasing `k`.
    pub fn at_distance(&self, distance: u32) -> Vec<&WarmColdCell> {
        self.cells.iter().filter(|c| c.distance == distance).collect()
    }

    /// Suffix length with the fewest mean mistakes at `distance`; ties go to
    /// the smaller `k`.
    pub fn best_k(&self, distance: u32) -> Option<usize> {
        self.at_distance(distance)
            .into_iter()
            .min_by(|a, b| a.total.mean.total_cmp(&b.total.mean).then(a.k.cmp(&b.k)))
            .map(|c| c.k)
    }
}

/// Mean ratio of one `(abstraction, distance)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignChainCell {
    pub abstraction: String,
    pub distance: u32,
    pub ratio: MeanSem,
}

pub fn sign_chain_summary(rows: &[SignChainRow]) -> Vec<SignChainCell> {
    let mut groups: BTreeMap<(&str, u32), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.abstraction.as_str(), r.distance)).or_default().push(r.ratio);
    }
    groups
        .into_iter()
        .map(|((abstraction, distance), ratios)| SignChainCell {
            abstraction: abstraction.to_string(),
            distance,
            ratio: MeanSem::of(ratios),
        })
        .collect()
}
