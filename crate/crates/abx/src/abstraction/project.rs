use crate::error::{check_len, Result};
use crate::tabular::{FiniteMdp, SparseRow};

use super::AbstractionFn;

/// `(Φ↓v)(k(i,a)) = v(k(φ(i), a))`.
pub fn down_project_vec(phi: &AbstractionFn, n_actions: usize, v_abs: &[f64]) -> Result<Vec<f64>> {
    check_len("abstract state-action vector", phi.n_abstract() * n_actions, v_abs.len())?;
    let mut out = Vec::with_capacity(phi.n_ground() * n_actions);
    for &c in phi.map() {
        out.extend_from_slice(&v_abs[c * n_actions..(c + 1) * n_actions]);
    }
    Ok(out)
}

/// Ground rows `(Φ↓P)(k(i,a)) = P(k(φ(i), a))` of an abstract row table.
pub fn down_project_rows(phi: &AbstractionFn, n_actions: usize, rows_abs: &[SparseRow]) -> Result<Vec<SparseRow>> {
    check_len("abstract rows", phi.n_abstract() * n_actions, rows_abs.len())?;
    let mut out = Vec::with_capacity(phi.n_ground() * n_actions);
    for &c in phi.map() {
        out.extend(rows_abs[c * n_actions..(c + 1) * n_actions].iter().cloned());
    }
    Ok(out)
}

/// `(Φ↑d)(c) = Σ_{i: φ(i) = c} d(i)` for a distribution over ground states.
pub fn up_project_dist(phi: &AbstractionFn, d: &[f64]) -> Result<Vec<f64>> {
    check_len("ground distribution", phi.n_ground(), d.len())?;
    let mut out = vec![0.0; phi.n_abstract()];
    for (&c, &x) in phi.map().iter().zip(d) {
        out[c] += x;
    }
    Ok(out)
}

/// Up-projection of a distribution over ground state-action pairs.
pub fn up_project_sa_dist(phi: &AbstractionFn, n_actions: usize, d: &[f64]) -> Result<Vec<f64>> {
    check_len("ground state-action distribution", phi.n_ground() * n_actions, d.len())?;
    let mut out = vec![0.0; phi.n_abstract() * n_actions];
    for (i, &c) in phi.map().iter().enumerate() {
        for a in 0..n_actions {
            out[c * n_actions + a] += d[i * n_actions + a];
        }
    }
    Ok(out)
}

/// Aggregates the columns of one sparse row into abstract classes.
pub fn up_project_row(phi: &AbstractionFn, row: &SparseRow) -> SparseRow {
    let mut out: SparseRow = row.iter().map(|&(j, p)| (phi.apply(j), p)).collect();
    out.sort_by_key(|&(c, _)| c);
    out.dedup_by(|next, kept| {
        if next.0 == kept.0 {
            kept.1 += next.1;
            true
        } else {
            false
        }
    });
    out
}

/// Column aggregation of dense rows: `(Φ↑P)(i, c) = Σ_{j: φ(j) = c} P(i, j)`.
pub fn up_project_matrix(phi: &AbstractionFn, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    rows.iter().map(|row| up_project_dist(phi, row)).collect()
}

/// Up-projected transition rows of `mdp`, one per ground state-action pair.
pub fn up_project_transitions(phi: &AbstractionFn, mdp: &FiniteMdp) -> Result<Vec<SparseRow>> {
    check_len("abstraction domain", mdp.n_states(), phi.n_ground())?;
    Ok(mdp.transitions().iter().map(|row| up_project_row(phi, row)).collect())
}
