use crate::error::{check_len, Result};

use super::mdp::SparseRow;

/// `Σ_i w_i |v_i|`.
pub fn weighted_l1_norm_vec(weights: &[f64], v: &[f64]) -> Result<f64> {
    check_len("weighted norm", weights.len(), v.len())?;
    Ok(weights.iter().zip(v).map(|(w, x)| w * x.abs()).sum())
}

/// `Σ_i w_i ‖M_i‖₁` over the rows of `m`.
pub fn weighted_l1_norm_mat(weights: &[f64], m: &[Vec<f64>]) -> Result<f64> {
    check_len("weighted matrix norm", weights.len(), m.len())?;
    Ok(weights
        .iter()
        .zip(m)
        .map(|(w, row)| w * row.iter().map(|x| x.abs()).sum::<f64>())
        .sum())
}

/// `‖a − b‖₁` for two sparse rows sorted by column.
pub fn sparse_row_l1_distance(a: &SparseRow, b: &SparseRow) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let (ca, pa) = a[i];
        let (cb, pb) = b[j];
        if ca == cb {
            total += (pa - pb).abs();
            i += 1;
            j += 1;
        } else if ca < cb {
            total += pa.abs();
            i += 1;
        } else {
            total += pb.abs();
            j += 1;
        }
    }
    total += a[i..].iter().map(|&(_, p)| p.abs()).sum::<f64>();
    total += b[j..].iter().map(|&(_, p)| p.abs()).sum::<f64>();
    total
}
