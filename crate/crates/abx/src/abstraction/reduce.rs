use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::tabular::{sparse_row_l1_distance, FiniteMdp, NormalizedSr, SparseRow, SrKind};

use super::project::up_project_row;
use super::AbstractionFn;

/// An abstract MDP together with the abstraction and weighting that built it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractMdp {
    pub mdp: FiniteMdp,
    pub phi: AbstractionFn,
    pub weights: NormalizedSr,
}

fn check_inputs(ground: &FiniteMdp, phi: &AbstractionFn, weights: &NormalizedSr) -> Result<()> {
    check_len("abstraction domain", ground.n_states(), phi.n_ground())?;
    check_len("aggregation weights", ground.n_state_actions(), weights.len())?;
    if weights.kind() != SrKind::StateAction {
        return Err(Error::InvalidModel("aggregation weights must be over state-action pairs".into()));
    }
    Ok(())
}

fn aggregate(ground: &FiniteMdp, phi: &AbstractionFn, weights: &NormalizedSr, fill_empty: bool) -> Result<AbstractMdp> {
    check_inputs(ground, phi, weights)?;
    let na = ground.n_actions();
    let members = phi.members();
    let mut rows: Vec<SparseRow> = Vec::with_capacity(phi.n_abstract() * na);
    let mut rewards = Vec::with_capacity(phi.n_abstract() * na);
    for (c, class) in members.iter().enumerate() {
        if class.is_empty() && !fill_empty {
            return Err(Error::EmptyClass(c));
        }
        for a in 0..na {
            if class.is_empty() {
                rows.push(vec![(c, 1.0)]);
                rewards.push(0.0);
                continue;
            }
            let total: f64 = class.iter().map(|&i| weights[i * na + a]).sum();
            let coef = |i: usize| {
                if total > 0.0 {
                    weights[i * na + a] / total
                } else {
                    1.0 / class.len() as f64
                }
            };
            let mut reward = 0.0;
            let mut entries: SparseRow = Vec::new();
            for &i in class {
                let w = coef(i);
                if w == 0.0 {
                    continue;
                }
                reward += w * ground.reward(i, a);
                entries.extend(up_project_row(phi, ground.row(i, a)).into_iter().map(|(d, p)| (d, w * p)));
            }
            rows.push(entries);
            rewards.push(reward);
        }
    }
    let mdp = FiniteMdp::new(phi.n_abstract(), na, rows, rewards, ground.discount(), ground.r_max())?;
    Ok(AbstractMdp {
        mdp,
        phi: phi.clone(),
        weights: weights.clone(),
    })
}

/// Aggregates `ground` through `phi` using weighted means with weights
/// `w(k(i,a))`.
///
/// Classes whose members carry no weight for an action fall back to an
/// unweighted mean. A class without ground members is an error.
pub fn build_abstract_mdp(ground: &FiniteMdp, phi: &AbstractionFn, weights: &NormalizedSr) -> Result<AbstractMdp> {
    aggregate(ground, phi, weights, false)
}

/// Like [`build_abstract_mdp`], but classes without ground members become
/// zero-reward absorbing states.
///
/// This is the construction used when a train and a test model share one
/// abstract id space and some keys occur in only one of them.
pub fn build_abstract_mdp_partial(
    ground: &FiniteMdp,
    phi: &AbstractionFn,
    weights: &NormalizedSr,
) -> Result<AbstractMdp> {
    aggregate(ground, phi, weights, true)
}

/// Per ground state-action approximation errors of an abstract model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile {
    /// `|r(i,a) − r_φ(φ(i),a)|`.
    pub reward: Vec<f64>,
    /// `‖Φ↑P(i,a) − P_φ(φ(i),a)‖₁`.
    pub transition: Vec<f64>,
}

impl ErrorProfile {
    /// Weighted L1 norms `(‖ε_r‖_w, ‖ε_p‖_w)`.
    pub fn weighted(&self, weights: &[f64]) -> Result<(f64, f64)> {
        check_len("error profile weights", self.reward.len(), weights.len())?;
        let r = weights.iter().zip(&self.reward).map(|(w, e)| w * e).sum();
        let p = weights.iter().zip(&self.transition).map(|(w, e)| w * e).sum();
        Ok((r, p))
    }

    /// Maximum over all state-action rows.
    pub fn max(&self) -> (f64, f64) {
        let m = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        (m(&self.reward), m(&self.transition))
    }
}

/// Error vectors of `abstract_mdp` against `ground` under abstraction `phi`.
pub fn error_profile(ground: &FiniteMdp, phi: &AbstractionFn, abstract_mdp: &FiniteMdp) -> Result<ErrorProfile> {
    check_len("abstraction domain", ground.n_states(), phi.n_ground())?;
    check_len("abstract state count", phi.n_abstract(), abstract_mdp.n_states())?;
    check_len("abstract action count", ground.n_actions(), abstract_mdp.n_actions())?;
    let na = ground.n_actions();
    let mut reward = Vec::with_capacity(ground.n_state_actions());
    let mut transition = Vec::with_capacity(ground.n_state_actions());
    for i in 0..ground.n_states() {
        let c = phi.apply(i);
        for a in 0..na {
            reward.push((ground.reward(i, a) - abstract_mdp.reward(c, a)).abs());
            let up = up_project_row(phi, ground.row(i, a));
            transition.push(sparse_row_l1_distance(&up, abstract_mdp.row(c, a)));
        }
    }
    Ok(ErrorProfile { reward, transition })
}

/// Reward and transition reduction errors with the weighting that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionErrors {
    pub eps_r: f64,
    pub eps_p: f64,
    /// `"weighted"` for a successor weighting, `"max_norm"` for the maximum.
    pub weighting: String,
}

/// `ε_r = ‖r − Φ↓r_φ‖_w` and `ε_p = ‖Φ↑P − Φ↓P_φ‖_w`.
pub fn reduction_errors(
    ground: &FiniteMdp,
    phi: &AbstractionFn,
    abstract_mdp: &AbstractMdp,
    weights: &NormalizedSr,
) -> Result<ReductionErrors> {
    check_inputs(ground, phi, weights)?;
    let (eps_r, eps_p) = error_profile(ground, phi, &abstract_mdp.mdp)?.weighted(weights)?;
    Ok(ReductionErrors {
        eps_r,
        eps_p,
        weighting: "weighted".into(),
    })
}

/// Reduction errors measured with the maximum over state-action rows.
pub fn max_norm_reduction_errors(
    ground: &FiniteMdp,
    phi: &AbstractionFn,
    abstract_mdp: &AbstractMdp,
) -> Result<ReductionErrors> {
    let (eps_r, eps_p) = error_profile(ground, phi, &abstract_mdp.mdp)?.max();
    Ok(ReductionErrors {
        eps_r,
        eps_p,
        weighting: "max_norm".into(),
    })
}

/// Weighted train/test model mismatch `(‖r_train − r_test‖_w, ‖P_train − P_test‖_w)`
/// over abstract state-action pairs.
pub fn ood_errors(m_train: &AbstractMdp, m_test: &AbstractMdp, weights_abs: &[f64]) -> Result<(f64, f64)> {
    let (a, b) = (&m_train.mdp, &m_test.mdp);
    if a.n_states() != b.n_states() || a.n_actions() != b.n_actions() {
        return Err(Error::AbstractMismatch {
            left: a.n_state_actions(),
            right: b.n_state_actions(),
        });
    }
    check_len("abstract weights", a.n_state_actions(), weights_abs.len())?;
    let mut eps_r = 0.0;
    let mut eps_p = 0.0;
    for (k, &w) in weights_abs.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        eps_r += w * (a.rewards()[k] - b.rewards()[k]).abs();
        eps_p += w * sparse_row_l1_distance(&a.transitions()[k], &b.transitions()[k]);
    }
    Ok((eps_r, eps_p))
}
