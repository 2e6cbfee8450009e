//! Measured approximation errors along nested abstraction sequences.

use serde::{Deserialize, Serialize};

use crate::abstraction::{build_abstract_mdp, key_abstraction, reduction_errors, AbstractionFn, KeyKind};
use crate::envs::{WarmCold, WarmColdConfig};
use crate::error::Result;
use crate::par::Execution;
use crate::pomdp::{enumerate_histories_capped, DEFAULT_HISTORY_CAP};
use crate::tabular::{normalized_sr, FiniteMdp, NormalizedSr, Policy, SrKind};

use super::analysis::EXACT_TOL;

/// A ground model with a nested family of abstractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingFamily {
    /// Warm–cold training histories up to `horizon`, abstracted by suffix length.
    WarmColdSuffix { train_radius: u32, horizon: usize },
}

/// Reduction errors of one abstraction of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub label: String,
    pub s_phi: usize,
    pub eps_r: f64,
    pub eps_p: f64,
}

/// Successor-weighted reduction errors of each labelled abstraction of `ground`.
pub fn scaling_table(
    ground: &FiniteMdp,
    weights: &NormalizedSr,
    abstractions: &[(String, AbstractionFn)],
) -> Result<Vec<ScalingRow>> {
    abstractions
        .iter()
        .map(|(label, phi)| {
            let abstract_mdp = build_abstract_mdp(ground, phi, weights)?;
            let errors = reduction_errors(ground, phi, &abstract_mdp, weights)?;
            Ok(ScalingRow {
                label: label.clone(),
                s_phi: phi.n_abstract(),
                eps_r: errors.eps_r,
                eps_p: errors.eps_p,
            })
        })
        .collect()
}

/// Errors from the coarsest abstraction through the suffix lengths in
/// `sweep` to the identity, weighted by the uniform-random policy's
/// state-action SR from the family's start distribution.
pub fn approx_error_scaling_probe(family: ScalingFamily, sweep: &[usize]) -> Result<Vec<ScalingRow>> {
    match family {
        ScalingFamily::WarmColdSuffix { train_radius, horizon } => {
            let env = WarmCold::new(WarmColdConfig {
                train_radius,
                ..WarmColdConfig::default()
            })?;
            let starts = env.training_starts();
            let mass = 1.0 / starts.len() as f64;
            let d0: Vec<_> = starts.into_iter().map(|s| (s, mass)).collect();
            let hmdp = enumerate_histories_capped(&env, &d0, horizon, DEFAULT_HISTORY_CAP, Execution::default())?;
            let ground = hmdp.mdp();
            let uniform = Policy::uniform(ground.n_states(), ground.n_actions());
            let weights = normalized_sr(ground, &uniform, hmdp.start_distribution(), SrKind::StateAction, EXACT_TOL)?;
            let mut abstractions = vec![("all_to_one".to_string(), AbstractionFn::all_to_one(ground.n_states()))];
            abstractions.extend(sweep.iter().map(|&k| (format!("suffix_{k}"), key_abstraction(&hmdp, KeyKind::Suffix(k)))));
            abstractions.push(("identity".to_string(), AbstractionFn::identity(ground.n_states())));
            scaling_table(ground, &weights, &abstractions)
        }
    }
}
