use crate::error::{Error, Result};

use super::GenerativePomdp;

/// Sparse distribution over latent states, sorted by state.
pub type Belief<S> = Vec<(S, f64)>;

/// Sorts by state, merges duplicates and drops zero entries.
pub(crate) fn merge<S: Ord>(mut entries: Vec<(S, f64)>) -> Belief<S> {
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out: Belief<S> = Vec::with_capacity(entries.len());
    for (s, p) in entries {
        match out.last_mut() {
            Some((last, q)) if *last == s => *q += p,
            _ => out.push((s, p)),
        }
    }
    out.retain(|(_, p)| *p > 0.0);
    out
}

/// Bayes filter step: returns the posterior after taking `action` and seeing
/// `observation`, together with the observation's marginal probability.
pub fn belief_update<P: GenerativePomdp>(
    pomdp: &P,
    belief: &[(P::State, f64)],
    action: usize,
    observation: usize,
) -> Result<(Belief<P::State>, f64)> {
    let total: f64 = belief.iter().map(|(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-9 || belief.iter().any(|(_, p)| *p < 0.0) {
        return Err(Error::Probability {
            context: "belief".into(),
            detail: format!("mass {total}"),
        });
    }
    if action >= pomdp.n_actions() {
        return Err(Error::dim("belief update action", pomdp.n_actions(), action));
    }
    let mut joint = Vec::new();
    for (s, b) in belief {
        for (next, p) in pomdp.transition(s, action) {
            let q: f64 = pomdp
                .observation(&next)
                .iter()
                .filter(|(o, _)| *o == observation)
                .map(|(_, q)| q)
                .sum();
            if q > 0.0 {
                joint.push((next, b * p * q));
            }
        }
    }
    let joint = merge(joint);
    let marginal: f64 = joint.iter().map(|(_, p)| p).sum();
    if marginal <= 0.0 {
        return Err(Error::ImpossibleObservation { action, observation });
    }
    let posterior = joint.into_iter().map(|(s, p)| (s, p / marginal)).collect();
    Ok((posterior, marginal))
}
