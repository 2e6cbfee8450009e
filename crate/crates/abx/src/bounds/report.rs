use serde::{Deserialize, Serialize};

/// Absolute slack allowed before a bound counts as violated.
pub const HOLDS_TOL: f64 = 1e-8;

/// Additive terms of a bound, each already scaled by `1/(1-γ)`.
///
/// Terms a bound does not use stay at zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundComponents {
    pub reward_approx: f64,
    pub transition_approx: f64,
    pub reward_ood: f64,
    pub transition_ood: f64,
    pub unknown_mass: f64,
    pub known_mass: f64,
    /// Bellman-residual terms of the telescoping bound.
    pub bellman_residual: f64,
}

impl BoundComponents {
    pub fn total(&self) -> f64 {
        self.reward_approx
            + self.transition_approx
            + self.reward_ood
            + self.transition_ood
            + self.unknown_mass
            + self.known_mass
            + self.bellman_residual
    }
}

/// A bound evaluated on one instance next to the gap it is meant to cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_value: f64,
    pub components: BoundComponents,
    pub empirical_gap: f64,
    /// `empirical_gap <= bound_value + HOLDS_TOL`.
    pub holds: bool,
    /// `bound_value - empirical_gap`.
    pub slack: f64,
}

impl BoundReport {
    pub fn new(components: BoundComponents, empirical_gap: f64) -> Self {
        Self::with_value(components.total(), components, empirical_gap)
    }

    pub fn with_value(bound_value: f64, components: BoundComponents, empirical_gap: f64) -> Self {
        Self {
            bound_value,
            components,
            empirical_gap,
            holds: empirical_gap <= bound_value + HOLDS_TOL,
            slack: bound_value - empirical_gap,
        }
    }
}
