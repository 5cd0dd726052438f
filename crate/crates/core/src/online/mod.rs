//! Online learners on manifolds and regret accounting.
//!
//! Each learner follows the same protocol: play a point, receive the gradient
//! of the round's loss at that point, update. States are plain values; a step
//! consumes a reference to the old state and returns the next one.

mod aoogd;
mod corrected;
mod optimistic;
mod regret;

pub use aoogd::{
    aoogd_configure, aoogd_round, Aoogd, AoogdParams, MetaWeights, RoundOutcome, StepSizePool,
};
pub use corrected::{roogd_corrected_init, roogd_corrected_step, CorrectedState};
pub use optimistic::{rogd_step, roogd_init, roogd_step, OptimisticState};
pub use regret::{regret_update, GradientPair, RegretLedger};

/// Largest step for which the optimistic regret bound holds:
/// `sigma0 / (4 zeta0 L)`.
pub fn roogd_step_cap(sigma0: f64, zeta0: f64, smoothness: f64) -> f64 {
    sigma0 / (4.0 * zeta0 * smoothness)
}

/// Step size that balances the dynamic-regret bound when the gradient
/// variation is known in advance, clipped to [`roogd_step_cap`].
pub fn roogd_tuned_step(
    diameter: f64,
    sigma0: f64,
    zeta0: f64,
    lipschitz: f64,
    smoothness: f64,
    variation: f64,
) -> f64 {
    let balanced = (diameter * diameter * sigma0
        / (4.0 * zeta0 * zeta0 * (lipschitz * lipschitz + variation)))
        .sqrt();
    balanced.min(roogd_step_cap(sigma0, zeta0, smoothness))
}
