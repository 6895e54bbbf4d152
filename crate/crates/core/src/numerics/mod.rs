//! Shared numerical layer: extended-range reals, the Gaussian tail function,
//! seeded random streams and small statistics helpers.

mod gaussian;
mod rng;
mod stats;
mod tower;

pub use gaussian::{log_q, log_q_continued_fraction, q, scaled_q_tower, Q_SWITCH};
pub use rng::{RngContract, BATCH_TRIALS};
pub use stats::{clopper_pearson, Interval, Moments};
pub use tower::{tower_compare, tower_g, tower_scale, Side, TowerReal, LN_MODERATE_MAX};

pub(crate) use rng::run_trials;
pub(crate) use stats::Merge;
