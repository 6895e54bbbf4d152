//! The standard normal tail `Q(x) = P[N(0,1) > x]`, directly and in log domain.

use std::f64::consts::{LN_2, SQRT_2};

use libm::erfc;

use super::tower::TowerReal;
use crate::{Error, Result};

/// Above this argument `q` is evaluated through the log-domain tail.
pub const Q_SWITCH: f64 = 8.0;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const MILLS_TERMS: u32 = 80;
/// Past this argument `ln Q(x)` is `-x^2/2` to within the resolution of an `f64`.
const LEADING_ORDER_ARG: f64 = 1e150;

pub fn q(x: f64) -> f64 {
    if x > Q_SWITCH {
        log_q_continued_fraction(x).exp()
    } else if x < -Q_SWITCH {
        1.0 - q(-x)
    } else {
        0.5 * erfc(x / SQRT_2)
    }
}

/// `ln Q(x)` for `x > 0`. Never underflows.
pub fn log_q(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_q needs a positive finite argument, got {x}")));
    }
    Ok(if x <= Q_SWITCH { q(x).ln() } else { log_q_continued_fraction(x) })
}

/// `ln Q(x)` from the Laplace continued fraction for the Mills ratio,
/// `Q(x) = phi(x) / (x + 1/(x + 2/(x + 3/(x + ...))))`.
///
/// Accurate to double precision for `x >= 8`; usable (less accurate) down to
/// about `x = 3`.
pub fn log_q_continued_fraction(x: f64) -> f64 {
    let mut t = x;
    for k in (1..=MILLS_TERMS).rev() {
        t = x + f64::from(k) / t;
    }
    -0.5 * x * x - LN_SQRT_2PI - t.ln()
}

/// `c * Q(x)` as a tower value, given `ln c` and `ln x`.
///
/// For `x` beyond `1e150` only the leading term `ln Q(x) = -x^2/2` is kept;
/// the dropped terms are `O(ln x)` against an exponent above `5e299`, below
/// the resolution of the stored logarithm.
pub fn scaled_q_tower(ln_coeff: f64, ln_x: f64) -> TowerReal {
    let x = ln_x.exp();
    if x < LEADING_ORDER_ARG {
        let lq = if x <= Q_SWITCH { q(x).ln() } else { log_q_continued_fraction(x) };
        TowerReal::from_ln(ln_coeff + lq)
    } else {
        // x^2 / 2 as a tower, then e^{-x^2/2}
        TowerReal::from_ln(2.0 * ln_x - LN_2).exp_neg()
    }
}
