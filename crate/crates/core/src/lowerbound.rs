//! Lower bounds on the error probability of any feedback code: the binary
//! recursion, its `n`th-order closed form, and the `M`-ary bound built from a
//! Fano segment followed by a binary reduction.

use std::f64::consts::LN_2;

use crate::elias::EnergySchedule;
use crate::numerics::{log_q, q, scaled_q_tower, tower_g, TowerReal};
use crate::sk::capacity;
use crate::twophase::{phi_inverse, plan_finite, twophase_upper_bound};
use crate::{Error, Result};

/// Error probability of binary MAP detection with priors `phi` and `1 - phi`
/// when the two inputs are spread to mean energy `s_tilde`.
pub fn binary_exact_psi(phi: f64, s_tilde: f64) -> Result<f64> {
    if !(phi > 0.0 && phi <= 0.5) || !(s_tilde >= 0.0) || !s_tilde.is_finite() {
        return Err(Error::domain(format!(
            "need 0 < phi <= 1/2 and s >= 0, got phi = {phi}, s = {s_tilde}"
        )));
    }
    let a = (s_tilde / (4.0 * phi * (1.0 - phi))).sqrt();
    if a == 0.0 {
        return Ok(phi);
    }
    let shift = ((1.0 - phi) / phi).ln() / (2.0 * a);
    Ok((1.0 - phi) * q(a + shift) + phi * q(a - shift))
}

/// `p Q(sqrt(s / (2p)))`, one step of the binary recursion.
///
/// When `s/(2p)` is beyond `f64` range the result is `e^{-s/(4p)}` at leading
/// order; the dropped terms are below the resolution of the stored logarithm.
pub fn binary_step(p_prev: &TowerReal, s: f64) -> Result<TowerReal> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("step energy must be positive, got {s}")));
    }
    if *p_prev > TowerReal::from_f64(0.5) {
        return Err(Error::domain(format!("p must be at most 1/2, got {p_prev}")));
    }
    match p_prev.ln() {
        Some(lp) => Ok(scaled_q_tower(lp, 0.5 * ((s / 2.0).ln() - lp))),
        None => Ok(p_prev.recip().scale(s / 4.0)?.exp_neg()),
    }
}

/// `p_0, p_1, ..., p_n` from the binary recursion over `schedule`.
pub fn binary_lower_trace(schedule: &EnergySchedule, p0: f64) -> Result<Vec<TowerReal>> {
    if !(p0 > 0.0 && p0 <= 0.5) {
        return Err(Error::domain(format!("p0 must be in (0, 1/2], got {p0}")));
    }
    let mut trace = vec![TowerReal::from_f64(p0)];
    for &s in schedule.energies() {
        let next = binary_step(trace.last().expect("trace starts with p0"), s)?;
        trace.push(next);
    }
    Ok(trace)
}

pub fn binary_lower_recursive(schedule: &EnergySchedule, p0: f64) -> Result<TowerReal> {
    Ok(binary_lower_trace(schedule, p0)?.pop().expect("trace is non-empty"))
}

/// The recursion with every `S_i` relaxed to the whole budget `nS`.
pub fn binary_lower_relaxed(n: usize, snr: f64) -> Result<TowerReal> {
    binary_lower_recursive(&EnergySchedule::uniform(n, n as f64 * snr), 0.5)
}

/// `(nS/2) / g_n(max(nS, 9))`.
pub fn binary_lower_closed(n: usize, snr: f64) -> Result<TowerReal> {
    if n == 0 || !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::domain("need n >= 1 and S > 0"));
    }
    let energy = n as f64 * snr;
    tower_g(n as u32, energy.max(9.0)).recip().scale(energy / 2.0)
}

/// `ln[(1/x) Q(sqrt x)]`.
pub fn ninebound_lhs_ln(x: f64) -> Result<f64> {
    Ok(-x.ln() + log_q(x.sqrt())?)
}

/// Whether `(1/x) Q(sqrt x) >= e^{-x}`.
pub fn ninebound_check(x: f64) -> Result<bool> {
    if !(x >= 9.0) || !x.is_finite() {
        return Err(Error::domain(format!("the check applies for x >= 9, got {x}")));
    }
    Ok(ninebound_lhs_ln(x)? >= -x)
}

/// On an increasing grid, checks that `(1/x) Q(sqrt x)` decreases and that
/// `e^{-x}` decreases faster, so the gap between the logs never shrinks.
pub fn ninebound_decreasing(grid: &[f64]) -> Result<bool> {
    let mut last: Option<(f64, f64)> = None;
    for &x in grid {
        let lhs = ninebound_lhs_ln(x)?;
        let margin = lhs + x;
        if let Some((l, m)) = last {
            if !(lhs < l && margin >= m) {
                return Ok(false);
            }
        }
        last = Some((lhs, margin));
    }
    Ok(true)
}

/// Two-way split of a message distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    pub side1: Vec<usize>,
    pub side2: Vec<usize>,
    pub mass1: f64,
    pub mass2: f64,
    pub phi_max: f64,
    /// Largest `|mass1 - mass2|` seen while assigning.
    pub max_running_gap: f64,
}

impl PartitionResult {
    pub fn min_mass(&self) -> f64 {
        self.mass1.min(self.mass2)
    }

    /// `min side >= (1 - phi_max)/2` up to summation rounding.
    pub fn satisfies_guarantee(&self) -> bool {
        let m = (self.side1.len() + self.side2.len()) as f64;
        let slack = 4.0 * m * f64::EPSILON;
        self.min_mass() + slack >= (1.0 - self.phi_max) / 2.0
            && self.max_running_gap <= self.phi_max + slack
    }
}

/// Greedy split: most likely message first, each to the lighter side, ties
/// to side 1.
pub fn partition_messages(phis: &[f64]) -> Result<PartitionResult> {
    if phis.len() < 2 {
        return Err(Error::InvalidDistribution("need at least 2 messages".into()));
    }
    if phis.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidDistribution("probabilities must be non-negative".into()));
    }
    let total: f64 = phis.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    let mut order: Vec<usize> = (0..phis.len()).collect();
    order.sort_by(|&a, &b| phis[b].total_cmp(&phis[a]));

    let (mut side1, mut side2) = (Vec::new(), Vec::new());
    let (mut mass1, mut mass2) = (0.0f64, 0.0f64);
    let mut max_running_gap = 0.0f64;
    for i in order {
        if mass1 <= mass2 {
            side1.push(i);
            mass1 += phis[i];
        } else {
            side2.push(i);
            mass2 += phis[i];
        }
        max_running_gap = max_running_gap.max((mass1 - mass2).abs());
    }
    Ok(PartitionResult {
        side1,
        side2,
        mass1,
        mass2,
        phi_max: phis.iter().copied().fold(0.0, f64::max),
        max_running_gap,
    })
}

/// Lower bound for rate-`R` codes of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaryLower {
    pub bound: TowerReal,
    pub n1: usize,
    pub n2: usize,
    /// `(1 - ln 2)/(nR)`, the Fano floor on the error after `n1` uses.
    pub fano_floor: f64,
    /// `max(n^2 S R / (1 - ln 2), 9)`.
    pub argument: f64,
}

pub fn mary_lower(n: usize, snr: f64, rate: f64) -> Result<MaryLower> {
    if n == 0 || !(snr > 0.0) || !(rate > 0.0) {
        return Err(Error::domain("need n >= 1, S > 0 and R > 0"));
    }
    let c = capacity(snr);
    if rate >= c {
        return Err(Error::infeasible(format!("need R < C(S) = {c}, got {rate}")));
    }
    let nu = phi_inverse(rate, snr, 1e-12)?;
    let n1 = (n as f64 * nu - (1.0 - nu) / (c - rate)).floor();
    if n1 < 1.0 {
        return Err(Error::infeasible(format!("block too short: n1 = {n1} < 1")));
    }
    let n1 = n1 as usize;
    let n2 = n - n1;
    let nf = n as f64;
    let fano_floor = (1.0 - LN_2) / (nf * rate);
    let argument = (nf * nf * snr * rate / (1.0 - LN_2)).max(9.0);
    let bound = tower_g(n2 as u32, argument).recip().scale(nf * snr / 2.0)?;
    Ok(MaryLower { bound, n1, n2, fano_floor, argument })
}

/// Exponential order of a value below one: `k` for `1/g_k(y)` with `y` in `[1, e)`.
pub fn exponential_order(v: &TowerReal) -> u32 {
    match v {
        TowerReal::ExpTower { .. } => v.height() + 1,
        TowerReal::Moderate(x) => u32::from(*x <= (-1f64).exp()),
    }
}

/// Lower and upper bounds side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct Sandwich {
    pub lower: TowerReal,
    pub upper: TowerReal,
    pub consistent: bool,
    /// `n2` of the lower bound, the order of `g` in it.
    pub lower_order: usize,
    /// `n2 + 1` of the two-phase plan.
    pub upper_order: usize,
    pub lower_measured_order: u32,
    pub upper_measured_order: u32,
    /// `n (1 - phi^{-1}(R))`, the common asymptotic order.
    pub asymptotic_order: f64,
}

pub fn bound_sandwich(n: usize, snr: f64, rate: f64) -> Result<Sandwich> {
    let lower = mary_lower(n, snr, rate)?;
    let plan = plan_finite(n, snr, rate)?;
    let upper = twophase_upper_bound(&plan)?;
    Ok(Sandwich {
        consistent: lower.bound <= upper,
        lower_order: lower.n2,
        upper_order: plan.n2 + 1,
        lower_measured_order: exponential_order(&lower.bound),
        upper_measured_order: exponential_order(&upper),
        asymptotic_order: n as f64 * (1.0 - plan.nu_star),
        lower: lower.bound,
        upper,
    })
}
