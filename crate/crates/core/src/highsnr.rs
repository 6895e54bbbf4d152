//! The high-SNR refinement scheme: once PAM points are at least 4 noise
//! standard deviations apart, the transmitter resends the integer error of the
//! receiver's tentative decision with a spacing that grows as an iterated
//! exponential.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{
    clopper_pearson, log_q, q, run_trials, tower_g, Interval, Merge, Moments, RngContract,
    TowerReal,
};
use crate::{Error, Result};

/// Smallest initial spacing covered by the guarantees.
pub const MIN_D0: f64 = 4.0;

/// The `d`-quantization of `y`: the unique `l` with `y` in `(dl - d/2, dl + d/2]`.
#[inline]
pub fn quantize(y: f64, d: f64) -> i64 {
    (y / d - 0.5).ceil() as i64
}

/// `(1.6/d) e^{-d^2/8}`, a bound on the second moment of the `d`-quantization
/// of a standard normal variable.
pub fn lemma1_bound(d: f64) -> Result<f64> {
    if !(d >= MIN_D0) {
        return Err(Error::domain(format!("the second-moment bound needs d >= 4, got {d}")));
    }
    Ok(1.6 / d * (-d * d / 8.0).exp())
}

/// Second moment of the `d`-quantization of `N(0,1)` by direct summation of
/// `2 sum l^2 [Q(dl - d/2) - Q(dl + d/2)]`, stopping once a term falls below
/// `tol` times the partial sum. Returns the sum and the number of terms used.
pub fn lemma1_series(d: f64, tol: f64) -> Result<(f64, u64)> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("spacing must be positive, got {d}")));
    }
    let mut sum = 0.0;
    let mut terms = 0;
    loop {
        terms += 1;
        let l = terms as f64;
        let term = 2.0 * l * l * (q(d * l - d / 2.0) - q(d * l + d / 2.0));
        sum += term;
        if term <= tol * sum {
            return Ok((sum, terms));
        }
    }
}

/// Bounds for one refinement step `i >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGuarantee {
    pub step: u32,
    /// `d_i^2 / 8 = g_i(d_0^2 / 8)`.
    pub spacing_sq_over_8: TowerReal,
    pub spacing: TowerReal,
    /// `12.8 / d_{i-1}`, a bound on `E[X_i^2]`.
    pub energy_bound: f64,
    /// `1 / g_{i+1}(2)`, a bound on the step-`i` decision error.
    pub error_bound: TowerReal,
    /// `e^{-d_i^2/8}`, the sharper intermediate bound.
    pub tight_error_bound: TowerReal,
}

fn check_d0(d0: f64) -> Result<()> {
    if !(d0 >= MIN_D0) || !d0.is_finite() {
        return Err(Error::domain(format!("initial spacing must be at least 4, got {d0}")));
    }
    Ok(())
}

/// Spacings, energy and error bounds for steps `1..=steps`.
pub fn highsnr_guarantees(d0: f64, steps: u32) -> Result<Vec<StepGuarantee>> {
    check_d0(d0)?;
    let mut out = Vec::with_capacity(steps as usize);
    // d_{i-1}^2/8 and d_{i-1}
    let mut prev_sq8 = TowerReal::from_f64(d0 * d0 / 8.0);
    let mut prev_d = TowerReal::from_f64(d0);
    for i in 1..=steps {
        let sq8 = if i == 1 { TowerReal::from_ln(d0 * d0 / 8.0) } else { prev_sq8.exp() };
        let spacing = prev_sq8.scale(0.5)?.exp().scale(8f64.sqrt())?;
        let energy_bound = prev_d.recip().scale(12.8)?.to_f64();
        out.push(StepGuarantee {
            step: i,
            spacing_sq_over_8: sq8,
            spacing,
            energy_bound,
            error_bound: tower_g(i + 1, 2.0).recip(),
            tight_error_bound: sq8.exp_neg(),
        });
        prev_sq8 = sq8;
        prev_d = spacing;
    }
    Ok(out)
}

/// Sum over all steps of the energy bounds `12.8 / d_{i-1}`.
pub fn total_energy_bound(d0: f64) -> Result<f64> {
    // terms past the third are below 1e-300 for any d0 >= 4
    Ok(highsnr_guarantees(d0, 8)?.iter().map(|g| g.energy_bound).sum())
}

/// Spacings `d_0, d_1, ...` that a simulation with `trials` trials can observe.
/// Step `i > 1` is kept only while errors at step `i - 1` remain observable,
/// i.e. `2 ln Q(d_{i-1}/2) >= ln(1/trials) - 10`.
pub fn simulation_horizon(d0: f64, steps: u32, trials: u64) -> Vec<f64> {
    let floor = -(trials as f64).ln() - 10.0;
    let mut spacings = vec![d0];
    for i in 1..=steps {
        let prev = spacings[i as usize - 1];
        let d = 8f64.sqrt() * (prev * prev / 16.0).exp();
        if !d.is_finite() {
            break;
        }
        if i > 1 && 2.0 * log_q(prev / 2.0).unwrap_or(0.0) < floor {
            break;
        }
        spacings.push(d);
    }
    spacings
}

/// Monte Carlo run of the high-SNR scheme. Index 0 of the per-step vectors
/// is the time-0 PAM transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct HighSnrRun {
    pub d0: f64,
    pub m: u64,
    pub trials: u64,
    pub requested_steps: u32,
    /// `d_0 ..= d_k` for the simulated steps.
    pub spacings: Vec<f64>,
    /// Trials whose tentative decision after step `i` is wrong.
    pub errors: Vec<u64>,
    pub energy: Vec<Moments>,
    /// `sum_{i >= 1} X_i^2`.
    pub refinement_energy: Moments,
    pub guarantees: Vec<StepGuarantee>,
}

impl HighSnrRun {
    pub fn simulated_steps(&self) -> usize {
        self.spacings.len() - 1
    }

    pub fn error_rate(&self, step: usize) -> f64 {
        self.errors[step] as f64 / self.trials as f64
    }

    pub fn error_interval(&self, step: usize, level: f64) -> Interval {
        clopper_pearson(self.errors[step], self.trials, level)
    }

    /// Error after the last simulated step; later steps cannot make it worse
    /// in expectation, so this is what the run reports for the whole block.
    pub fn final_errors(&self) -> u64 {
        *self.errors.last().expect("time 0 is always simulated")
    }
}

#[derive(Clone)]
struct HighSnrAcc {
    errors: Vec<u64>,
    energy: Vec<Moments>,
    refinement: Moments,
}

impl Merge for HighSnrAcc {
    fn merge(&mut self, other: Self) {
        self.errors.merge(other.errors);
        self.energy.merge(other.energy);
        self.refinement.merge(other.refinement);
    }
}

/// Runs steps `1..=k` of the refinement from the tentative decision error
/// `u1 = m_hat_0 - m`, recording per-step errors and energies from index 1.
#[inline]
pub(crate) fn refine<R: Rng>(
    r: &mut R,
    mut u: i64,
    spacings: &[f64],
    errors: &mut [u64],
    energy: &mut [Moments],
) -> (i64, f64) {
    let mut total = 0.0;
    for (i, &d) in spacings.iter().enumerate() {
        let x = if u == 0 { 0.0 } else { d * u as f64 };
        let y = x + r.sample::<f64, _>(StandardNormal);
        u -= quantize(y, d);
        errors[i] += u64::from(u != 0);
        energy[i].push(x * x);
        total += x * x;
    }
    (u, total)
}

pub fn highsnr_simulate(
    d0: f64,
    steps: u32,
    m: u64,
    trials: u64,
    rng: &RngContract,
) -> Result<HighSnrRun> {
    check_d0(d0)?;
    if steps == 0 || trials == 0 {
        return Err(Error::domain("need at least one step and one trial"));
    }
    if !(2..=crate::sk::MAX_EXACT_M).contains(&m) {
        return Err(Error::domain(format!("alphabet size must be in [2, 2^53], got {m}")));
    }
    let spacings = simulation_horizon(d0, steps, trials);
    let k = spacings.len();
    let offset = (m as f64 + 1.0) / 2.0;

    let acc = run_trials(
        trials,
        rng,
        || HighSnrAcc {
            errors: vec![0; k],
            energy: vec![Moments::default(); k],
            refinement: Moments::default(),
        },
        |r, acc| {
            let message = r.random_range(1..=m);
            let x0 = d0 * (message as f64 - offset);
            let y0 = x0 + r.sample::<f64, _>(StandardNormal);
            // unclamped ML decision on the shifted PAM grid
            let decided = quantize(y0 + d0 * offset, d0);
            let u1 = decided - message as i64;
            acc.errors[0] += u64::from(u1 != 0);
            acc.energy[0].push(x0 * x0);
            let (_, total) =
                refine(r, u1, &spacings[1..], &mut acc.errors[1..], &mut acc.energy[1..]);
            acc.refinement.push(total);
        },
    );

    Ok(HighSnrRun {
        d0,
        m,
        trials,
        requested_steps: steps,
        spacings,
        errors: acc.errors,
        energy: acc.energy,
        refinement_energy: acc.refinement,
        guarantees: highsnr_guarantees(d0, steps)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_cells() {
        assert_eq!(quantize(0.0, 4.0), 0);
        assert_eq!(quantize(2.0, 4.0), 0);
        assert_eq!(quantize(2.0000001, 4.0), 1);
        assert_eq!(quantize(-2.0, 4.0), -1);
        assert_eq!(quantize(-1.9999999, 4.0), 0);
        assert_eq!(quantize(10.0, 4.0), 2);
    }

    #[test]
    fn energy_series_examples() {
        assert!((lemma1_bound(4.0).unwrap() - 0.054_134_113_294_645_07).abs() < 1e-15);
        assert!((lemma1_bound(8.0).unwrap() - 6.709_252_558_050_237e-5).abs() < 1e-18);
        assert!(lemma1_bound(3.9).is_err());
        let (s, _) = lemma1_series(4.0, 1e-15).unwrap();
        let lead = 2.0 * q(2.0);
        assert!((lead - 0.04550).abs() < 1e-5);
        assert!(s >= lead - 2.0 * q(6.0) && s - lead < 1e-7);
        assert!(s <= lemma1_bound(4.0).unwrap());
        let mut last = f64::INFINITY;
        for d in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let (v, _) = lemma1_series(d, 1e-15).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn guarantees_for_d0_4() {
        let g = highsnr_guarantees(4.0, 3).unwrap();
        assert!((g[0].spacing.to_f64() - 8f64.sqrt() * std::f64::consts::E).abs() < 1e-12);
        assert!((g[0].spacing.to_f64() - 7.6885).abs() < 1e-4);
        assert!((g[0].energy_bound - 3.2).abs() < 1e-15);
        assert!((g[1].energy_bound - 1.6648).abs() < 1e-4);
        assert!((g[2].energy_bound - 0.1126).abs() < 1e-3);
        assert_eq!(g[1].error_bound.human(), "e^-1618.18");
        assert!((g[0].error_bound.to_f64() - 6.18e-4).abs() < 1e-6);
        let total = total_energy_bound(4.0).unwrap();
        assert!(total <= 5.0 && total > 4.97);
    }

    #[test]
    fn tracked_spacing_matches_tower_g() {
        let g = highsnr_guarantees(4.0, 40).unwrap();
        for s in &g {
            assert_eq!(s.spacing_sq_over_8, tower_g(s.step, 2.0));
            assert!(s.tight_error_bound <= s.error_bound);
        }
    }

    #[test]
    fn horizon_keeps_two_steps_for_d0_4() {
        assert_eq!(simulation_horizon(4.0, 5, 10_000_000).len(), 3);
        assert_eq!(simulation_horizon(4.0, 1, 10).len(), 2);
    }

    #[test]
    fn simulation_respects_step1_bound() {
        let run = highsnr_simulate(4.0, 2, 8, 1_000_000, &RngContract::new(21, 0)).unwrap();
        let step1 = run.error_interval(1, 0.99);
        assert!(step1.low <= 2.0 * q(run.spacings[1] / 2.0) * 1.01);
        assert!(run.error_rate(1) <= run.guarantees[0].error_bound.to_f64());
        assert_eq!(run.errors[2], 0);
    }
}
