//! Two-phase strategy: an SK phase long enough to spread the PAM points at
//! least 4 noise deviations apart, then the high-SNR refinement for the rest
//! of the block with 5 units of energy held back for it.

use std::f64::consts::LN_2;

use crate::highsnr::{refine, simulation_horizon};
use crate::numerics::{
    clopper_pearson, run_trials, tower_g, Interval, Merge, Moments, RngContract, TowerReal,
};
use crate::sk::{capacity, sk_pe_exact, sk_trial, Alphabet, PamConstellation, SkParams};
use crate::{Error, Result};

/// `ln(2 e^3 / sqrt 3)`.
pub const BETA: f64 = 3.0 + LN_2 - 0.549_306_144_334_054_8;

/// Energy held back for the refinement phase.
pub const PHASE2_ENERGY: f64 = 5.0;

/// `(nu/2) ln(1 + S/nu)`: capacity when a fraction `nu` of the uses carries
/// the whole energy budget.
pub fn phi(nu: f64, snr: f64) -> Result<f64> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::domain(format!("nu must be in (0, 1], got {nu}")));
    }
    Ok(0.5 * nu * (snr / nu).ln_1p())
}

/// The `nu` in `(0, 1)` with `phi(nu) = R`, by bisection.
pub fn phi_inverse(rate: f64, snr: f64, tol: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(Error::domain(format!("SNR must be positive, got {snr}")));
    }
    if !(rate > 0.0 && rate < capacity(snr)) {
        return Err(Error::domain(format!("need 0 < R < C(S), got R = {rate}")));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut mid = 0.5;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let v = phi(mid, snr)?;
        if (v - rate).abs() <= tol {
            break;
        }
        if v < rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(mid)
}

/// Split of a block of `n` uses into an SK phase of `n1` uses and a
/// refinement phase of `n2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPhasePlan {
    pub n: usize,
    pub snr: f64,
    pub rate: f64,
    pub alphabet: Alphabet,
    /// `phi^{-1}(R)`.
    pub nu_star: f64,
    /// `nu_n = phi^{-1}(R) + beta (1 - phi^{-1}(R)) / (n (C - R))`.
    pub nu_n: f64,
    pub n1: usize,
    pub n2: usize,
    /// `(nS - 5) / n1`.
    pub phase1_power: f64,
    /// `ln d`, with `d = 2 gamma_{n1}` the exact normalized spacing after phase 1.
    pub ln_spacing: f64,
    /// `ln` of the relaxed lower bound `(2 sqrt 3 / e^3) (1 + nS/n1)^{n1/2} e^{-nR}`.
    pub ln_spacing_chain: f64,
    pub feasible: bool,
}

impl TwoPhasePlan {
    pub fn phase1(&self) -> SkParams {
        SkParams::new(self.n1, self.phase1_power, self.alphabet)
            .expect("phase-1 parameters are validated by the planner")
    }

    pub fn spacing(&self) -> TowerReal {
        TowerReal::from_ln(self.ln_spacing)
    }
}

pub fn plan_finite(n: usize, snr: f64, rate: f64) -> Result<TwoPhasePlan> {
    if n == 0 || !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::domain("need n >= 1 and S > 0"));
    }
    let c = capacity(snr);
    if !(rate > 0.0 && rate < c) {
        return Err(Error::domain(format!("need 0 < R < C(S) = {c}, got R = {rate}")));
    }
    let energy = n as f64 * snr;
    if energy < 6.0 {
        return Err(Error::domain(format!("the plan needs nS >= 6, got {energy}")));
    }
    let gap = c - rate;
    if n as f64 <= BETA / gap {
        return Err(Error::infeasible(format!(
            "n = {n} is at most beta/(C - R) = {:.4}; no room for the refinement phase",
            BETA / gap
        )));
    }
    let nu_star = phi_inverse(rate, snr, 1e-12)?;
    let nu_n = nu_star + BETA * (1.0 - nu_star) / (n as f64 * gap);
    let n1 = ((n as f64 * nu_star + BETA * (1.0 - nu_star) / gap).ceil() as usize).clamp(1, n);
    let n2 = n - n1;
    let phase1_power = (energy - PHASE2_ENERGY) / n1 as f64;
    let alphabet = Alphabet::from_rate(n, rate)?;

    let sk = SkParams::new(n1, phase1_power, alphabet)?;
    let ln_spacing = LN_2 + sk.ln_gamma();
    let ln_spacing_chain = (2.0 * 3f64.sqrt()).ln() - 3.0
        + 0.5 * n1 as f64 * (energy / n1 as f64).ln_1p()
        - n as f64 * rate;
    Ok(TwoPhasePlan {
        n,
        snr,
        rate,
        alphabet,
        nu_star,
        nu_n,
        n1,
        n2,
        phase1_power,
        ln_spacing,
        ln_spacing_chain,
        feasible: ln_spacing >= 4f64.ln(),
    })
}

/// `1 / g_{n2+1}(2)`.
pub fn twophase_upper_bound(plan: &TwoPhasePlan) -> Result<TowerReal> {
    if !plan.feasible {
        return Err(Error::infeasible(format!(
            "phase 1 reaches spacing e^{:.4} < 4",
            plan.ln_spacing
        )));
    }
    Ok(tower_g(plan.n2 as u32 + 1, 2.0).recip())
}

/// Broadband-limit feasibility of the two-phase scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadbandPlan {
    pub power: f64,
    pub duration: f64,
    pub rate: f64,
    /// `T* = (4 + ln 2 - ln(3)/2) / (C_inf - R_inf)`.
    pub threshold: f64,
    /// `ceil(P^2 T^2 / 4)`, phase-1 degrees of freedom that make the penalty a constant.
    pub n1_min: u64,
    /// `ln` of `(2 sqrt 3 / e^4) e^{T (C_inf - R_inf)}`, the spacing guaranteed after phase 1.
    pub ln_spacing_bound: f64,
    pub feasible: bool,
}

pub fn plan_broadband(power: f64, duration: f64, rate: f64) -> Result<BroadbandPlan> {
    if !(power > 0.0 && duration > 0.0 && rate >= 0.0)
        || !(power.is_finite() && duration.is_finite())
    {
        return Err(Error::domain("need P > 0, T > 0 and R >= 0"));
    }
    let c = power / 2.0;
    if !(rate < c) {
        return Err(Error::domain(format!("need R < C_inf = {c}, got {rate}")));
    }
    if power * duration < 6.0 {
        return Err(Error::domain(format!("need PT >= 6, got {}", power * duration)));
    }
    let threshold = (4.0 + LN_2 - 0.5 * 3f64.ln()) / (c - rate);
    let pt = power * duration;
    Ok(BroadbandPlan {
        power,
        duration,
        rate,
        threshold,
        n1_min: (pt * pt / 4.0).ceil() as u64,
        ln_spacing_bound: (2.0 * 3f64.sqrt()).ln() - 4.0 + duration * (c - rate),
        feasible: duration >= threshold,
    })
}

/// Monte Carlo run of the two-phase scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhaseRun {
    pub plan: TwoPhasePlan,
    pub trials: u64,
    /// Errors of the clamped ML decision at the end of phase 1.
    pub phase1_errors: u64,
    /// `2 (M-1)/M Q(gamma_{n1})` at the phase-1 power.
    pub phase1_pe_analytic: f64,
    /// Refinement spacings `d_0 ..= d_k` that were simulated.
    pub spacings: Vec<f64>,
    /// Errors after each simulated refinement step.
    pub step_errors: Vec<u64>,
    pub phase1_energy: Moments,
    pub phase2_energy: Moments,
    pub total_energy: Moments,
    pub upper_bound: TowerReal,
}

impl TwoPhaseRun {
    /// Errors at the end of the last simulated step.
    pub fn errors(&self) -> u64 {
        self.step_errors.last().copied().unwrap_or(self.phase1_errors)
    }

    pub fn pe_interval(&self, level: f64) -> Interval {
        clopper_pearson(self.errors(), self.trials, level)
    }

    pub fn phase1_interval(&self, level: f64) -> Interval {
        clopper_pearson(self.phase1_errors, self.trials, level)
    }
}

#[derive(Clone)]
struct TwoPhaseAcc {
    phase1_errors: u64,
    step_errors: Vec<u64>,
    step_energy: Vec<Moments>,
    phase1: Moments,
    phase2: Moments,
    total: Moments,
}

impl Merge for TwoPhaseAcc {
    fn merge(&mut self, other: Self) {
        self.phase1_errors += other.phase1_errors;
        self.step_errors.merge(other.step_errors);
        self.step_energy.merge(other.step_energy);
        self.phase1.merge(other.phase1);
        self.phase2.merge(other.phase2);
        self.total.merge(other.total);
    }
}

pub fn twophase_simulate(plan: &TwoPhasePlan, trials: u64, rng: &RngContract) -> Result<TwoPhaseRun> {
    let upper_bound = twophase_upper_bound(plan)?;
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let m = plan
        .alphabet
        .size()
        .ok_or_else(|| Error::domain("alphabet too large to simulate (M > 2^53)"))?;
    let pam = PamConstellation::new(m)?;
    let sk = plan.phase1();
    let d0 = sk.ln_d0().exp();
    let spacings = simulation_horizon(plan.ln_spacing.exp(), plan.n2 as u32, trials);
    let refinement = &spacings[1..];
    let k = refinement.len();

    let acc = run_trials(
        trials,
        rng,
        || TwoPhaseAcc {
            phase1_errors: 0,
            step_errors: vec![0; k],
            step_energy: vec![Moments::default(); k],
            phase1: Moments::default(),
            phase2: Moments::default(),
            total: Moments::default(),
        },
        |r, acc| {
            let t = sk_trial(r, &pam, d0, sk.s1, sk.n, |_, _| {});
            let u1 = t.decided as i64 - t.message as i64;
            acc.phase1_errors += u64::from(u1 != 0);
            let (_, e2) = refine(r, u1, refinement, &mut acc.step_errors, &mut acc.step_energy);
            acc.phase1.push(t.energy);
            acc.phase2.push(e2);
            acc.total.push(t.energy + e2);
        },
    );

    Ok(TwoPhaseRun {
        plan: *plan,
        trials,
        phase1_errors: acc.phase1_errors,
        phase1_pe_analytic: sk_pe_exact(&sk),
        spacings,
        step_errors: acc.step_errors,
        phase1_energy: acc.phase1,
        phase2_energy: acc.phase2,
        total_energy: acc.total,
        upper_bound,
    })
}
