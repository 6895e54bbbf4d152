//! Elias's feedback scheme for sending one Gaussian variable over `n` uses.
//!
//! At each use the transmitter sends the receiver's current estimation error,
//! scaled to the use's energy budget; the receiver adds the MMSE estimate of
//! that error to its running estimate. After `n` uses the error variance is
//! `sigma_1^2 / prod(1 + S_i)`, which meets the rate-distortion bound.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{run_trials, Merge, Moments, RngContract};
use crate::{Error, Result};

/// Block length and per-use SNR of a unit-noise-variance channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub n: usize,
    pub snr: f64,
}

impl ChannelConfig {
    pub fn new(n: usize, snr: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("block length must be at least 1"));
        }
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(Error::domain(format!("SNR must be positive, got {snr}")));
        }
        Ok(ChannelConfig { n, snr })
    }

    pub fn total_energy(&self) -> f64 {
        self.n as f64 * self.snr
    }
}

/// Per-use second moments `S_1..S_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySchedule(Vec<f64>);

impl EnergySchedule {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::domain("energy schedule is empty"));
        }
        if let Some(bad) = energies.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(Error::domain(format!("energy {bad} is not a non-negative number")));
        }
        Ok(EnergySchedule(energies))
    }

    pub fn uniform(n: usize, snr: f64) -> Self {
        EnergySchedule(vec![snr; n])
    }

    pub fn energies(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Checks the schedule against a channel's length and energy budget `nS`.
    pub fn check(&self, config: &ChannelConfig) -> Result<()> {
        if self.len() != config.n {
            return Err(Error::domain(format!(
                "schedule has {} entries for a block of {}",
                self.len(),
                config.n
            )));
        }
        let budget = config.total_energy();
        if self.total() > budget * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "schedule uses {} > budget {budget}",
                self.total()
            )));
        }
        Ok(())
    }
}

/// Error variance after the whole schedule, `sigma_1^2 / prod(1 + S_i)`.
pub fn elias_analytic_mse(sigma1_sq: f64, schedule: &EnergySchedule) -> f64 {
    let log_gain: f64 = schedule.energies().iter().map(|s| s.ln_1p()).sum();
    (sigma1_sq.ln() - log_gain).exp()
}

/// `R(d) = ln(sigma^2 / d) / 2`, the rate-distortion function of a Gaussian
/// source under squared error.
pub fn rate_distortion_floor(sigma1_sq: f64, d: f64) -> Result<f64> {
    if !(sigma1_sq > 0.0) || !(d > 0.0) || d > sigma1_sq {
        return Err(Error::domain(format!(
            "need 0 < d <= sigma^2, got d = {d}, sigma^2 = {sigma1_sq}"
        )));
    }
    Ok(0.5 * (sigma1_sq / d).ln())
}

/// One use of the Elias recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EliasStep {
    /// Error being sent, `U_i`.
    pub error: f64,
    pub input: f64,
    pub output: f64,
    /// Receiver's MMSE estimate `E[U_i | Y_i]`.
    pub estimate: f64,
    /// Variance of `U_i`.
    pub variance: f64,
}

/// Applies one use with energy `energy` to the error `u` of variance
/// `sigma_sq`, given the noise sample. Zero-energy uses send nothing and leave
/// the error unchanged.
#[inline]
pub(crate) fn elias_step(u: f64, sigma_sq: f64, energy: f64, noise: f64) -> EliasStep {
    if energy == 0.0 {
        return EliasStep { error: u, input: 0.0, output: noise, estimate: 0.0, variance: sigma_sq };
    }
    let sigma = sigma_sq.sqrt();
    let root = energy.sqrt();
    let input = root * u / sigma;
    let output = input + noise;
    let estimate = sigma * root * output / (1.0 + energy);
    EliasStep { error: u, input, output, estimate, variance: sigma_sq }
}

/// A single run with every intermediate value kept.
#[derive(Debug, Clone, PartialEq)]
pub struct EliasTrace {
    pub steps: Vec<EliasStep>,
    /// `U_{n+1}`, the error of the final estimate.
    pub final_error: f64,
}

impl EliasTrace {
    /// Recomputes every update `U_{i+1} = U_i - sigma_i sqrt(S_i) Y_i / (1 + S_i)`
    /// and checks it matches the stored chain bit for bit.
    pub fn is_consistent(&self, schedule: &EnergySchedule) -> bool {
        let mut next = self.steps.iter().map(|s| s.error).skip(1).chain([self.final_error]);
        self.steps.iter().zip(schedule.energies()).all(|(s, &e)| {
            let expect = if e == 0.0 {
                s.error
            } else {
                s.error - s.variance.sqrt() * e.sqrt() * s.output / (1.0 + e)
            };
            next.next() == Some(expect)
        })
    }
}

pub fn elias_trace(sigma1_sq: f64, schedule: &EnergySchedule, rng: &RngContract) -> EliasTrace {
    let mut r = rng.rng();
    let mut u = sigma1_sq.sqrt() * r.sample::<f64, _>(StandardNormal);
    let mut sigma_sq = sigma1_sq;
    let mut steps = Vec::with_capacity(schedule.len());
    for &energy in schedule.energies() {
        let step = elias_step(u, sigma_sq, energy, r.sample(StandardNormal));
        u -= step.estimate;
        sigma_sq /= 1.0 + energy;
        steps.push(step);
    }
    EliasTrace { steps, final_error: u }
}

/// Monte Carlo estimate of the Elias scheme's performance.
#[derive(Debug, Clone, PartialEq)]
pub struct EliasRun {
    pub trials: u64,
    pub sigma1_sq: f64,
    pub analytic_mse: f64,
    /// Second moment of the final error `U_{n+1}`.
    pub mse: Moments,
    /// Per use: sample of `X_i^2`.
    pub energy: Vec<Moments>,
    /// Per use: sample of `U_{i+1}^2`.
    pub error_power: Vec<Moments>,
    /// Per use: analytic `sigma_{i+1}^2`.
    pub analytic_error_power: Vec<f64>,
    /// Sample of `sum_i X_i^2`.
    pub total_energy: Moments,
}

#[derive(Clone)]
struct EliasAcc {
    mse: Moments,
    energy: Vec<Moments>,
    error_power: Vec<Moments>,
    total: Moments,
}

impl Merge for EliasAcc {
    fn merge(&mut self, other: Self) {
        self.mse.merge(other.mse);
        self.energy.merge(other.energy);
        self.error_power.merge(other.error_power);
        self.total.merge(other.total);
    }
}

pub fn elias_simulate(
    config: &ChannelConfig,
    schedule: &EnergySchedule,
    sigma1_sq: f64,
    trials: u64,
    rng: &RngContract,
) -> Result<EliasRun> {
    schedule.check(config)?;
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    if !(sigma1_sq > 0.0) {
        return Err(Error::domain("source variance must be positive"));
    }
    let n = config.n;
    let energies = schedule.energies();
    let sigma = sigma1_sq.sqrt();

    let acc = run_trials(
        trials,
        rng,
        || EliasAcc {
            mse: Moments::default(),
            energy: vec![Moments::default(); n],
            error_power: vec![Moments::default(); n],
            total: Moments::default(),
        },
        |r, acc| {
            let mut u = sigma * r.sample::<f64, _>(StandardNormal);
            let mut sigma_sq = sigma1_sq;
            let mut total = 0.0;
            for (i, &energy) in energies.iter().enumerate() {
                let step = elias_step(u, sigma_sq, energy, r.sample(StandardNormal));
                u -= step.estimate;
                sigma_sq /= 1.0 + energy;
                let x2 = step.input * step.input;
                acc.energy[i].push(x2);
                acc.error_power[i].push(u * u);
                total += x2;
            }
            acc.mse.push(u * u);
            acc.total.push(total);
        },
    );

    let mut analytic_error_power = Vec::with_capacity(n);
    let mut s2 = sigma1_sq;
    for &e in energies {
        s2 /= 1.0 + e;
        analytic_error_power.push(s2);
    }

    Ok(EliasRun {
        trials,
        sigma1_sq,
        analytic_mse: elias_analytic_mse(sigma1_sq, schedule),
        mse: acc.mse,
        energy: acc.energy,
        error_power: acc.error_power,
        analytic_error_power,
        total_energy: acc.total,
    })
}
