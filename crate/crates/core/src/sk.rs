//! The feedback block code: `M`-PAM at time 0, then `n - 1` uses
//! of the Elias scheme to send the time-0 noise, then ML detection.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::elias::elias_step;
use crate::numerics::{
    clopper_pearson, log_q, q, run_trials, scaled_q_tower, Interval, Merge, Moments, RngContract,
    TowerReal,
};
use crate::{Error, Result};

/// Largest alphabet size handled with an exact integer.
pub const MAX_EXACT_M: u64 = 1 << 53;

/// `C(S) = ln(1 + S) / 2` in nats per use.
pub fn capacity(snr: f64) -> f64 {
    0.5 * snr.ln_1p()
}

/// Size of the message set. Small alphabets keep the exact integer `M`;
/// alphabets beyond `2^53` keep only `ln M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alphabet {
    ln_m: f64,
    m: Option<u64>,
}

impl Alphabet {
    pub fn from_size(m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!("alphabet needs M >= 2, got {m}")));
        }
        Ok(Alphabet { ln_m: (m as f64).ln(), m: (m <= MAX_EXACT_M).then_some(m) })
    }

    /// `M = ceil(e^{nR})`. A value within `1e-9` (relative) of an integer
    /// counts as that integer, so `R = ln(M)/n` gives back `M`.
    pub fn from_rate(n: usize, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::domain(format!("rate must be non-negative, got {rate}")));
        }
        let ln_m = n as f64 * rate;
        if ln_m > (MAX_EXACT_M as f64).ln() {
            return Ok(Alphabet { ln_m, m: None });
        }
        let v = ln_m.exp();
        let near = v.round();
        let m = if (near - v).abs() <= 1e-9 * v { near } else { v.ceil() } as u64;
        Alphabet::from_size(m).map_err(|_| {
            Error::domain(format!("rate {rate} over {n} uses gives fewer than 2 messages"))
        })
    }

    pub fn ln_m(&self) -> f64 {
        self.ln_m
    }

    /// The exact size, when it fits below `2^53`.
    pub fn size(&self) -> Option<u64> {
        self.m
    }

    /// `ln(M^2 - 1)`.
    pub fn ln_m2_minus_1(&self) -> f64 {
        match self.m {
            Some(m) => ((m - 1) as f64).ln() + ((m + 1) as f64).ln(),
            None => 2.0 * self.ln_m,
        }
    }

    /// `ln((M - 1) / M)`.
    pub fn ln_edge_factor(&self) -> f64 {
        (-(-self.ln_m).exp()).ln_1p()
    }
}

/// Standard `M`-PAM with unit spacing: `a_m = m - (M + 1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PamConstellation {
    m: u64,
}

impl PamConstellation {
    pub fn new(m: u64) -> Result<Self> {
        if !(2..=MAX_EXACT_M).contains(&m) {
            return Err(Error::domain(format!("PAM size must be in [2, 2^53], got {m}")));
        }
        Ok(PamConstellation { m })
    }

    pub fn size(&self) -> u64 {
        self.m
    }

    /// Point for message `index` in `1..=M`.
    pub fn point(&self, index: u64) -> f64 {
        index as f64 - (self.m as f64 + 1.0) / 2.0
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.m).map(|i| self.point(i))
    }

    /// `(M^2 - 1) / 12`.
    pub fn second_moment(&self) -> f64 {
        let m = self.m as f64;
        (m - 1.0) * (m + 1.0) / 12.0
    }

    /// Nearest message to `y` (in unit-spacing coordinates), clamped to
    /// `1..=M`. Ties go to the lower index.
    pub fn nearest(&self, y: f64) -> u64 {
        let t = y + (self.m as f64 + 1.0) / 2.0;
        (t - 0.5).ceil().clamp(1.0, self.m as f64) as u64
    }
}

/// Block length, SNR and alphabet of one SK code, with the optimal energy
/// split `S_1 = max(0, S - 1/n)`, `S_0 = nS - (n-1) S_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkParams {
    pub n: usize,
    pub snr: f64,
    pub alphabet: Alphabet,
    pub s0: f64,
    pub s1: f64,
}

impl SkParams {
    pub fn new(n: usize, snr: f64, alphabet: Alphabet) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("block length must be at least 1"));
        }
        if !(snr > 0.0) || !snr.is_finite() {
            return Err(Error::domain(format!("SNR must be positive, got {snr}")));
        }
        let s1 = (snr - 1.0 / n as f64).max(0.0);
        let s0 = n as f64 * snr - (n - 1) as f64 * s1;
        Ok(SkParams { n, snr, alphabet, s0, s1 })
    }

    pub fn with_m(n: usize, snr: f64, m: u64) -> Result<Self> {
        SkParams::new(n, snr, Alphabet::from_size(m)?)
    }

    pub fn with_rate(n: usize, snr: f64, rate: f64) -> Result<Self> {
        SkParams::new(n, snr, Alphabet::from_rate(n, rate)?)
    }

    /// Rate `ln(M)/n` of the code.
    pub fn rate(&self) -> f64 {
        self.alphabet.ln_m() / self.n as f64
    }

    /// `ln d_0`, with `d_0 = sqrt(S_0) / sigma_0` the time-0 signal spacing.
    pub fn ln_d0(&self) -> f64 {
        0.5 * (self.s0.ln() + 12f64.ln() - self.alphabet.ln_m2_minus_1())
    }

    pub fn ln_gamma(&self) -> f64 {
        ln_gamma_split(self.n, self.s0, self.s1, &self.alphabet)
    }
}

/// `ln gamma_n` for an arbitrary split, `gamma_n = sqrt(3 S_0 (1+S_1)^{n-1} / (M^2-1))`.
pub fn ln_gamma_split(n: usize, s0: f64, s1: f64, alphabet: &Alphabet) -> f64 {
    0.5 * (3f64.ln() + s0.ln() + (n - 1) as f64 * s1.ln_1p() - alphabet.ln_m2_minus_1())
}

/// Half the normalized distance between PAM points after refinement.
/// Overflows to infinity for very long blocks; use [`SkParams::ln_gamma`] then.
pub fn sk_gamma(params: &SkParams) -> f64 {
    params.ln_gamma().exp()
}

/// `2 (M-1)/M Q(gamma)`: error probability of `M`-PAM in Gaussian noise with
/// half-spacing `gamma` noise standard deviations.
pub fn pam_error_probability(alphabet: &Alphabet, gamma: f64) -> f64 {
    2.0 * alphabet.ln_edge_factor().exp() * q(gamma)
}

pub fn sk_pe_exact(params: &SkParams) -> f64 {
    pam_error_probability(&params.alphabet, sk_gamma(params))
}

/// `ln P_e`. Finite as long as `gamma` is below about `1e154`.
pub fn sk_pe_exact_ln(params: &SkParams) -> f64 {
    let gamma = sk_gamma(params);
    let lq = if gamma > 1.0 { log_q(gamma).unwrap_or(f64::NEG_INFINITY) } else { q(gamma).ln() };
    LN_2 + params.alphabet.ln_edge_factor() + lq
}

pub fn sk_pe_exact_tower(params: &SkParams) -> TowerReal {
    scaled_q_tower(LN_2 + params.alphabet.ln_edge_factor(), params.ln_gamma())
}

/// The relaxed bounds `2Q(sqrt(3/e) e^{n(C-R)})` and `2Q(e^{n(C-R)})`.
pub fn sk_pe_upper_chain(n: usize, snr: f64, rate: f64) -> Result<(TowerReal, TowerReal)> {
    if n == 0 || !(snr > 0.0) || !(rate >= 0.0) {
        return Err(Error::domain("need n >= 1, S > 0, R >= 0"));
    }
    if (n as f64) * snr < 1.0 {
        return Err(Error::domain(format!("the bounds need nS >= 1, got {}", n as f64 * snr)));
    }
    let exponent = n as f64 * (capacity(snr) - rate);
    let bound_a = scaled_q_tower(LN_2, 0.5 * (3f64.ln() - 1.0) + exponent);
    let bound_b = scaled_q_tower(LN_2, exponent);
    Ok((bound_a, bound_b))
}

/// Monte Carlo run of the SK code.
#[derive(Debug, Clone, PartialEq)]
pub struct SkRun {
    pub params: SkParams,
    pub trials: u64,
    pub errors: u64,
    pub pe_analytic: f64,
    /// Per use `X_i^2`, starting at time 0.
    pub energy: Vec<Moments>,
    pub total_energy: Moments,
    /// `U_n^2`, the residual noise power after refinement.
    pub residual_power: Moments,
    /// `U_n X_0 / (sigma_n sqrt(S_0))`, whose mean is the correlation.
    pub correlation: Moments,
}

impl SkRun {
    pub fn pe(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }

    pub fn pe_interval(&self, level: f64) -> Interval {
        clopper_pearson(self.errors, self.trials, level)
    }

    /// Analytic `sigma_n^2 = (1 + S_1)^{-(n-1)}`.
    pub fn residual_variance(&self) -> f64 {
        (-((self.params.n - 1) as f64) * self.params.s1.ln_1p()).exp()
    }
}

/// Outcome of one SK block.
pub(crate) struct SkTrial {
    pub message: u64,
    /// Clamped ML decision.
    pub decided: u64,
    pub x0: f64,
    /// `U_n`, the noise left on the equivalent observation.
    pub residual: f64,
    pub energy: f64,
}

/// Sends a uniform message with PAM spacing `d0` at time 0 and refines the
/// time-0 noise over `n - 1` Elias uses of energy `s1`. `per_use` sees the
/// energy of each use.
#[inline]
pub(crate) fn sk_trial<R: Rng>(
    r: &mut R,
    pam: &PamConstellation,
    d0: f64,
    s1: f64,
    n: usize,
    mut per_use: impl FnMut(usize, f64),
) -> SkTrial {
    let message = r.random_range(1..=pam.size());
    let x0 = pam.point(message) * d0;
    let z0: f64 = r.sample(StandardNormal);
    let y0 = x0 + z0;
    per_use(0, x0 * x0);
    let mut energy = x0 * x0;

    let mut u = z0;
    let mut sigma_sq = 1.0;
    let mut z_hat = 0.0;
    for i in 1..n {
        let step = elias_step(u, sigma_sq, s1, r.sample(StandardNormal));
        z_hat += step.estimate;
        u -= step.estimate;
        sigma_sq /= 1.0 + s1;
        let x2 = step.input * step.input;
        per_use(i, x2);
        energy += x2;
    }

    let decided = pam.nearest((y0 - z_hat) / d0);
    SkTrial { message, decided, x0, residual: u, energy }
}

#[derive(Clone)]
struct SkAcc {
    errors: u64,
    energy: Vec<Moments>,
    total: Moments,
    residual: Moments,
    correlation: Moments,
}

impl Merge for SkAcc {
    fn merge(&mut self, other: Self) {
        self.errors += other.errors;
        self.energy.merge(other.energy);
        self.total.merge(other.total);
        self.residual.merge(other.residual);
        self.correlation.merge(other.correlation);
    }
}

pub fn sk_simulate(params: &SkParams, trials: u64, rng: &RngContract) -> Result<SkRun> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let m = params
        .alphabet
        .size()
        .ok_or_else(|| Error::domain("alphabet too large to simulate (M > 2^53)"))?;
    let pam = PamConstellation::new(m)?;
    let n = params.n;
    let d0 = params.ln_d0().exp();
    let s1 = params.s1;
    let sigma_n = (-((n - 1) as f64) * s1.ln_1p()).exp().sqrt();
    let norm = 1.0 / (sigma_n * params.s0.sqrt());

    let acc = run_trials(
        trials,
        rng,
        || SkAcc {
            errors: 0,
            energy: vec![Moments::default(); n],
            total: Moments::default(),
            residual: Moments::default(),
            correlation: Moments::default(),
        },
        |r, acc| {
            let t = sk_trial(r, &pam, d0, s1, n, |i, x2| acc.energy[i].push(x2));
            acc.errors += u64::from(t.decided != t.message);
            acc.total.push(t.energy);
            acc.residual.push(t.residual * t.residual);
            acc.correlation.push(t.residual * t.x0 * norm);
        },
    );

    Ok(SkRun {
        params: *params,
        trials,
        errors: acc.errors,
        pe_analytic: sk_pe_exact(params),
        energy: acc.energy,
        total_energy: acc.total,
        residual_power: acc.residual,
        correlation: acc.correlation,
    })
}

/// Continuous-time parameters for the broadband limit: power `P`, duration
/// `T`, rate `R_inf` in nats/s, and `n` degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadbandParams {
    pub power: f64,
    pub duration: f64,
    pub rate: f64,
    pub n: usize,
}

impl BroadbandParams {
    pub fn new(power: f64, duration: f64, rate: f64, n: usize) -> Result<Self> {
        if !(power > 0.0 && duration > 0.0 && rate >= 0.0) || n == 0 {
            return Err(Error::domain("need P > 0, T > 0, R >= 0 and n >= 1"));
        }
        if !(power.is_finite() && duration.is_finite() && rate.is_finite()) {
            return Err(Error::domain("broadband parameters must be finite"));
        }
        Ok(BroadbandParams { power, duration, rate, n })
    }

    /// `C_inf = P / 2`.
    pub fn capacity(&self) -> f64 {
        self.power / 2.0
    }

    /// SNR per degree of freedom, `PT/n`.
    pub fn snr(&self) -> f64 {
        self.power * self.duration / self.n as f64
    }

    /// Smallest `n` for which the quadratic penalty is at most `1/24`.
    pub fn simplification_threshold(&self) -> f64 {
        6.0 * (self.power * self.duration).powi(2)
    }
}

/// Lower bounds on `gamma_n` in the broadband limit, all as logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BroadbandGamma {
    /// `ln sqrt(3) + (n/2) ln(1 + PT/n - 1/n) - T R_inf`.
    pub ln_gamma: f64,
    /// `ln sqrt(3) + PT/2 - 1/2 - P^2T^2/(4n) - T R_inf`.
    pub ln_bound: f64,
    /// `P^2 T^2 / (4n)`.
    pub penalty: f64,
    /// `T (C_inf - R_inf)`, present when `n >= 6 P^2 T^2`.
    pub ln_simplified: Option<f64>,
}

impl BroadbandGamma {
    pub fn simplification_holds(&self) -> bool {
        self.ln_simplified.is_some()
    }

    /// `2 Q(gamma)` for the tightest of the bounds, as a tower value.
    pub fn pe_bound(&self) -> TowerReal {
        scaled_q_tower(LN_2, self.ln_bound)
    }
}

pub fn broadband_gamma_bound(bb: &BroadbandParams) -> BroadbandGamma {
    let n = bb.n as f64;
    let pt = bb.power * bb.duration;
    let half_ln3 = 0.5 * 3f64.ln();
    let ln_gamma = half_ln3 + 0.5 * n * ((pt - 1.0) / n).ln_1p() - bb.duration * bb.rate;
    let penalty = pt * pt / (4.0 * n);
    let ln_bound = half_ln3 + pt / 2.0 - 0.5 - penalty - bb.duration * bb.rate;
    let ln_simplified = (n >= bb.simplification_threshold())
        .then(|| bb.duration * (bb.capacity() - bb.rate));
    BroadbandGamma { ln_gamma, ln_bound, penalty, ln_simplified }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capacity_examples() {
        assert!((capacity(1.0) - 0.5 * LN_2).abs() < 1e-15);
        assert!((capacity(std::f64::consts::E.powi(2) - 1.0) - 1.0).abs() < 1e-15);
        let small = capacity(1e-6) / 1e-6;
        assert!((0.4999990..=0.5000001).contains(&small));
    }

    #[test]
    fn constellation_moments() {
        for m in [2u64, 3, 16, 101] {
            let pam = PamConstellation::new(m).unwrap();
            let pts: Vec<f64> = pam.points().collect();
            let mean = pts.iter().sum::<f64>() / m as f64;
            let second = pts.iter().map(|a| a * a).sum::<f64>() / m as f64;
            assert!(mean.abs() < 1e-12);
            assert!((second - pam.second_moment()).abs() < 1e-9 * second);
            assert!(pts.windows(2).all(|w| w[1] - w[0] == 1.0));
        }
    }

    #[test]
    fn nearest_ties_and_clamp() {
        let pam = PamConstellation::new(4).unwrap();
        assert_eq!(pam.nearest(-1.5), 1);
        assert_eq!(pam.nearest(-1.0), 1); // tie between 1 and 2
        assert_eq!(pam.nearest(0.0), 2);
        assert_eq!(pam.nearest(100.0), 4);
        assert_eq!(pam.nearest(-100.0), 1);
    }

    #[test]
    fn energy_split() {
        let p = SkParams::with_m(10, 1.0, 4).unwrap();
        assert!((p.s1 - 0.9).abs() < 1e-15 && (p.s0 - 1.9).abs() < 1e-14);
        assert_eq!(p.s0 + 9.0 * p.s1, 10.0);
        let low = SkParams::with_m(2, 0.3, 4).unwrap();
        assert_eq!((low.s0, low.s1), (0.6, 0.0));
    }

    #[test]
    fn gamma_examples() {
        let p = SkParams::with_m(8, 1.0, 16).unwrap();
        let oracle = (3.0 * 1.875f64.powi(8) / 255.0).sqrt();
        assert!((sk_gamma(&p) - oracle).abs() < 1e-12);
        assert!((sk_gamma(&p) - 1.3406).abs() < 1e-4);
        let one = SkParams::with_m(1, 3.0, 2).unwrap();
        assert!((sk_gamma(&one) - 3f64.sqrt()).abs() < 1e-14);
        let mut last = f64::INFINITY;
        for m in [2u64, 4, 16, 1 << 10, 1 << 20, 1 << 40] {
            let g = sk_gamma(&SkParams::with_m(5, 1.0, m).unwrap());
            assert!(g < last);
            last = g;
        }
    }

    #[test]
    fn pe_examples() {
        let p = SkParams::with_m(8, 1.0, 16).unwrap();
        let pe = sk_pe_exact(&p);
        assert!((pe - 2.0 * 15.0 / 16.0 * q(sk_gamma(&p))).abs() < 1e-15);
        assert!((pe - 0.1688).abs() < 1e-4);
        assert!(pe <= 2.0 * q(sk_gamma(&p)));
        let coin = pam_error_probability(&Alphabet::from_size(2).unwrap(), 0.0);
        assert_eq!(coin, 0.5);
        assert!((sk_pe_exact_ln(&p) - pe.ln()).abs() < 1e-12);
        assert!((sk_pe_exact_tower(&p).ln().unwrap() - pe.ln()).abs() < 1e-12);
    }

    #[test]
    fn alphabet_from_rate() {
        let a = Alphabet::from_rate(4, 16f64.ln() / 4.0).unwrap();
        assert_eq!(a.size(), Some(16));
        assert_eq!(Alphabet::from_rate(10, 0.1).unwrap().size(), Some(3));
        assert!(Alphabet::from_rate(3, 0.0).is_err());
        let big = Alphabet::from_rate(1000, 0.2).unwrap();
        assert_eq!(big.size(), None);
        assert_eq!(big.ln_m2_minus_1(), 400.0);
    }

    #[test]
    fn upper_chain_examples() {
        let (_, b) = sk_pe_upper_chain(4, 1.0, capacity(1.0)).unwrap();
        assert!((b.to_f64() - 2.0 * q(1.0)).abs() < 1e-12);
        assert!((b.to_f64() - 0.31731).abs() < 1e-5);
        let (a, b) = sk_pe_upper_chain(20, 1.0, 0.17).unwrap();
        let x = (20.0 * (capacity(1.0) - 0.17)).exp();
        assert!((b.ln().unwrap() - (LN_2 + log_q(x).unwrap())).abs() < 1e-10);
        assert!(a < b);
        assert!(sk_pe_upper_chain(2, 0.25, 0.1).is_err());
    }

    #[test]
    fn bracket_term_is_decreasing_and_bounded() {
        // (1 - 1/(1+n))^{n/2} >= e^{-1/2}, checked in log domain
        let term = |n: f64| 0.5 * n * (-1.0 / (1.0 + n)).ln_1p();
        let mut last = term(1.0);
        let mut n = 2.0;
        while n <= 1e6 {
            let t = term(n);
            assert!(t <= last && t >= -0.5);
            last = t;
            n += if n < 1e3 { 1.0 } else { 97.0 };
        }
        assert!(term(1e6) >= -0.5);
    }

    #[test]
    fn broadband_examples() {
        let bb = BroadbandParams::new(2.0, 10.0, 0.5, 2400).unwrap();
        let g = broadband_gamma_bound(&bb);
        assert_eq!(g.ln_simplified, Some(5.0));
        assert!((g.penalty - 1.0 / 24.0).abs() < 1e-15);
        assert!(g.ln_simplified.unwrap() <= g.ln_bound && g.ln_bound <= g.ln_gamma);
        let short = BroadbandParams::new(2.0, 10.0, 0.5, 2399).unwrap();
        assert!(!broadband_gamma_bound(&short).simplification_holds());
        let huge = BroadbandParams::new(2.0, 10.0, 0.5, usize::MAX / 2).unwrap();
        let lim = 0.5 * 3f64.ln() - 0.5 + 10.0 * (1.0 - 0.5);
        assert!((broadband_gamma_bound(&huge).ln_bound - lim).abs() < 1e-9);
    }

    #[test]
    fn antipodal_simulation() {
        let p = SkParams::with_m(1, 1.0, 2).unwrap();
        let run = sk_simulate(&p, 200_000, &RngContract::new(5, 0)).unwrap();
        // gamma = sqrt(S) for M = 2, n = 1
        assert!((run.pe_analytic - q(1.0)).abs() < 1e-15);
        assert!(run.pe_interval(0.99).contains(run.pe_analytic));
    }
}
