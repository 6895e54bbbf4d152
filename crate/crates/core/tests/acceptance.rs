//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line for
//! each, and exits non-zero if any fails.

use std::f64::consts::{E, LN_2};
use std::process::Command;
use std::time::{Duration, Instant};

use fblab::elias::{elias_simulate, ChannelConfig, EnergySchedule};
use fblab::highsnr::{highsnr_simulate, lemma1_bound, lemma1_series};
use fblab::lowerbound::{
    binary_lower_closed, bound_sandwich, mary_lower, ninebound_check, partition_messages,
};
use fblab::numerics::{q, scaled_q_tower, tower_g, TowerReal};
use fblab::sk::{
    broadband_gamma_bound, capacity, sk_pe_exact, sk_pe_exact_tower, sk_pe_upper_chain,
    sk_simulate, BroadbandParams, SkParams,
};
use fblab::twophase::{phi_inverse, plan_broadband, plan_finite, twophase_upper_bound};
use fblab::RngContract;
use rand::Rng;
use rand_distr::{Distribution, Gamma};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn elias_exactness() -> Outcome {
    let started = Instant::now();
    let rng = RngContract::new(1, 0);
    let mut worst: f64 = 0.0;
    for n in 1..=12 {
        for snr in [0.25, 1.0, 4.0] {
            let config = ChannelConfig::new(n, snr).map_err(|e| e.to_string())?;
            let schedule = EnergySchedule::uniform(n, snr);
            let run = elias_simulate(&config, &schedule, 1.0, 1_000_000, &rng)
                .map_err(|e| e.to_string())?;
            let exact = (1.0 + snr).powi(-(n as i32));
            worst = worst.max((run.mse.mean() - exact).abs() / run.mse.std_error());
        }
    }
    let spot = (1.0f64 + 1.0).powi(-10);
    let elapsed = started.elapsed();
    check(
        worst <= 5.0 && (spot - 9.765625e-4).abs() < 1e-18 && within(elapsed, 30.0),
        format!("max |z| = {worst:.2}, n=10 S=1 -> {spot:e}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn sk_exact_formula() -> Outcome {
    let started = Instant::now();
    let params = SkParams::with_m(8, 1.0, 16).map_err(|e| e.to_string())?;
    // Independent re-derivation: gamma^2 = 3 S0 (1+S1)^(n-1) / (M^2 - 1).
    let (s1, s0) = (1.0 - 1.0 / 8.0, 8.0 - 7.0 * (1.0 - 1.0 / 8.0));
    let gamma = (3.0 * s0 * (1.0f64 + s1).powi(7) / 255.0).sqrt();
    let oracle = 2.0 * 15.0 / 16.0 * q(gamma);
    let analytic = sk_pe_exact(&params);
    let run = sk_simulate(&params, 1_000_000, &RngContract::new(2, 0)).map_err(|e| e.to_string())?;
    let ci = run.pe_interval(0.99);
    let elapsed = started.elapsed();
    check(
        (analytic - oracle).abs() < 1e-14
            && (analytic - 0.1688).abs() < 5e-5
            && ci.contains(analytic)
            && within(elapsed, 60.0),
        format!(
            "analytic {analytic:.6}, empirical {:.6}, 99% CI [{:.6}, {:.6}], {:.1} s",
            run.pe(),
            ci.low,
            ci.high,
            elapsed.as_secs_f64()
        ),
    )
}

fn bound_chain() -> Outcome {
    let mut points = 0;
    let mut violations = 0;
    'grid: for n in [1usize, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96, 128, 256] {
        for snr in [0.1, 0.5, 1.0, 2.0, 4.0, 16.0] {
            for m in [2u64, 3, 4, 16, 1024] {
                if (n as f64) * snr < 1.0 {
                    continue;
                }
                if points == 200 {
                    break 'grid;
                }
                points += 1;
                let params = SkParams::with_m(n, snr, m).map_err(|e| e.to_string())?;
                let exact = sk_pe_exact_tower(&params);
                let two_q = scaled_q_tower(LN_2, params.ln_gamma());
                let (a, b) = sk_pe_upper_chain(n, snr, params.rate()).map_err(|e| e.to_string())?;
                if !(exact <= two_q && two_q <= a && a <= b) {
                    violations += 1;
                }
            }
        }
    }
    check(
        points == 200 && violations == 0,
        format!("{points} points, {violations} violations"),
    )
}

fn energy_series_oracle() -> Outcome {
    let mut violations = 0;
    let mut max_terms = 0;
    for d in [4.0, 4.5, 5.0, 6.0, 8.0, 12.0, 20.0] {
        let (sum, terms) = lemma1_series(d, 1e-15).map_err(|e| e.to_string())?;
        let bound = 1.6 / d * (-d * d / 8.0f64).exp();
        debug_assert_eq!(bound, lemma1_bound(d).unwrap());
        if sum > bound {
            violations += 1;
        }
        max_terms = max_terms.max(terms);
    }
    check(
        violations == 0 && max_terms < 20,
        format!("{violations} violations, at most {max_terms} terms"),
    )
}

fn refinement_empirics() -> Outcome {
    let started = Instant::now();
    let trials = 10_000_000;
    let run = highsnr_simulate(4.0, 2, 2, trials, &RngContract::new(5, 0)).map_err(|e| e.to_string())?;
    let rate = run.error_rate(1);
    let bound = tower_g(2, 2.0).recip().to_f64();
    let d1 = 8f64.sqrt() * E;
    let predicted = 2.0 * q(d1 / 2.0);
    let ci = run.error_interval(1, 0.99);
    let x1 = &run.energy[1];
    let total = &run.refinement_energy;
    let elapsed = started.elapsed();
    check(
        rate <= bound
            && ci.contains(predicted)
            && x1.mean() <= 3.2 + 5.0 * x1.std_error()
            && total.mean() <= 5.0 + 5.0 * total.std_error()
            && within(elapsed, 300.0),
        format!(
            "step-1 rate {rate:.3e} <= {bound:.3e}, 2Q(d1/2) = {predicted:.3e} in [{:.3e}, {:.3e}], \
             E[X1^2] = {:.4}, total {:.4} +- {:.4}, {:.1} s",
            ci.low,
            ci.high,
            x1.mean(),
            total.mean(),
            total.std_error(),
            elapsed.as_secs_f64()
        ),
    )
}

fn plan_geometry() -> Outcome {
    let (snr, rate) = (1.0, 0.15);
    let mut small = Vec::new();
    for n in [100, 200, 400, 1000, 10_000] {
        let plan = plan_finite(n, snr, rate).map_err(|e| e.to_string())?;
        if plan.spacing() < TowerReal::from_f64(4.0) {
            small.push(n);
        }
    }
    let plan = plan_finite(10_000, snr, rate).map_err(|e| e.to_string())?;
    let target = 1.0 - phi_inverse(rate, snr, 1e-14).map_err(|e| e.to_string())?;
    let got = (plan.n2 + 1) as f64 / 10_000.0;
    let rel = (got - target).abs() / target;
    check(
        small.is_empty() && rel <= 0.05,
        format!("spacing < 4 at {small:?}; (n2+1)/n = {got:.4} vs {target:.4} ({:.2}%)", rel * 100.0),
    )
}

fn broadband_thresholds() -> Outcome {
    let (power, rate) = (2.0, 0.5);
    let plan = plan_broadband(power, 10.0, rate).map_err(|e| e.to_string())?;
    let want = (4.0 + LN_2 - 0.5 * 3f64.ln()) / 0.5;
    let duration = 10.0;
    let n = (6.0 * power * power * duration * duration) as usize;
    let bb = BroadbandParams::new(power, duration, rate, n).map_err(|e| e.to_string())?;
    let g = broadband_gamma_bound(&bb);
    check(
        (plan.threshold - want).abs() <= 1e-12 && g.penalty == 1.0 / 24.0 && g.simplification_holds(),
        format!("T* = {:.15} (want {want:.15}), penalty at n = {n}: {}", plan.threshold, g.penalty),
    )
}

fn lower_bound_numerics() -> Outcome {
    let mut failures = Vec::new();
    for x in [9.0, 10.0, 20.0, 50.0, 100.0, 1000.0] {
        if !ninebound_check(x).map_err(|e| e.to_string())? {
            failures.push(format!("ninebound({x})"));
        }
    }
    let one = binary_lower_closed(1, 1.0).map_err(|e| e.to_string())?.to_f64();
    let want = 0.5 * (-9.0f64).exp();
    if (one - want).abs() > 1e-12 * want {
        failures.push(format!("closed(1,1) = {one:e}"));
    }
    let two = binary_lower_closed(2, 1.0).map_err(|e| e.to_string())?;
    let level1 = two.ln().ok_or("closed(2,1) has no finite logarithm")?;
    let g1 = 9f64.exp();
    if (level1 + g1).abs() > 1e-9 * g1 {
        failures.push(format!("ln closed(2,1) = {level1}"));
    }
    check(
        failures.is_empty(),
        format!("closed(1,1) = {one:e}, closed(2,1) = {} {failures:?}", two.render()),
    )
}

fn sandwich() -> Outcome {
    let mut points = 0;
    let mut violations = 0;
    'grid: for n in [100usize, 300, 1000, 3000, 10_000] {
        for snr in [0.5, 1.0, 2.0, 4.0, 10.0] {
            for frac in [0.3, 0.5, 0.7] {
                if points == 50 {
                    break 'grid;
                }
                let rate = frac * capacity(snr);
                let Ok(plan) = plan_finite(n, snr, rate) else { continue };
                if !plan.feasible {
                    continue;
                }
                let Ok(lower) = mary_lower(n, snr, rate) else { continue };
                points += 1;
                let lower = lower.bound;
                let upper = twophase_upper_bound(&plan).map_err(|e| e.to_string())?;
                if lower > upper {
                    violations += 1;
                }
            }
        }
    }
    let n = 10_000;
    let (snr, rate) = (1.0, 0.2);
    let s = bound_sandwich(n, snr, rate).map_err(|e| e.to_string())?;
    let target = 1.0 - phi_inverse(rate, snr, 1e-14).map_err(|e| e.to_string())?;
    let lo = f64::from(s.lower_measured_order) / n as f64;
    let hi = f64::from(s.upper_measured_order) / n as f64;
    let ok_orders = ((lo - target) / target).abs() <= 0.1 && ((hi - target) / target).abs() <= 0.1;
    check(
        points == 50 && violations == 0 && ok_orders && s.consistent,
        format!(
            "{points} points, {violations} violations; orders/n at n=1e4: {lo:.4}, {hi:.4} vs {target:.4}"
        ),
    )
}

fn partition_guarantee() -> Outcome {
    let mut r = RngContract::new(10, 0).rng();
    let mut violations = 0;
    for k in 0..1000 {
        let m = r.random_range(2..=64usize);
        let alpha = [0.1, 0.5, 1.0, 5.0][k % 4];
        let gamma = Gamma::new(alpha, 1.0).map_err(|e| e.to_string())?;
        let mut w: Vec<f64> = (0..m).map(|_| gamma.sample(&mut r)).collect();
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            w = vec![1.0 / m as f64; m];
        } else {
            w.iter_mut().for_each(|x| *x /= total);
        }
        let split = partition_messages(&w).map_err(|e| e.to_string())?;
        if !split.satisfies_guarantee() {
            violations += 1;
        }
    }
    check(violations == 0, format!("1000 distributions, {violations} violations"))
}

fn reproducibility() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_fblab");
    let runs: &[&[&str]] = &[
        &["elias", "--n", "6", "--snr", "1", "--trials", "20000", "--seed", "9"],
        &["sk", "--n", "8", "--snr", "1", "--M", "16", "--trials", "20000", "--seed", "9"],
        &["highsnr", "--d0", "4", "--steps", "2", "--trials", "20000", "--seed", "9"],
        &["twophase", "--n", "30", "--snr", "0.25", "--rate", "0.002", "--trials", "20000", "--seed", "9"],
        &["lower-bound", "--n", "1000", "--snr", "1", "--rate", "0.2"],
        &["sandwich", "--n", "1000", "--snr", "1", "--rate", "0.2", "--format", "json-lines"],
        &["sweep", "sk", "--n", "4..12", "--snr", "1", "--M", "4", "--trials", "5000", "--seed", "9"],
    ];
    let mut differing = Vec::new();
    for args in runs {
        let once = || Command::new(bin).args(*args).output();
        let (a, b) = (once().map_err(|e| e.to_string())?, once().map_err(|e| e.to_string())?);
        if !a.status.success() || a.stdout != b.stdout || a.stdout.is_empty() {
            differing.push(args[0]);
        }
    }
    check(
        differing.is_empty(),
        format!("{} invocations, failing: {differing:?}", runs.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("elias exactness", elias_exactness),
        ("sk exact formula", sk_exact_formula),
        ("bound chain ordering", bound_chain),
        ("spacing energy series", energy_series_oracle),
        ("first refinement step", refinement_empirics),
        ("two-phase plan geometry", plan_geometry),
        ("broadband thresholds", broadband_thresholds),
        ("lower-bound numerics", lower_bound_numerics),
        ("sandwich", sandwich),
        ("message partition", partition_guarantee),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
