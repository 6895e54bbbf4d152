//! Command-line front end.
//!
//! ```text
//! fblab <elias|sk|highsnr|twophase|lower-bound|sandwich> [flags]
//! fblab sweep <scheme> [flags with ranges]
//! ```
//!
//! Numeric flags take a single value in the scheme commands. Under `sweep`
//! they also accept `a..b` (step 1), `a..b:step` or `x,y,z`; rows are emitted
//! for the full grid in flag order `n, snr, rate, M, d0, power, duration,
//! trials, steps, sigma1`, and each grid point gets its own seed derived from
//! `--seed` and the point's indices.
//!
//! `--config FILE` reads `key = value` lines (keys are flag names without the
//! dashes, `#` starts a comment); flags given on the command line win.
//! `FBLAB_THREADS` caps the worker pool.
//!
//! Exit status: 0 on success, 1 on invalid input, 2 when the requested plan
//! or bound is infeasible. Nothing is written on failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::elias::{elias_simulate, ChannelConfig, EnergySchedule};
use crate::highsnr::{highsnr_guarantees, highsnr_simulate};
use crate::lowerbound::{binary_lower_closed, binary_lower_relaxed, bound_sandwich, mary_lower};
use crate::numerics::RngContract;
use crate::report::{self, Format, Kind, Params, Quantity, SchemeReport};
use crate::sk::{broadband_gamma_bound, sk_simulate, Alphabet, BroadbandParams, SkParams};
use crate::twophase::{plan_broadband, plan_finite, twophase_simulate};
use crate::{Error, Result};

/// Default cap on the number of grid points in a sweep.
pub const DEFAULT_CAP: usize = 10_000;

const SWEEP_KEYS: [&str; 10] =
    ["n", "snr", "rate", "M", "d0", "power", "duration", "trials", "steps", "sigma1"];
const OTHER_KEYS: [&str; 5] = ["seed", "out", "format", "scheme", "cap"];

pub const SCHEMES: [&str; 6] = ["elias", "sk", "highsnr", "twophase", "lower-bound", "sandwich"];

#[derive(Debug, Parser)]
#[command(name = "fblab", version, about = "Gaussian channels with ideal feedback: bounds and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Linear MMSE estimation of a Gaussian source.
    Elias(ParamArgs),
    /// M-PAM block code with noise refinement; broadband bounds with --power/--duration.
    Sk(ParamArgs),
    /// High-SNR retransmission of the decision error.
    Highsnr(ParamArgs),
    /// Two-phase scheme planner and simulator.
    Twophase(ParamArgs),
    /// Binary and M-ary lower bounds.
    LowerBound(ParamArgs),
    /// Lower and upper bounds side by side.
    Sandwich(ParamArgs),
    /// Runs one scheme over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Default, Args)]
struct ParamArgs {
    /// Block length (channel uses).
    #[arg(long)]
    n: Option<String>,
    /// Per-use signal-to-noise ratio.
    #[arg(long)]
    snr: Option<String>,
    /// Rate in nats per channel use.
    #[arg(long)]
    rate: Option<String>,
    /// Alphabet size.
    #[arg(long = "M", visible_alias = "m")]
    m: Option<String>,
    /// Initial PAM spacing of the high-SNR scheme.
    #[arg(long)]
    d0: Option<String>,
    /// Broadband power (capacity is power/2 nats per second).
    #[arg(long)]
    power: Option<String>,
    /// Broadband duration in seconds.
    #[arg(long)]
    duration: Option<String>,
    /// Monte Carlo trials; analytic output only when absent.
    #[arg(long)]
    trials: Option<String>,
    /// Refinement steps of the high-SNR scheme.
    #[arg(long)]
    steps: Option<String>,
    /// Source variance of the Elias scheme.
    #[arg(long)]
    sigma1: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<String>,
    /// csv or json-lines.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct SweepArgs {
    /// Scheme to sweep.
    scheme: Option<String>,
    /// Largest number of grid points allowed.
    #[arg(long)]
    cap: Option<String>,
    #[command(flatten)]
    params: ParamArgs,
}

/// One fully specified run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Point {
    pub n: Option<usize>,
    pub snr: Option<f64>,
    pub rate: Option<f64>,
    pub m: Option<u64>,
    pub d0: Option<f64>,
    pub power: Option<f64>,
    pub duration: Option<f64>,
    pub trials: Option<u64>,
    pub steps: Option<u32>,
    pub sigma1: Option<f64>,
    pub seed: u64,
}

pub fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

/// Parses `args` (including the program name), runs, and returns the exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    let outcome = match threads() {
        Ok(Some(pool)) => pool.install(|| execute(cli.command)),
        Ok(None) => execute(cli.command),
        Err(e) => Err(e),
    };
    match outcome {
        Ok(label) => {
            eprintln!("fblab: {label} finished in {:.3} s", started.elapsed().as_secs_f64());
            0
        }
        Err(e) => {
            eprintln!("fblab: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 2,
        _ => 1,
    }
}

fn threads() -> Result<Option<rayon::ThreadPool>> {
    let Ok(v) = std::env::var("FBLAB_THREADS") else { return Ok(None) };
    let k: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| Error::Config(format!("FBLAB_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build()
        .map(Some)
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn execute(command: Command) -> Result<String> {
    let (scheme, args, sweep, cap) = match command {
        Command::Elias(a) => ("elias".to_string(), a, false, None),
        Command::Sk(a) => ("sk".to_string(), a, false, None),
        Command::Highsnr(a) => ("highsnr".to_string(), a, false, None),
        Command::Twophase(a) => ("twophase".to_string(), a, false, None),
        Command::LowerBound(a) => ("lower-bound".to_string(), a, false, None),
        Command::Sandwich(a) => ("sandwich".to_string(), a, false, None),
        Command::Sweep(s) => (s.scheme.unwrap_or_default(), s.params, true, s.cap),
    };
    let mut settings = match &args.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    for (k, v) in flag_pairs(&args, cap) {
        settings.insert(k.to_string(), v);
    }
    let scheme = if scheme.is_empty() {
        settings
            .get("scheme")
            .cloned()
            .ok_or_else(|| Error::Config("sweep needs a scheme".into()))?
    } else {
        scheme
    };
    if !SCHEMES.contains(&scheme.as_str()) {
        return Err(Error::Config(format!("unknown scheme {scheme:?}")));
    }
    let format: Format = settings.get("format").map_or(Ok(Format::Csv), |f| f.parse())?;
    let seed = settings.get("seed").map_or(Ok(0), |s| parse_u64("seed", s))?;
    let cap = settings.get("cap").map_or(Ok(DEFAULT_CAP), |s| parse_u64("cap", s).map(|c| c as usize))?;

    let grid = build_grid(&settings, cap)?;
    if !sweep && grid.len() > 1 {
        return Err(Error::Config("ranges are only accepted by `fblab sweep`".into()));
    }
    let mut reports = Vec::with_capacity(grid.len());
    for (indices, mut point) in grid {
        point.seed = if sweep { RngContract::derive_seed(seed, &indices) } else { seed };
        reports.push(run_point(&scheme, &point)?);
    }

    let mut buf = Vec::new();
    report::write_reports(&mut buf, &reports, format)?;
    match settings.get("out") {
        Some(path) => std::fs::write(path, &buf)
            .map_err(|e| Error::Config(format!("cannot write {path}: {e}")))?,
        None => std::io::stdout()
            .lock()
            .write_all(&buf)
            .map_err(|e| Error::Config(format!("write failed: {e}")))?,
    }
    Ok(scheme)
}

fn flag_pairs(a: &ParamArgs, cap: Option<String>) -> Vec<(&'static str, String)> {
    let fields = [
        ("n", &a.n),
        ("snr", &a.snr),
        ("rate", &a.rate),
        ("M", &a.m),
        ("d0", &a.d0),
        ("power", &a.power),
        ("duration", &a.duration),
        ("trials", &a.trials),
        ("steps", &a.steps),
        ("sigma1", &a.sigma1),
        ("seed", &a.seed),
        ("out", &a.out),
        ("format", &a.format),
        ("cap", &cap),
    ];
    fields.into_iter().filter_map(|(k, v)| v.clone().map(|v| (k, v))).collect()
}

/// Reads a `key = value` file.
pub fn read_config(path: &std::path::Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", lineno + 1)))?;
        let k = k.trim().trim_start_matches("--");
        let k = if k == "m" { "M" } else { k };
        if !SWEEP_KEYS.contains(&k) && !OTHER_KEYS.contains(&k) {
            return Err(Error::Config(format!("config line {}: unknown key {k:?}", lineno + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Config(format!("--{key}: not a number: {s:?}")))
}

fn parse_u64(key: &str, s: &str) -> Result<u64> {
    let v = parse_f64(key, s)?;
    as_count(key, v)
}

fn as_count(key: &str, v: f64) -> Result<u64> {
    if v < 0.0 || v.fract() != 0.0 || v > 9.007_199_254_740_992e15 {
        return Err(Error::Config(format!("--{key}: expected a non-negative integer, got {v}")));
    }
    Ok(v as u64)
}

fn tidy(v: f64) -> f64 {
    format!("{v:.12e}").parse().unwrap_or(v)
}

/// Expands `a..b`, `a..b:step`, `x,y,z` or a single value.
pub fn parse_values(key: &str, s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if s.contains(',') {
        return s.split(',').map(|p| parse_f64(key, p)).collect();
    }
    let Some((lo, rest)) = s.split_once("..") else {
        return Ok(vec![parse_f64(key, s)?]);
    };
    let (hi, step) = match rest.split_once(':') {
        Some((hi, step)) => (hi, parse_f64(key, step)?),
        None => (rest, 1.0),
    };
    let (lo, hi) = (parse_f64(key, lo)?, parse_f64(key, hi)?);
    if !(step > 0.0) {
        return Err(Error::Config(format!("--{key}: range step must be positive")));
    }
    if hi < lo {
        return Ok(Vec::new());
    }
    let count = ((hi - lo) / step * (1.0 + 1e-12)).floor() + 1.0;
    if count > 1e7 {
        return Err(Error::Config(format!("--{key}: range has {count} values")));
    }
    Ok((0..count as u64).map(|k| tidy(lo + k as f64 * step)).collect())
}

/// The grid of points described by `settings`, with each point's indices.
pub fn build_grid(settings: &BTreeMap<String, String>, cap: usize) -> Result<Vec<(Vec<usize>, Point)>> {
    let mut axes: Vec<(&str, Vec<f64>)> = Vec::new();
    for key in SWEEP_KEYS {
        if let Some(s) = settings.get(key) {
            let values = parse_values(key, s)?;
            if values.is_empty() {
                return Err(Error::Config(format!("--{key}: empty range {s:?}")));
            }
            axes.push((key, values));
        }
    }
    let total = axes.iter().try_fold(1usize, |acc, (_, v)| acc.checked_mul(v.len()));
    match total {
        Some(t) if t <= cap => {}
        _ => return Err(Error::Config(format!("grid exceeds the cap of {cap} points"))),
    }
    let mut grid = vec![(Vec::new(), Point::default())];
    for (key, values) in &axes {
        let mut next = Vec::with_capacity(grid.len() * values.len());
        for (idx, point) in &grid {
            for (i, &v) in values.iter().enumerate() {
                let mut p: Point = point.clone();
                set(&mut p, key, v)?;
                let mut idx: Vec<usize> = idx.clone();
                idx.push(i);
                next.push((idx, p));
            }
        }
        grid = next;
    }
    Ok(grid)
}

fn set(p: &mut Point, key: &str, v: f64) -> Result<()> {
    match key {
        "n" => p.n = Some(as_count(key, v)? as usize),
        "snr" => p.snr = Some(v),
        "rate" => p.rate = Some(v),
        "M" => p.m = Some(as_count(key, v)?),
        "d0" => p.d0 = Some(v),
        "power" => p.power = Some(v),
        "duration" => p.duration = Some(v),
        "trials" => p.trials = Some(as_count(key, v)?),
        "steps" => {
            p.steps = Some(
                u32::try_from(as_count(key, v)?)
                    .map_err(|_| Error::Config("--steps is too large".into()))?,
            )
        }
        "sigma1" => p.sigma1 = Some(v),
        _ => unreachable!("unknown sweep key {key}"),
    }
    Ok(())
}

fn need<T>(v: Option<T>, scheme: &str, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("{scheme} needs --{flag}")))
}

/// Rate from `--rate`, or `ln M / n` from `--M`.
fn rate_of(p: &Point, scheme: &str) -> Result<f64> {
    match (p.rate, p.m, p.n) {
        (Some(_), Some(_), _) => Err(Error::Config(format!("{scheme}: give --rate or --M, not both"))),
        (Some(r), None, _) => Ok(r),
        (None, Some(m), Some(n)) if n > 0 => Ok((m as f64).ln() / n as f64),
        _ => Err(Error::Config(format!("{scheme} needs --rate or --M"))),
    }
}

/// Runs one scheme at one point.
pub fn run_point(scheme: &str, p: &Point) -> Result<SchemeReport> {
    let mut params = Params {
        scheme: scheme.to_string(),
        n: p.n,
        snr: p.snr,
        trials: p.trials,
        seed: p.trials.map(|_| p.seed),
        ..Params::default()
    };
    let rng = RngContract::new(p.seed, 0);
    let broadband = p.power.is_some() || p.duration.is_some();
    let report = |params: Params, qs: Vec<Quantity>| {
        let mut r = SchemeReport::new(params);
        r.extend(qs);
        r
    };
    match scheme {
        "elias" => {
            let n = need(p.n, scheme, "n")?;
            let snr = need(p.snr, scheme, "snr")?;
            let sigma1 = p.sigma1.unwrap_or(1.0);
            let config = ChannelConfig::new(n, snr)?;
            let qs = match p.trials {
                Some(t) => {
                    let schedule = EnergySchedule::uniform(n, snr);
                    elias_simulate(&config, &schedule, sigma1, t, &rng)?.quantities()
                }
                None => report::elias_analytic(n, snr, sigma1),
            };
            Ok(report(params, qs))
        }
        "sk" if broadband => {
            let power = need(p.power, scheme, "power")?;
            let duration = need(p.duration, scheme, "duration")?;
            let n = need(p.n, scheme, "n")?;
            let rate = need(p.rate, scheme, "rate")?;
            if p.trials.is_some() {
                return Err(Error::Config("broadband sk is analytic only; drop --trials".into()));
            }
            let bb = BroadbandParams::new(power, duration, rate, n)?;
            let g = broadband_gamma_bound(&bb);
            params.power = Some(power);
            params.duration = Some(duration);
            params.rate = Some(rate);
            params.snr = Some(bb.snr());
            Ok(report(params, report::broadband_quantities(&bb, &g)))
        }
        "sk" => {
            let n = need(p.n, scheme, "n")?;
            let snr = need(p.snr, scheme, "snr")?;
            let sk = match (p.m, p.rate) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config("sk: give --rate or --M, not both".into()))
                }
                (Some(m), None) => SkParams::new(n, snr, Alphabet::from_size(m)?)?,
                (None, Some(r)) => SkParams::with_rate(n, snr, r)?,
                (None, None) => return Err(Error::Config("sk needs --rate or --M".into())),
            };
            params.m = sk.alphabet.size();
            params.rate = Some(sk.rate());
            let qs = match p.trials {
                Some(t) => sk_simulate(&sk, t, &rng)?.quantities(),
                None => report::sk_analytic(&sk),
            };
            Ok(report(params, qs))
        }
        "highsnr" => {
            let d0 = p.d0.unwrap_or(crate::highsnr::MIN_D0);
            let steps = p.steps.unwrap_or(2);
            let m = p.m.unwrap_or(2);
            params.d0 = Some(d0);
            params.m = Some(m);
            let qs = match p.trials {
                Some(t) => highsnr_simulate(d0, steps, m, t, &rng)?.quantities(),
                None => report::highsnr_guarantee_quantities(d0, &highsnr_guarantees(d0, steps)?),
            };
            Ok(report(params, qs))
        }
        "twophase" if broadband => {
            let power = need(p.power, scheme, "power")?;
            let duration = need(p.duration, scheme, "duration")?;
            let rate = need(p.rate, scheme, "rate")?;
            let plan = plan_broadband(power, duration, rate)?;
            if !plan.feasible {
                return Err(Error::Infeasible(format!(
                    "duration {duration} is below the threshold {:.6}",
                    plan.threshold
                )));
            }
            params.power = Some(power);
            params.duration = Some(duration);
            params.rate = Some(rate);
            Ok(report(params, report::broadband_plan_quantities(&plan)))
        }
        "twophase" => {
            let n = need(p.n, scheme, "n")?;
            let snr = need(p.snr, scheme, "snr")?;
            let rate = rate_of(p, scheme)?;
            let plan = plan_finite(n, snr, rate)?;
            if !plan.feasible {
                return Err(Error::Infeasible(format!(
                    "phase-1 spacing {} is below 2",
                    plan.spacing().human()
                )));
            }
            params.rate = Some(rate);
            params.m = plan.alphabet.size();
            let qs = match p.trials {
                Some(t) => twophase_simulate(&plan, t, &rng)?.quantities(),
                None => report::twophase_plan_quantities(&plan),
            };
            Ok(report(params, qs))
        }
        "lower-bound" => {
            let n = need(p.n, scheme, "n")?;
            let snr = need(p.snr, scheme, "snr")?;
            let mut qs = vec![
                Quantity::tower("binary_closed", Kind::Bound, binary_lower_closed(n, snr)?),
                Quantity::tower("binary_relaxed", Kind::Bound, binary_lower_relaxed(n, snr)?),
            ];
            if p.rate.is_some() || p.m.is_some() {
                let rate = rate_of(p, scheme)?;
                params.rate = Some(rate);
                qs.extend(report::mary_quantities(&mary_lower(n, snr, rate)?));
            }
            Ok(report(params, qs))
        }
        "sandwich" => {
            let n = need(p.n, scheme, "n")?;
            let snr = need(p.snr, scheme, "snr")?;
            let rate = rate_of(p, scheme)?;
            params.rate = Some(rate);
            Ok(report(params, report::sandwich_quantities(&bound_sandwich(n, snr, rate)?)))
        }
        other => Err(Error::Config(format!("unknown scheme {other:?}"))),
    }
}
