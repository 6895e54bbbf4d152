//! Uniform reports: a parameter echo plus a list of named quantities, written
//! one quantity per row as CSV or JSON lines with a fixed column set.

use std::io::Write;

use serde::Serialize;

use crate::elias::{rate_distortion_floor, EliasRun};
use crate::highsnr::{total_energy_bound, HighSnrRun, StepGuarantee};
use crate::lowerbound::{MaryLower, Sandwich};
use crate::numerics::{Interval, Moments, TowerReal};
use crate::sk::{
    capacity, sk_gamma, sk_pe_exact, sk_pe_exact_tower, sk_pe_upper_chain,
    BroadbandGamma, BroadbandParams, SkParams, SkRun,
};
use crate::twophase::{BroadbandPlan, TwoPhasePlan, TwoPhaseRun};
use crate::{Error, Result};

/// Confidence level of every reported interval.
pub const CI_LEVEL: f64 = 0.95;
const Z_95: f64 = 1.959_963_984_540_054;

/// Output columns, in order.
pub const COLUMNS: [&str; 21] = [
    "scheme",
    "n",
    "snr",
    "rate",
    "m",
    "d0",
    "power",
    "duration",
    "trials",
    "seed",
    "quantity",
    "kind",
    "value",
    "tower",
    "human",
    "log10_magnitude_chain",
    "std_error",
    "ci_level",
    "ci_low",
    "ci_high",
    "events",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    JsonLines,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json-lines" | "jsonl" | "json" => Ok(Format::JsonLines),
            _ => Err(Error::Config(format!("unknown format {s:?} (csv or json-lines)"))),
        }
    }
}

/// Parameters echoed on every row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    pub scheme: String,
    pub n: Option<usize>,
    pub snr: Option<f64>,
    pub rate: Option<f64>,
    pub m: Option<u64>,
    pub d0: Option<f64>,
    pub power: Option<f64>,
    pub duration: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Analytic,
    Bound,
    Plan,
    Empirical,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Analytic => "analytic",
            Kind::Bound => "bound",
            Kind::Plan => "plan",
            Kind::Empirical => "empirical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub kind: Kind,
    pub value: Option<f64>,
    pub tower: Option<TowerReal>,
    pub std_error: Option<f64>,
    pub ci: Option<Interval>,
    pub events: Option<u64>,
}

impl Quantity {
    pub fn plain(name: impl Into<String>, kind: Kind, value: f64) -> Self {
        Quantity {
            name: name.into(),
            kind,
            value: Some(value),
            tower: None,
            std_error: None,
            ci: None,
            events: None,
        }
    }

    /// A value that may be out of `f64` range; `value` is filled only when it is not.
    pub fn tower(name: impl Into<String>, kind: Kind, t: TowerReal) -> Self {
        let value = match t {
            TowerReal::Moderate(v) => Some(v),
            TowerReal::ExpTower { .. } => None,
        };
        Quantity { tower: Some(t), value, ..Quantity::plain(name, kind, 0.0) }
    }

    /// Sample mean with a normal-approximation interval.
    pub fn mean(name: impl Into<String>, m: &Moments) -> Self {
        let se = m.std_error();
        let mean = m.mean();
        Quantity {
            std_error: Some(se),
            ci: Some(Interval { level: CI_LEVEL, low: mean - Z_95 * se, high: mean + Z_95 * se }),
            ..Quantity::plain(name, Kind::Empirical, mean)
        }
    }

    /// Event frequency with a Clopper–Pearson interval.
    pub fn frequency(name: impl Into<String>, events: u64, trials: u64) -> Self {
        let p = events as f64 / trials as f64;
        Quantity {
            std_error: Some((p * (1.0 - p) / trials as f64).sqrt()),
            ci: Some(crate::numerics::clopper_pearson(events, trials, CI_LEVEL)),
            events: Some(events),
            ..Quantity::plain(name, Kind::Empirical, p)
        }
    }

    pub fn flag(name: impl Into<String>, value: bool) -> Self {
        Quantity::plain(name, Kind::Plan, if value { 1.0 } else { 0.0 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeReport {
    pub params: Params,
    pub quantities: Vec<Quantity>,
}

/// One output row.
#[derive(Debug, Clone, Serialize)]
pub struct Row<'a> {
    pub scheme: &'a str,
    pub n: Option<usize>,
    pub snr: Option<f64>,
    pub rate: Option<f64>,
    pub m: Option<u64>,
    pub d0: Option<f64>,
    pub power: Option<f64>,
    pub duration: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub quantity: &'a str,
    pub kind: &'static str,
    pub value: Option<f64>,
    pub tower: Option<String>,
    pub human: Option<String>,
    pub log10_magnitude_chain: Option<String>,
    pub std_error: Option<f64>,
    pub ci_level: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub events: Option<u64>,
}

impl SchemeReport {
    pub fn new(params: Params) -> Self {
        SchemeReport { params, quantities: Vec::new() }
    }

    pub fn push(&mut self, q: Quantity) {
        self.quantities.push(q);
    }

    pub fn extend(&mut self, qs: impl IntoIterator<Item = Quantity>) {
        self.quantities.extend(qs);
    }

    pub fn get(&self, name: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.name == name)
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> {
        let p = &self.params;
        self.quantities.iter().map(move |q| Row {
            scheme: &p.scheme,
            n: p.n,
            snr: p.snr,
            rate: p.rate,
            m: p.m,
            d0: p.d0,
            power: p.power,
            duration: p.duration,
            trials: p.trials,
            seed: p.seed,
            quantity: &q.name,
            kind: q.kind.as_str(),
            value: q.value,
            tower: q.tower.as_ref().map(TowerReal::render),
            human: q.tower.as_ref().map(TowerReal::human),
            log10_magnitude_chain: q.tower.as_ref().map(TowerReal::log10_chain_string),
            std_error: q.std_error,
            ci_level: q.ci.map(|c| c.level),
            ci_low: q.ci.map(|c| c.low),
            ci_high: q.ci.map(|c| c.high),
            events: q.events,
        })
    }
}

/// Writes reports in order, with a header first for CSV.
pub fn write_reports<W: Write>(out: W, reports: &[SchemeReport], format: Format) -> Result<()> {
    let io = |e: std::io::Error| Error::Config(format!("write failed: {e}"));
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            let csv_err = |e: csv::Error| Error::Config(format!("write failed: {e}"));
            w.write_record(COLUMNS).map_err(csv_err)?;
            for row in reports.iter().flat_map(SchemeReport::rows) {
                w.serialize(row).map_err(csv_err)?;
            }
            w.flush().map_err(io)
        }
        Format::JsonLines => {
            let mut out = out;
            for row in reports.iter().flat_map(SchemeReport::rows) {
                serde_json::to_writer(&mut out, &row)
                    .map_err(|e| Error::Config(format!("write failed: {e}")))?;
                out.write_all(b"\n").map_err(io)?;
            }
            out.flush().map_err(io)
        }
    }
}

pub fn elias_analytic(n: usize, snr: f64, sigma1_sq: f64) -> Vec<Quantity> {
    let mse = sigma1_sq * (-(n as f64) * snr.ln_1p()).exp();
    vec![
        Quantity::plain("mse", Kind::Analytic, mse),
        Quantity::plain("capacity_total", Kind::Analytic, n as f64 * capacity(snr)),
    ]
}

impl EliasRun {
    pub fn quantities(&self) -> Vec<Quantity> {
        let mut out = vec![Quantity::plain("mse", Kind::Analytic, self.analytic_mse)];
        if let Ok(r) = rate_distortion_floor(self.sigma1_sq, self.analytic_mse) {
            out.push(Quantity::plain("rate_distortion", Kind::Analytic, r));
        }
        out.push(Quantity::mean("mse", &self.mse));
        for (i, e) in self.energy.iter().enumerate() {
            out.push(Quantity::mean(format!("energy_{}", i + 1), e));
        }
        for (i, (e, a)) in self.error_power.iter().zip(&self.analytic_error_power).enumerate() {
            out.push(Quantity::plain(format!("error_variance_{}", i + 2), Kind::Analytic, *a));
            out.push(Quantity::mean(format!("error_variance_{}", i + 2), e));
        }
        out.push(Quantity::mean("energy_total", &self.total_energy));
        out
    }
}

pub fn sk_analytic(params: &SkParams) -> Vec<Quantity> {
    let gamma = sk_gamma(params);
    let mut out = vec![
        Quantity::plain("s0", Kind::Analytic, params.s0),
        Quantity::plain("s1", Kind::Analytic, params.s1),
        Quantity::tower("gamma", Kind::Analytic, TowerReal::from_ln(params.ln_gamma())),
        Quantity::tower("pe", Kind::Analytic, sk_pe_exact_tower(params)),
    ];
    if gamma.is_finite() {
        out.push(Quantity::plain("pe_2q", Kind::Bound, 2.0 * crate::numerics::q(gamma)));
    }
    if let Ok((a, b)) = sk_pe_upper_chain(params.n, params.snr, params.rate()) {
        out.push(Quantity::tower("pe_bound_a", Kind::Bound, a));
        out.push(Quantity::tower("pe_bound_b", Kind::Bound, b));
    }
    out
}

impl SkRun {
    pub fn quantities(&self) -> Vec<Quantity> {
        let mut out = sk_analytic(&self.params);
        out.push(Quantity::frequency("pe", self.errors, self.trials));
        out.push(Quantity::mean("energy_total", &self.total_energy));
        out.push(Quantity::plain(
            "residual_variance",
            Kind::Analytic,
            self.residual_variance(),
        ));
        out.push(Quantity::mean("residual_variance", &self.residual_power));
        out.push(Quantity::mean("correlation_un_x0", &self.correlation));
        debug_assert!((sk_pe_exact(&self.params) - self.pe_analytic).abs() == 0.0);
        out
    }
}

pub fn broadband_quantities(bb: &BroadbandParams, g: &BroadbandGamma) -> Vec<Quantity> {
    let mut out = vec![
        Quantity::plain("capacity", Kind::Analytic, bb.capacity()),
        Quantity::plain("snr_per_dof", Kind::Analytic, bb.snr()),
        Quantity::tower("gamma_lower", Kind::Bound, TowerReal::from_ln(g.ln_gamma)),
        Quantity::tower("gamma_lower_quadratic", Kind::Bound, TowerReal::from_ln(g.ln_bound)),
        Quantity::plain("penalty", Kind::Analytic, g.penalty),
        Quantity::plain("simplification_threshold", Kind::Plan, bb.simplification_threshold()),
        Quantity::flag("simplification_holds", g.simplification_holds()),
    ];
    if let Some(l) = g.ln_simplified {
        out.push(Quantity::tower("gamma_lower_simplified", Kind::Bound, TowerReal::from_ln(l)));
    }
    out.push(Quantity::tower("pe_bound", Kind::Bound, g.pe_bound()));
    out
}

pub fn highsnr_guarantee_quantities(d0: f64, g: &[StepGuarantee]) -> Vec<Quantity> {
    let mut out = Vec::new();
    for s in g {
        out.push(Quantity::tower(format!("spacing_{}", s.step), Kind::Analytic, s.spacing));
        out.push(Quantity::plain(format!("energy_bound_{}", s.step), Kind::Bound, s.energy_bound));
        out.push(Quantity::tower(
            format!("error_bound_{}", s.step),
            Kind::Bound,
            s.error_bound,
        ));
    }
    if let Ok(total) = total_energy_bound(d0) {
        out.push(Quantity::plain("energy_bound_total", Kind::Bound, total));
    }
    out
}

impl HighSnrRun {
    pub fn quantities(&self) -> Vec<Quantity> {
        let mut out = highsnr_guarantee_quantities(self.d0, &self.guarantees);
        out.push(Quantity::plain("simulated_steps", Kind::Plan, self.simulated_steps() as f64));
        for (i, (e, en)) in self.errors.iter().zip(&self.energy).enumerate() {
            out.push(Quantity::frequency(format!("error_rate_{i}"), *e, self.trials));
            out.push(Quantity::mean(format!("energy_{i}"), en));
        }
        out.push(Quantity::mean("energy_refinement_total", &self.refinement_energy));
        out
    }
}

pub fn twophase_plan_quantities(plan: &TwoPhasePlan) -> Vec<Quantity> {
    let mut out = vec![
        Quantity::plain("beta", Kind::Analytic, crate::twophase::BETA),
        Quantity::plain("nu_star", Kind::Plan, plan.nu_star),
        Quantity::plain("nu_n", Kind::Plan, plan.nu_n),
        Quantity::plain("n1", Kind::Plan, plan.n1 as f64),
        Quantity::plain("n2", Kind::Plan, plan.n2 as f64),
        Quantity::plain("phase1_power", Kind::Plan, plan.phase1_power),
        Quantity::tower("spacing", Kind::Analytic, plan.spacing()),
        Quantity::tower("spacing_chain", Kind::Bound, TowerReal::from_ln(plan.ln_spacing_chain)),
        Quantity::flag("feasible", plan.feasible),
    ];
    if let Ok(ub) = crate::twophase::twophase_upper_bound(plan) {
        out.push(Quantity::tower("pe_upper_bound", Kind::Bound, ub));
    }
    out
}

impl TwoPhaseRun {
    pub fn quantities(&self) -> Vec<Quantity> {
        let mut out = twophase_plan_quantities(&self.plan);
        out.push(Quantity::plain("phase1_pe", Kind::Analytic, self.phase1_pe_analytic));
        out.push(Quantity::frequency("phase1_pe", self.phase1_errors, self.trials));
        out.push(Quantity::plain(
            "simulated_steps",
            Kind::Plan,
            (self.spacings.len() - 1) as f64,
        ));
        out.push(Quantity::frequency("pe", self.errors(), self.trials));
        out.push(Quantity::mean("energy_phase1", &self.phase1_energy));
        out.push(Quantity::mean("energy_phase2", &self.phase2_energy));
        out.push(Quantity::mean("energy_total", &self.total_energy));
        out
    }
}

pub fn broadband_plan_quantities(plan: &BroadbandPlan) -> Vec<Quantity> {
    vec![
        Quantity::plain("capacity", Kind::Analytic, plan.power / 2.0),
        Quantity::plain("duration_threshold", Kind::Plan, plan.threshold),
        Quantity::plain("n1_min", Kind::Plan, plan.n1_min as f64),
        Quantity::tower("spacing_lower", Kind::Bound, TowerReal::from_ln(plan.ln_spacing_bound)),
        Quantity::flag("feasible", plan.feasible),
    ]
}

pub fn mary_quantities(lb: &MaryLower) -> Vec<Quantity> {
    vec![
        Quantity::plain("n1", Kind::Plan, lb.n1 as f64),
        Quantity::plain("n2", Kind::Plan, lb.n2 as f64),
        Quantity::plain("fano_floor", Kind::Bound, lb.fano_floor),
        Quantity::plain("g_argument", Kind::Analytic, lb.argument),
        Quantity::tower("pe_lower_bound", Kind::Bound, lb.bound),
    ]
}

pub fn sandwich_quantities(s: &Sandwich) -> Vec<Quantity> {
    vec![
        Quantity::tower("lower", Kind::Bound, s.lower),
        Quantity::tower("upper", Kind::Bound, s.upper),
        Quantity::flag("consistent", s.consistent),
        Quantity::plain("lower_order", Kind::Analytic, s.lower_order as f64),
        Quantity::plain("upper_order", Kind::Analytic, s.upper_order as f64),
        Quantity::plain("lower_measured_order", Kind::Analytic, f64::from(s.lower_measured_order)),
        Quantity::plain("upper_measured_order", Kind::Analytic, f64::from(s.upper_measured_order)),
        Quantity::plain("asymptotic_order", Kind::Analytic, s.asymptotic_order),
    ]
}
