//! Unlimited bandwidth: a power budget P spread over duration T.

use fblab::sk::{broadband_gamma_bound, BroadbandParams};
use fblab::twophase::plan_broadband;

fn main() -> fblab::Result<()> {
    let (power, duration, rate) = (2.0, 10.0, 0.5);
    for n in [200, 600, 2400, 24_000] {
        let bb = BroadbandParams::new(power, duration, rate, n)?;
        let g = broadband_gamma_bound(&bb);
        println!(
            "n = {n:>6}: ln gamma >= {:.4}, penalty {:.4}, simplified form {}",
            g.ln_gamma,
            g.penalty,
            if g.simplification_holds() { "valid" } else { "not yet valid" }
        );
    }

    for t in [4.0, 8.0, 12.0] {
        let plan = plan_broadband(power, t, rate)?;
        println!(
            "T = {t}: threshold {:.4}, feasible {}, phase-1 degrees of freedom >= {}",
            plan.threshold, plan.feasible, plan.n1_min
        );
    }
    Ok(())
}
