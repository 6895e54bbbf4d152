//! Planning and running the two-phase scheme.

use fblab::twophase::{phi, plan_finite, twophase_simulate, twophase_upper_bound, BETA};
use fblab::RngContract;

fn main() -> fblab::Result<()> {
    let (snr, rate) = (1.0, 0.2);
    for n in [50, 100, 200, 1000] {
        let plan = plan_finite(n, snr, rate)?;
        println!(
            "n = {n:>4}: nu* = {:.4}, n1 = {:>3}, n2 = {:>3}, spacing {:<12} phi(nu_n) - R - beta/n = {:+.4}, Pe <= {}",
            plan.nu_star,
            plan.n1,
            plan.n2,
            plan.spacing().human(),
            phi(plan.nu_n, snr)? - rate - BETA / n as f64,
            twophase_upper_bound(&plan)?.human()
        );
    }

    // Short blocks cannot be planned.
    if let Err(e) = plan_finite(15, snr, 0.3) {
        println!("n = 15, R = 0.3: {e}");
    }

    let plan = plan_finite(30, 0.25, fblab::sk::capacity(0.25) / 60.0)?;
    let run = twophase_simulate(&plan, 1_000_000, &RngContract::new(3, 0))?;
    println!(
        "simulated: phase 1 errors {} / {}, final errors {}, mean energy {:.4} (budget {:.4})",
        run.phase1_errors,
        run.trials,
        run.errors(),
        run.total_energy.mean(),
        30.0 * 0.25
    );
    Ok(())
}
