//! Retransmitting the receiver's decision error: each step lowers the error
//! probability by one exponential order.

use fblab::highsnr::{highsnr_guarantees, highsnr_simulate, lemma1_series, total_energy_bound};
use fblab::RngContract;

fn main() -> fblab::Result<()> {
    let d0 = 4.0;
    for g in highsnr_guarantees(d0, 4)? {
        println!(
            "step {}: d = {:<16} energy <= {:.4}  error <= {}",
            g.step,
            g.spacing.human(),
            g.energy_bound,
            g.error_bound.human()
        );
    }
    println!("total energy bound {:.4}", total_energy_bound(d0)?);

    let (sum, terms) = lemma1_series(d0, 1e-15)?;
    println!("E[U^2] series at d = 4: {sum:.6} after {terms} terms");

    let run = highsnr_simulate(d0, 3, 2, 2_000_000, &RngContract::new(11, 0))?;
    for step in 0..run.errors.len() {
        let ci = run.error_interval(step, 0.95);
        println!(
            "time {step}: errors {:>6}  rate {:.3e}  CI [{:.2e}, {:.2e}]",
            run.errors[step],
            run.error_rate(step),
            ci.low,
            ci.high
        );
    }
    Ok(())
}
