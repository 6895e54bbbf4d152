//! PAM at time 0, then noise refinement: exact error probability, its
//! closed-form bounds and a Monte Carlo check.

use fblab::sk::{sk_pe_exact_tower, sk_pe_upper_chain, sk_simulate, SkParams};
use fblab::RngContract;

fn main() -> fblab::Result<()> {
    let params = SkParams::with_m(8, 1.0, 16)?;
    println!("S0 = {}, S1 = {}, gamma = {:.4}", params.s0, params.s1, params.ln_gamma().exp());

    let run = sk_simulate(&params, 1_000_000, &RngContract::new(7, 0))?;
    let ci = run.pe_interval(0.99);
    println!(
        "Pe exact {:.5}, simulated {:.5} (99% CI [{:.5}, {:.5}]), mean energy {:.4}",
        run.pe_analytic,
        run.pe(),
        ci.low,
        ci.high,
        run.total_energy.mean()
    );

    let (a, b) = sk_pe_upper_chain(8, 1.0, params.rate())?;
    println!("bounds: {} <= {}", a.human(), b.human());

    for n in [16, 32, 64, 128] {
        let p = SkParams::with_rate(n, 1.0, 0.2)?;
        let m = p.alphabet.size().unwrap_or(0);
        println!("n = {n:>3}, M = {m:>12}, Pe = {}", sk_pe_exact_tower(&p).human());
    }
    Ok(())
}
