//! Linear estimation of a Gaussian source over n noisy uses with feedback.

use fblab::elias::{elias_analytic_mse, elias_simulate, ChannelConfig, EnergySchedule};
use fblab::RngContract;

fn main() -> fblab::Result<()> {
    let rng = RngContract::new(2024, 0);
    println!("{:>3} {:>5} {:>12} {:>12} {:>10}", "n", "snr", "analytic", "simulated", "energy");
    for n in [1, 4, 16] {
        for snr in [0.1, 1.0, 10.0] {
            let config = ChannelConfig::new(n, snr)?;
            let schedule = EnergySchedule::uniform(n, snr);
            let run = elias_simulate(&config, &schedule, 1.0, 200_000, &rng)?;
            println!(
                "{n:>3} {snr:>5} {:>12.4e} {:>12.4e} {:>10.4}",
                elias_analytic_mse(1.0, &schedule),
                run.mse.mean(),
                run.total_energy.mean()
            );
        }
    }

    // A front-loaded schedule spends the same energy and does no better.
    let config = ChannelConfig::new(4, 1.0)?;
    let skewed = EnergySchedule::new(vec![2.5, 0.5, 0.5, 0.5])?;
    skewed.check(&config)?;
    println!(
        "uniform {:.4e} vs skewed {:.4e}",
        elias_analytic_mse(1.0, &EnergySchedule::uniform(4, 1.0)),
        elias_analytic_mse(1.0, &skewed)
    );
    Ok(())
}
