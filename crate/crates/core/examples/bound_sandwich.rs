//! Achievable and converse bounds side by side as the block length grows.

use fblab::lowerbound::bound_sandwich;

fn main() -> fblab::Result<()> {
    let (snr, rate) = (1.0, 0.2);
    println!("{:>6} {:>8} {:>8} {:>10}", "n", "lower", "upper", "n(C-R)");
    for n in [100, 300, 1000, 3000, 10_000] {
        let s = bound_sandwich(n, snr, rate)?;
        assert!(s.consistent);
        println!(
            "{n:>6} {:>8} {:>8} {:>10.1}",
            s.lower_measured_order, s.upper_measured_order, s.asymptotic_order
        );
    }
    Ok(())
}
