//! Lower bounds on error probability for binary and M-ary messages.

use fblab::elias::EnergySchedule;
use fblab::lowerbound::{
    binary_lower_closed, binary_lower_recursive, mary_lower, ninebound_check, partition_messages,
};

fn main() -> fblab::Result<()> {
    for n in [2, 4, 8, 16] {
        let recursive = binary_lower_recursive(&EnergySchedule::uniform(n, 1.0), 0.5)?;
        let closed = binary_lower_closed(n, 1.0)?;
        println!("n = {n:>2}: recursive {:<24} closed {}", recursive.human(), closed.human());
    }

    assert!(ninebound_check(9.0)?);

    let lb = mary_lower(1000, 1.0, 0.2)?;
    println!(
        "M-ary, n = 1000: n1 = {}, n2 = {}, Fano floor {:.3e}, bound {}",
        lb.n1,
        lb.n2,
        lb.fano_floor,
        lb.bound.human()
    );

    let phis = [0.3, 0.25, 0.2, 0.1, 0.1, 0.05];
    let split = partition_messages(&phis)?;
    println!(
        "partition {:?} | {:?}: masses {:.2} / {:.2}",
        split.side1, split.side2, split.mass1, split.mass2
    );
    Ok(())
}
