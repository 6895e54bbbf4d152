//! Magnitudes far outside f64 range: build, compare, rescale and print them.

use fblab::numerics::{tower_g, TowerReal};

fn main() -> fblab::Result<()> {
    let small = tower_g(3, 2.0).recip();
    let smaller = tower_g(4, 2.0).recip();
    println!("1/g_3(2) = {}  ({})", small.render(), small.human());
    println!("1/g_4(2) = {}  ({})", smaller.render(), smaller.human());
    assert!(smaller < small);

    // Scaling by a constant leaves a tall tower visibly unchanged.
    let scaled = smaller.scale(1e-100)?;
    println!("1e-100 * 1/g_4(2) = {}", scaled.human());

    let parsed: TowerReal = small.render().parse()?;
    assert_eq!(parsed, small);

    for (j, c) in tower_g(5, 2.0).log10_chain() {
        println!("log10 chain level {j}: {c:.6}");
    }
    Ok(())
}
