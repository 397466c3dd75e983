//! The correntropy-induced metric as a smooth zero-norm.
//!
//! As the kernel width shrinks, `N·CIM²/κ(0)` approaches the number of
//! nonzero taps; the gradient pulls small taps to zero and leaves large
//! ones alone.
//!
//! `cargo run --example cim_penalty`

use sparse_nlmp::{cim_gradient, cim_squared, CimKernel};

pub fn run_example() -> anyhow::Result<()> {
    let w = [0.0, 0.8, 0.0, 0.0, -0.3, 0.05, 0.0, 1.5];
    let nnz = w.iter().filter(|v| **v != 0.0).count();
    println!("vector {w:?} has {nnz} nonzero taps");

    println!("{:>8} {:>12}", "sigma", "N·CIM²/κ0");
    for sigma in [1.0, 0.3, 0.1, 0.03, 0.01] {
        let k = CimKernel::new(sigma, w.len())?;
        let count = w.len() as f64 * cim_squared(&w, &k)? / k.kappa0();
        println!("{sigma:>8} {count:>12.6}");
    }

    let k = CimKernel::new(0.05, w.len())?;
    let g = cim_gradient(&w, &k)?;
    println!("\ngradient at sigma = 0.05: taps near zero are pulled hardest");
    println!("{:>6} {:>12}", "tap", "gradient");
    for (wi, gi) in w.iter().zip(&g) {
        println!("{wi:>6} {gi:>12.4e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
