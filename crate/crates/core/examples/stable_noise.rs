//! Alpha-stable noise: empirical versus closed-form characteristic function.
//!
//! `cargo run --release --example stable_noise`

use num_complex::Complex64;
use rand_distr::Distribution;
use sparse_nlmp::{theoretical_cf, RngStream, StableNoiseParams};

pub fn run_example() -> anyhow::Result<()> {
    const M: usize = 50_000;
    for params in [
        StableNoiseParams::symmetric(1.0),
        StableNoiseParams::symmetric(1.4),
        StableNoiseParams::new(1.4, 0.5, 2.0, 0.0)?,
        StableNoiseParams::symmetric(2.0),
    ] {
        let dist = params.distribution()?;
        let mut rng = RngStream::new(1, 0);
        let xs: Vec<f64> = (0..M).map(|_| dist.sample(&mut rng)).collect();
        let big = xs.iter().filter(|x| x.abs() > 10.0).count() as f64 / M as f64;
        println!("alpha={} beta={} gamma={}: P(|v| > 10) = {big:.4}", params.alpha, params.beta, params.gamma);
        for t in [0.2, 0.5, 1.0] {
            let emp = xs.iter().map(|x| Complex64::new(0.0, t * x).exp()).sum::<Complex64>() / M as f64;
            let exact = theoretical_cf(&params, t);
            println!("  t={t}: empirical {emp:.4}  exact {exact:.4}  |diff| {:.4}", (emp - exact).norm());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
