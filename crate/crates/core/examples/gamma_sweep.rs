//! Steady-state MSD as the noise dispersion grows.
//!
//! `cargo run --release --example gamma_sweep`

use sparse_nlmp::config::{parse_config, ConfigSources, Preset};
use sparse_nlmp::sim::sweep_gamma;

pub fn run_example() -> anyhow::Result<()> {
    let overrides = ["iterations=4000".to_string(), "sweep.gammas=[0.5, 1.0, 2.0]".to_string()];
    let cfg = parse_config(
        Preset::GammaSweep,
        &ConfigSources { mc_runs: Some(4), overrides: &overrides, ..Default::default() },
    )?
    .config;
    let sweep = sweep_gamma(&cfg.experiment, &cfg.sweep.gammas)?;

    print!("{:<6}", "gamma");
    for l in &sweep.labels {
        print!("{l:>11}");
    }
    println!();
    for (g, row) in sweep.gammas.iter().zip(&sweep.values) {
        print!("{g:<6}");
        for v in row {
            print!("{:>11.2}", 10.0 * v.log10());
        }
        println!();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
