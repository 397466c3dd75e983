//! How the error exponent p should track the noise characteristic exponent α.
//!
//! `cargo run --release --example p_alpha_grid`

use sparse_nlmp::config::{parse_config, ConfigSources, Preset};
use sparse_nlmp::sim::sweep_p_alpha;

pub fn run_example() -> anyhow::Result<()> {
    let overrides = ["iterations=4000".to_string()];
    let cfg = parse_config(
        Preset::PAlphaGrid,
        &ConfigSources { mc_runs: Some(4), overrides: &overrides, ..Default::default() },
    )?
    .config;
    let (ps, alphas) = ([1.0, 1.2, 1.6, 2.0], [1.2, 1.6, 2.0]);
    let grid = sweep_p_alpha(&cfg.experiment, &ps, &alphas)?;

    println!("{} steady-state MSD [dB]", grid.algorithm);
    print!("{:<6}", "p\\a");
    for a in alphas {
        print!("{a:>9}");
    }
    println!();
    for (p, row) in ps.iter().zip(&grid.values) {
        print!("{p:<6}");
        for v in row {
            print!("{:>9.2}", 10.0 * v.log10());
        }
        println!();
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
