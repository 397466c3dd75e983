//! Tracking a channel that changes from sparse to dense at iterations 4000
//! and 7000, averaged over Monte-Carlo runs.
//!
//! Runs 5 realizations by default; pass a run count for more, e.g.
//! `cargo run --release --example convergence -- 100`.

use sparse_nlmp::config::{parse_config, ConfigSources, Preset};
use sparse_nlmp::runner;

pub fn run_example() -> anyhow::Result<()> {
    let runs = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let cfg = parse_config(Preset::Convergence, &ConfigSources { mc_runs: Some(runs), ..Default::default() })?;
    let dir = tempfile::tempdir()?;
    let out = runner::cmd_convergence(&cfg.config, dir.path())?;
    print!("{}", out.summary);

    let csv = std::fs::read_to_string(&out.data_file)?;
    println!(
        "{} has {} rows; header: {}",
        runner::MSD_TRACE_FILE,
        csv.lines().count() - 1,
        csv.lines().next().unwrap_or("")
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
