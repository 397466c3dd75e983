use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sparse_nlmp::config::{parse_config, ConfigSources, Preset, FULL_MC_RUNS, QUICK_MC_RUNS};
use sparse_nlmp::runner::run_command;

#[derive(Parser)]
#[command(version, about = "Monte-Carlo experiments for sparse least-mean-p-power filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// MSD learning curves over the three-stage channel (msd_trace.csv)
    Convergence(RunArgs),
    /// Steady-state MSD versus noise dispersion (ssmsd_vs_gamma.csv)
    GammaSweep(RunArgs),
    /// Steady-state MSD of CIMVRNLMP over p and alpha (ssmsd_grid.csv)
    PAlphaGrid(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration or a manifest from a previous run
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// 20 Monte-Carlo runs
    #[arg(long, conflicts_with = "full")]
    quick: bool,
    /// 100 Monte-Carlo runs
    #[arg(long)]
    full: bool,
    /// Override a configuration key, e.g. `--set noise.alpha=1.2`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (preset, args) = match cli.command {
        Command::Convergence(a) => (Preset::Convergence, a),
        Command::GammaSweep(a) => (Preset::GammaSweep, a),
        Command::PAlphaGrid(a) => (Preset::PAlphaGrid, a),
    };

    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("cannot start worker threads")?;
    }

    let mc_runs = match (args.quick, args.full) {
        (true, _) => Some(QUICK_MC_RUNS),
        (_, true) => Some(FULL_MC_RUNS),
        _ => None,
    };
    let parsed = parse_config(
        preset,
        &ConfigSources { file: args.config.as_deref(), mc_runs, seed: args.seed, overrides: &args.overrides },
    )?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }

    let out = run_command(preset, &parsed.config, &args.out)?;
    print!("{}", out.summary);
    println!("wrote {} and {}", out.data_file.display(), out.manifest.display());
    Ok(())
}
