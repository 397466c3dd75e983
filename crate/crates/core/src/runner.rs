//! The three experiment commands and their output files.
//!
//! | command        | data file            | columns                         |
//! |----------------|----------------------|---------------------------------|
//! | `convergence`  | `msd_trace.csv`      | `iteration,<algorithm>...`      |
//! | `gamma-sweep`  | `ssmsd_vs_gamma.csv` | `gamma,<algorithm>...`          |
//! | `p-alpha-grid` | `ssmsd_grid.csv`     | `p,alpha,ssmsd`                 |
//!
//! Values are raw MSD (not dB), written in the shortest form that parses back
//! to the same `f64`. Each data file gets a `<stem>.manifest.toml` beside it
//! holding the complete configuration; passing that manifest back as the
//! configuration reproduces the data file byte for byte. Files are written to
//! a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{render, Preset, RunConfig, RunSection};
use crate::error::{Error, Result};
use crate::sim::{self, MsdTrace};

pub const MSD_TRACE_FILE: &str = "msd_trace.csv";
pub const GAMMA_SWEEP_FILE: &str = "ssmsd_vs_gamma.csv";
pub const GRID_FILE: &str = "ssmsd_grid.csv";

/// Files written by a command and a human-readable summary.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub data_file: PathBuf,
    pub manifest: PathBuf,
    pub summary: String,
}

pub fn manifest_path(data_file: &Path) -> PathBuf {
    let stem = data_file.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    data_file.with_file_name(format!("{stem}.manifest.toml"))
}

/// Write `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::Config(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(to_err)?;
    for row in rows {
        w.write_record(&row).map_err(to_err)?;
    }
    w.into_inner().map_err(|e| Error::Config(format!("csv encoding failed: {e}")))
}

/// Shortest round-trip decimal form.
fn num(v: f64) -> String {
    v.to_string()
}

fn write_outputs(
    cfg: &RunConfig,
    preset: Preset,
    out_dir: &Path,
    file: &str,
    data: Vec<u8>,
    summary: String,
) -> Result<CommandOutput> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let data_file = out_dir.join(file);
    let manifest = manifest_path(&data_file);
    let run = RunSection {
        command: preset.name().to_string(),
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        outputs: vec![file.to_string()],
    };
    let text = render(cfg, Some(run))?;
    write_atomic(&data_file, &data)?;
    write_atomic(&manifest, text.as_bytes())?;
    Ok(CommandOutput { data_file, manifest, summary })
}

fn db(v: f64) -> f64 {
    10.0 * v.log10()
}

/// 1-based stage number, averaging window, and one mean per trace.
pub type StageRow = (usize, std::ops::Range<usize>, Vec<f64>);

/// Steady-state MSD at the end of each channel stage, one row per stage.
pub fn stage_summary(cfg: &RunConfig, traces: &[MsdTrace]) -> Result<Vec<StageRow>> {
    let exp = &cfg.experiment;
    let stages = exp.channel.stages();
    let mut rows = Vec::new();
    for (i, stage) in stages.iter().enumerate() {
        let start = stage.start as usize;
        if start >= exp.iterations {
            break;
        }
        let end = stages.get(i + 1).map_or(exp.iterations, |s| (s.start as usize).min(exp.iterations));
        let range = end.saturating_sub(exp.ss_window).max(start)..end;
        let values = traces.iter().map(|t| sim::window_mean(&t.msd, range.clone())).collect::<Result<_>>()?;
        rows.push((i + 1, range, values));
    }
    Ok(rows)
}

/// MSD learning curves for every configured algorithm.
pub fn cmd_convergence(cfg: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    cfg.validate()?;
    let traces = sim::run_experiment(&cfg.experiment)?;

    let mut header = vec!["iteration".to_string()];
    header.extend(traces.iter().map(|t| t.label.clone()));
    let rows = (0..cfg.experiment.iterations).map(|n| {
        let mut row = vec![n.to_string()];
        row.extend(traces.iter().map(|t| num(t.msd[n])));
        row
    });
    let data = csv_bytes(&header, rows)?;

    let mut summary = String::from("steady-state MSD per stage [dB]\n");
    let _ = write!(summary, "{:<7}{:>14}", "stage", "iterations");
    for t in &traces {
        let _ = write!(summary, "{:>11}", t.label);
    }
    summary.push('\n');
    for (stage, range, values) in stage_summary(cfg, &traces)? {
        let _ = write!(summary, "{:<7}{:>14}", stage, format!("{}-{}", range.start, range.end - 1));
        for v in values {
            let _ = write!(summary, "{:>11.2}", db(v));
        }
        summary.push('\n');
    }
    for t in traces.iter().filter(|t| t.diverged_runs > 0) {
        let _ = writeln!(summary, "{}: {} of {} runs diverged", t.label, t.diverged_runs, t.runs);
    }

    write_outputs(cfg, Preset::Convergence, out_dir, MSD_TRACE_FILE, data, summary)
}

/// Steady-state MSD for each dispersion in `cfg.sweep.gammas`.
pub fn cmd_gamma_sweep(cfg: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    cfg.validate()?;
    let sweep = sim::sweep_gamma(&cfg.experiment, &cfg.sweep.gammas)?;

    let mut header = vec!["gamma".to_string()];
    header.extend(sweep.labels.iter().cloned());
    let rows = sweep.gammas.iter().zip(&sweep.values).map(|(g, vals)| {
        let mut row = vec![num(*g)];
        row.extend(vals.iter().map(|v| num(*v)));
        row
    });
    let data = csv_bytes(&header, rows)?;

    let mut summary = format!("steady-state MSD [dB] over the last {} iterations\n", cfg.experiment.ss_window);
    let _ = write!(summary, "{:<8}", "gamma");
    for l in &sweep.labels {
        let _ = write!(summary, "{:>11}", l);
    }
    summary.push('\n');
    for (g, vals) in sweep.gammas.iter().zip(&sweep.values) {
        let _ = write!(summary, "{:<8}", g);
        for v in vals {
            let _ = write!(summary, "{:>11.2}", db(*v));
        }
        summary.push('\n');
    }

    write_outputs(cfg, Preset::GammaSweep, out_dir, GAMMA_SWEEP_FILE, data, summary)
}

/// Steady-state MSD over the `p × α` grid for the single configured algorithm.
pub fn cmd_p_alpha_grid(cfg: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    cfg.validate()?;
    let grid = sim::sweep_p_alpha(&cfg.experiment, &cfg.sweep.p_values, &cfg.sweep.alpha_values)?;

    let header = ["p", "alpha", "ssmsd"].map(String::from);
    let rows = grid
        .p_values
        .iter()
        .zip(&grid.values)
        .flat_map(|(p, row)| grid.alpha_values.iter().zip(row).map(move |(a, v)| vec![num(*p), num(*a), num(*v)]));
    let data = csv_bytes(&header, rows)?;

    let mut summary = format!("{} steady-state MSD [dB]; rows p, columns alpha\n", grid.algorithm);
    let _ = write!(summary, "{:<6}", "p");
    for a in &grid.alpha_values {
        let _ = write!(summary, "{:>9}", a);
    }
    summary.push('\n');
    for (p, row) in grid.p_values.iter().zip(&grid.values) {
        let _ = write!(summary, "{:<6}", p);
        for v in row {
            let _ = write!(summary, "{:>9.2}", db(*v));
        }
        summary.push('\n');
    }

    write_outputs(cfg, Preset::PAlphaGrid, out_dir, GRID_FILE, data, summary)
}

/// Dispatch by preset.
pub fn run_command(preset: Preset, cfg: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    match preset {
        Preset::Convergence => cmd_convergence(cfg, out_dir),
        Preset::GammaSweep => cmd_gamma_sweep(cfg, out_dir),
        Preset::PAlphaGrid => cmd_p_alpha_grid(cfg, out_dir),
    }
}
