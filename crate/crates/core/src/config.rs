//! Experiment configuration files.
//!
//! A configuration is a TOML document layered over a command preset. Every
//! key is optional; anything left out keeps the preset value.
//!
//! ```toml
//! seed = 2015
//! iterations = 10000
//! mc_runs = 100
//! ss_window = 1000
//! p = 1.2                       # default exponent for every algorithm
//! algorithms = ["NLMP", "CIMVRNLMP"]
//!
//! [noise]
//! kind = "stable"               # or "silent"
//! alpha = 1.4
//! beta = 0.0
//! gamma = 1.0
//! delta = 0.0
//!
//! [channel]
//! preset = "three-stage"        # or "sparse", or explicit stages:
//! # stages = [{ start = 0, weights = [...] }, ...]
//!
//! [sweep]
//! gammas = [1.0, 2.0]
//! p_values = [1.2, 2.0]
//! alpha_values = [1.0, 2.0]
//!
//! [CIMVRNLMP]                   # one optional table per algorithm
//! mu = 0.09
//! sigma = 0.07
//! ```
//!
//! Command-line overrides use dotted keys (`noise.alpha=1.2`,
//! `CIMNLMP.mu=0.1`, `mc_runs=20`) and are applied last. Unknown keys are
//! rejected. A manifest written next to each result is a complete
//! configuration and can be passed back as `--config`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::filter::{Algorithm, FilterParams};
use crate::noise::StableNoiseParams;
use crate::sim::{ChannelSchedule, ChannelStage, ExperimentConfig, NoiseSource};

pub const DEFAULT_SEED: u64 = 2015;
pub const QUICK_MC_RUNS: usize = 20;
pub const FULL_MC_RUNS: usize = 100;
pub const DEFAULT_GAMMAS: [f64; 6] = [1.0, 1.2, 1.4, 1.6, 1.8, 2.0];
pub const DEFAULT_P_VALUES: [f64; 6] = [1.0, 1.2, 1.4, 1.6, 1.8, 2.0];
pub const DEFAULT_ALPHA_VALUES: [f64; 7] = [1.0, 1.2, 1.4, 1.5, 1.6, 1.8, 2.0];

/// The three experiments, each with its own defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Tracking over the three-stage channel with all six algorithms.
    Convergence,
    /// Steady-state MSD against noise dispersion on the sparse channel.
    GammaSweep,
    /// Steady-state MSD of CIMVRNLMP over the error exponent and noise
    /// characteristic exponent.
    PAlphaGrid,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Convergence => "convergence",
            Preset::GammaSweep => "gamma-sweep",
            Preset::PAlphaGrid => "p-alpha-grid",
        }
    }
}

/// Values swept by the sweep commands.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub gammas: Vec<f64>,
    pub p_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub sweep: SweepSpec,
}

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        let length = 30;
        let (channel, algorithms) = match preset {
            Preset::Convergence => (
                ChannelSchedule::three_stage(),
                Algorithm::ALL.iter().map(|&a| FilterParams::reference(a, length)).collect(),
            ),
            Preset::GammaSweep => (
                ChannelSchedule::sparse_stationary(),
                Algorithm::ALL.iter().map(|&a| FilterParams::reference(a, length)).collect(),
            ),
            Preset::PAlphaGrid => (
                ChannelSchedule::sparse_stationary(),
                vec![FilterParams { sigma: Some(0.07), ..FilterParams::reference(Algorithm::CimVrNlmp, length) }],
            ),
        };
        RunConfig {
            experiment: ExperimentConfig {
                channel,
                noise: NoiseSource::Stable(StableNoiseParams::symmetric(1.4)),
                algorithms,
                iterations: 10_000,
                mc_runs: FULL_MC_RUNS,
                seed: DEFAULT_SEED,
                ss_window: 1000,
            },
            sweep: SweepSpec {
                gammas: DEFAULT_GAMMAS.to_vec(),
                p_values: DEFAULT_P_VALUES.to_vec(),
                alpha_values: DEFAULT_ALPHA_VALUES.to_vec(),
            },
        }
    }

    /// Legal but suspicious settings, one message each.
    pub fn warnings(&self) -> Vec<String> {
        let mut out: Vec<String> = self.experiment.algorithms.iter().flat_map(|a| a.warnings()).collect();
        if let NoiseSource::Stable(noise) = &self.experiment.noise {
            for a in &self.experiment.algorithms {
                if a.p >= noise.alpha {
                    out.push(format!(
                        "{}: p = {} is not below the noise exponent alpha = {}; \
                         the p-th error moment of the noise may not exist",
                        a.algorithm, a.p, noise.alpha
                    ));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.experiment.validate().map_err(|e| match e {
            Error::Parameter { name, reason } => Error::Config(format!("{name}: {reason}")),
            other => other,
        })?;
        let lists = [
            ("sweep.gammas", &self.sweep.gammas),
            ("sweep.p_values", &self.sweep.p_values),
            ("sweep.alpha_values", &self.sweep.alpha_values),
        ];
        for (name, values) in lists {
            if values.is_empty() {
                return Err(Error::Config(format!("{name}: must not be empty")));
            }
        }
        if let Some(g) = self.sweep.gammas.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
            return Err(Error::Config(format!("sweep.gammas: values must be > 0, got {g}")));
        }
        if let Some(p) = self.sweep.p_values.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::Config(format!("sweep.p_values: values must be > 0, got {p}")));
        }
        if let Some(a) = self.sweep.alpha_values.iter().find(|a| !(**a > 0.0 && **a <= 2.0)) {
            return Err(Error::Config(format!("sweep.alpha_values: values must lie in (0, 2], got {a}")));
        }
        Ok(())
    }
}

/// A resolved configuration and the warnings raised while resolving it.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub config: RunConfig,
    pub warnings: Vec<String>,
}

// ---- on-disk schema ----

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ss_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    algorithms: Option<Vec<Algorithm>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise: Option<NoiseSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<ChannelSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepSection>,
    #[serde(rename = "LMP", skip_serializing_if = "Option::is_none")]
    lmp: Option<AlgorithmSection>,
    #[serde(rename = "CIMLMP", skip_serializing_if = "Option::is_none")]
    cimlmp: Option<AlgorithmSection>,
    #[serde(rename = "NLMP", skip_serializing_if = "Option::is_none")]
    nlmp: Option<AlgorithmSection>,
    #[serde(rename = "CIMNLMP", skip_serializing_if = "Option::is_none")]
    cimnlmp: Option<AlgorithmSection>,
    #[serde(rename = "VRNLMP", skip_serializing_if = "Option::is_none")]
    vrnlmp: Option<AlgorithmSection>,
    #[serde(rename = "CIMVRNLMP", skip_serializing_if = "Option::is_none")]
    cimvrnlmp: Option<AlgorithmSection>,
    /// Manifest metadata; ignored when read back as a configuration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub(crate) run: Option<RunSection>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<NoiseKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum NoiseKind {
    Stable,
    Silent,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<ChannelPreset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stages: Option<Vec<ChannelStage>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ChannelPreset {
    ThreeStage,
    Sparse,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    gammas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_values: Option<Vec<f64>>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgorithmSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RunSection {
    pub(crate) command: String,
    pub(crate) toolkit_version: String,
    pub(crate) timestamp: String,
    pub(crate) outputs: Vec<String>,
}

impl ConfigFile {
    fn section(&self, a: Algorithm) -> Option<&AlgorithmSection> {
        match a {
            Algorithm::Lmp => self.lmp.as_ref(),
            Algorithm::CimLmp => self.cimlmp.as_ref(),
            Algorithm::Nlmp => self.nlmp.as_ref(),
            Algorithm::CimNlmp => self.cimnlmp.as_ref(),
            Algorithm::VrNlmp => self.vrnlmp.as_ref(),
            Algorithm::CimVrNlmp => self.cimvrnlmp.as_ref(),
        }
    }

    fn section_mut(&mut self, a: Algorithm) -> &mut Option<AlgorithmSection> {
        match a {
            Algorithm::Lmp => &mut self.lmp,
            Algorithm::CimLmp => &mut self.cimlmp,
            Algorithm::Nlmp => &mut self.nlmp,
            Algorithm::CimNlmp => &mut self.cimnlmp,
            Algorithm::VrNlmp => &mut self.vrnlmp,
            Algorithm::CimVrNlmp => &mut self.cimvrnlmp,
        }
    }

    /// Apply this document on top of a preset.
    fn resolve(&self, preset: Preset) -> Result<RunConfig> {
        let mut cfg = RunConfig::preset(preset);
        let exp = &mut cfg.experiment;

        if let Some(seed) = self.seed {
            exp.seed = seed;
        }
        if let Some(v) = self.iterations {
            exp.iterations = v;
        }
        if let Some(v) = self.mc_runs {
            exp.mc_runs = v;
        }
        if let Some(v) = self.ss_window {
            exp.ss_window = v;
        }

        if let Some(ch) = &self.channel {
            exp.channel = match (&ch.preset, &ch.stages) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config("channel: set either `preset` or `stages`, not both".into()))
                }
                (Some(ChannelPreset::ThreeStage), None) => ChannelSchedule::three_stage(),
                (Some(ChannelPreset::Sparse), None) => ChannelSchedule::sparse_stationary(),
                (None, Some(stages)) => {
                    let length = stages.first().map_or(0, |s| s.weights.len());
                    ChannelSchedule::new(length, stages.clone())
                        .map_err(|e| Error::Config(format!("channel.stages: {e}")))?
                }
                (None, None) => exp.channel.clone(),
            };
        }
        let length = exp.channel.len();
        if let Some(l) = self.length {
            if l != length {
                return Err(Error::Config(format!("length: {l} does not match the channel length {length}")));
            }
        }

        if let Some(noise) = &self.noise {
            let base = exp.noise.stable().copied().unwrap_or(StableNoiseParams::symmetric(1.4));
            exp.noise = match noise.kind.unwrap_or(NoiseKind::Stable) {
                NoiseKind::Silent => NoiseSource::Silent,
                NoiseKind::Stable => NoiseSource::Stable(StableNoiseParams {
                    alpha: noise.alpha.unwrap_or(base.alpha),
                    beta: noise.beta.unwrap_or(base.beta),
                    gamma: noise.gamma.unwrap_or(base.gamma),
                    delta_loc: noise.delta.unwrap_or(base.delta_loc),
                }),
            };
        }

        let selected: Vec<Algorithm> = match &self.algorithms {
            Some(list) => {
                let mut seen = Vec::new();
                for a in list {
                    if seen.contains(a) {
                        return Err(Error::Config(format!("algorithms: `{a}` is listed twice")));
                    }
                    seen.push(*a);
                }
                seen
            }
            None => exp.algorithms.iter().map(|p| p.algorithm).collect(),
        };
        let preset_params = std::mem::take(&mut exp.algorithms);
        exp.algorithms = selected
            .into_iter()
            .map(|a| {
                let base = preset_params
                    .iter()
                    .find(|p| p.algorithm == a)
                    .cloned()
                    .unwrap_or_else(|| FilterParams::reference(a, length));
                let mut params = FilterParams { length, ..base };
                if let Some(p) = self.p {
                    params.p = p;
                }
                if let Some(s) = self.section(a) {
                    params.p = s.p.unwrap_or(params.p);
                    params.mu = s.mu.unwrap_or(params.mu);
                    params.rho = s.rho.unwrap_or(params.rho);
                    params.eps = s.eps.or(params.eps);
                    params.delta = s.delta.or(params.delta);
                    params.theta0 = s.theta0.or(params.theta0);
                    params.sigma = s.sigma.or(params.sigma);
                }
                params.validate().map_err(|e| match e {
                    Error::Parameter { name, reason } => Error::Config(format!("{a}.{name}: {reason}")),
                    other => other,
                })?;
                Ok(params)
            })
            .collect::<Result<_>>()?;

        if let Some(s) = &self.sweep {
            if let Some(v) = &s.gammas {
                cfg.sweep.gammas = v.clone();
            }
            if let Some(v) = &s.p_values {
                cfg.sweep.p_values = v.clone();
            }
            if let Some(v) = &s.alpha_values {
                cfg.sweep.alpha_values = v.clone();
            }
        }

        if let NoiseSource::Stable(n) = &cfg.experiment.noise {
            n.validate().map_err(|e| match e {
                Error::Parameter { name, reason } => Error::Config(format!("noise.{name}: {reason}")),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The fully explicit document for a resolved configuration.
    pub(crate) fn from_resolved(cfg: &RunConfig) -> Self {
        let exp = &cfg.experiment;
        let mut doc = ConfigFile {
            seed: Some(exp.seed),
            iterations: Some(exp.iterations),
            mc_runs: Some(exp.mc_runs),
            ss_window: Some(exp.ss_window),
            length: Some(exp.channel.len()),
            p: None,
            algorithms: Some(exp.algorithms.iter().map(|p| p.algorithm).collect()),
            noise: Some(match exp.noise {
                NoiseSource::Silent => NoiseSection { kind: Some(NoiseKind::Silent), ..Default::default() },
                NoiseSource::Stable(n) => NoiseSection {
                    kind: Some(NoiseKind::Stable),
                    alpha: Some(n.alpha),
                    beta: Some(n.beta),
                    gamma: Some(n.gamma),
                    delta: Some(n.delta_loc),
                },
            }),
            channel: Some(ChannelSection { preset: None, stages: Some(exp.channel.stages().to_vec()) }),
            sweep: Some(SweepSection {
                gammas: Some(cfg.sweep.gammas.clone()),
                p_values: Some(cfg.sweep.p_values.clone()),
                alpha_values: Some(cfg.sweep.alpha_values.clone()),
            }),
            ..Default::default()
        };
        for params in &exp.algorithms {
            *doc.section_mut(params.algorithm) = Some(AlgorithmSection {
                p: Some(params.p),
                mu: Some(params.mu),
                rho: Some(params.rho),
                eps: params.eps,
                delta: params.delta,
                theta0: params.theta0,
                sigma: params.sigma,
            });
        }
        doc
    }
}

/// Where a configuration layer came from, for error messages.
fn layer_error(origin: &str, err: impl std::fmt::Display) -> Error {
    Error::Config(format!("{origin}: {}", err.to_string().trim_end()))
}

/// Parse a `key=value` override into a one-key nested table. The value is
/// read as a TOML value, falling back to a bare string.
fn override_table(spec: &str) -> Result<Table> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| Error::Config(format!("--set {spec}: expected key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("--set {spec}: malformed key `{key}`")));
    }
    let value = toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));

    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().expect("nonempty key");
    let mut table = Table::new();
    table.insert(leaf.to_string(), value);
    for part in parts.into_iter().rev() {
        let mut outer = Table::new();
        outer.insert(part.to_string(), Value::Table(table));
        table = outer;
    }
    Ok(table)
}

fn merge(into: &mut Table, from: Table) {
    for (k, v) in from {
        match (into.get_mut(&k), v) {
            (Some(Value::Table(dst)), Value::Table(src)) => merge(dst, src),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

/// Sources of configuration, lowest precedence first: preset, file,
/// `mc_runs`/`seed` shortcuts, then `key=value` overrides.
#[derive(Debug, Clone, Default)]
pub struct ConfigSources<'a> {
    pub file: Option<&'a Path>,
    pub mc_runs: Option<usize>,
    pub seed: Option<u64>,
    pub overrides: &'a [String],
}

pub fn parse_config(preset: Preset, sources: &ConfigSources<'_>) -> Result<ParsedConfig> {
    let mut merged = Table::new();

    if let Some(path) = sources.file {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let origin = path.display().to_string();
        // typed parse first for line-accurate diagnostics
        toml::from_str::<ConfigFile>(&text).map_err(|e| layer_error(&origin, e))?;
        let mut table: Table = toml::from_str(&text).map_err(|e| layer_error(&origin, e))?;
        table.remove("run");
        merge(&mut merged, table);
    }

    let mut shortcuts = Table::new();
    if let Some(n) = sources.mc_runs {
        shortcuts.insert("mc_runs".into(), Value::Integer(to_toml_int("mc_runs", n as u64)?));
    }
    if let Some(seed) = sources.seed {
        shortcuts.insert("seed".into(), Value::Integer(to_toml_int("seed", seed)?));
    }
    merge(&mut merged, shortcuts);

    for spec in sources.overrides {
        let table = override_table(spec)?;
        ConfigFile::deserialize(Value::Table(table.clone())).map_err(|e| layer_error(&format!("--set {spec}"), e))?;
        merge(&mut merged, table);
    }

    let doc = ConfigFile::deserialize(Value::Table(merged)).map_err(|e| layer_error("config", e))?;
    let config = doc.resolve(preset)?;
    if config.experiment.seed > i64::MAX as u64 {
        return Err(Error::Config(format!("seed: must be <= {}", i64::MAX)));
    }
    let warnings = config.warnings();
    Ok(ParsedConfig { config, warnings })
}

fn to_toml_int(name: &str, v: u64) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::Config(format!("{name}: {v} exceeds {}", i64::MAX)))
}

/// Render a resolved configuration (plus optional run metadata) as TOML.
pub(crate) fn render(cfg: &RunConfig, run: Option<RunSection>) -> Result<String> {
    let mut doc = ConfigFile::from_resolved(cfg);
    doc.run = run;
    toml::to_string(&doc).map_err(|e| Error::Config(format!("cannot serialize configuration: {e}")))
}

/// The resolved configuration as a standalone TOML document.
pub fn to_toml(cfg: &RunConfig) -> Result<String> {
    render(cfg, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse(preset: Preset, overrides: &[&str]) -> Result<ParsedConfig> {
        let owned: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        parse_config(preset, &ConfigSources { overrides: &owned, ..Default::default() })
    }

    #[test]
    fn defaults_match_reference_settings() {
        let cfg = parse(Preset::Convergence, &[]).unwrap();
        let exp = &cfg.config.experiment;
        assert_eq!(exp.iterations, 10_000);
        assert_eq!(exp.mc_runs, 100);
        assert_eq!(exp.ss_window, 1000);
        assert_eq!(exp.channel, ChannelSchedule::three_stage());
        assert_eq!(exp.noise, NoiseSource::Stable(StableNoiseParams::new(1.4, 0.0, 1.0, 0.0).unwrap()));
        let by = |a| exp.algorithms.iter().find(|p| p.algorithm == a).unwrap();
        assert_eq!(exp.algorithms.len(), 6);
        assert!(exp.algorithms.iter().all(|p| p.p == 1.2 && p.length == 30));
        assert_eq!((by(Algorithm::Lmp).mu, by(Algorithm::Lmp).rho), (7e-3, 1e-4));
        assert_eq!((by(Algorithm::CimLmp).mu, by(Algorithm::CimLmp).rho), (7e-3, 1e-3));
        assert_eq!(by(Algorithm::CimLmp).sigma, Some(1e-2));
        assert_eq!((by(Algorithm::Nlmp).mu, by(Algorithm::Nlmp).eps), (8e-2, Some(1e-3)));
        let c = by(Algorithm::CimNlmp);
        assert_eq!((c.mu, c.rho, c.eps, c.sigma), (9e-2, 1e-3, Some(1e-3), Some(8e-2)));
        let v = by(Algorithm::VrNlmp);
        assert_eq!((v.mu, v.delta, v.theta0), (8e-2, Some(0.99), Some(1e-5)));
        let cv = by(Algorithm::CimVrNlmp);
        assert_eq!((cv.mu, cv.rho, cv.delta, cv.theta0, cv.sigma), (9e-2, 1e-3, Some(0.99), Some(1e-5), Some(8e-2)));
        // only the inert LMP rho is flagged
        assert_eq!(cfg.warnings.len(), 1, "{:?}", cfg.warnings);
    }

    #[test]
    fn grid_preset_uses_its_own_kernel_width() {
        let cfg = parse(Preset::PAlphaGrid, &[]).unwrap().config;
        let [a] = cfg.experiment.algorithms.as_slice() else { panic!() };
        assert_eq!(a.algorithm, Algorithm::CimVrNlmp);
        assert_eq!((a.mu, a.theta0, a.rho, a.delta, a.sigma), (0.09, Some(1e-5), 1e-3, Some(0.99), Some(0.07)));
        assert_eq!(cfg.sweep.p_values.len() * cfg.sweep.alpha_values.len(), 42);
        assert_eq!(cfg.experiment.channel.stages().len(), 1);
    }

    #[test]
    fn zero_runs_rejected() {
        let err = parse(Preset::Convergence, &["mc_runs=0"]).unwrap_err();
        assert!(err.to_string().contains("mc_runs"), "{err}");
    }

    #[test]
    fn exponent_above_alpha_warns() {
        let cfg = parse(Preset::Convergence, &["p=2.5"]).unwrap();
        assert!(cfg.config.experiment.algorithms.iter().all(|a| a.p == 2.5));
        let alpha_warnings = cfg.warnings.iter().filter(|w| w.contains("alpha = 1.4")).count();
        assert_eq!(alpha_warnings, 6, "{:?}", cfg.warnings);
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let cfg = parse(
            Preset::Convergence,
            &["noise.alpha=1.2", "CIMNLMP.mu=0.05", "algorithms=[\"NLMP\", \"CIMNLMP\"]", "channel.preset=sparse"],
        )
        .unwrap()
        .config;
        let exp = &cfg.experiment;
        assert_eq!(exp.noise.stable().unwrap().alpha, 1.2);
        assert_eq!(exp.algorithms.len(), 2);
        assert_eq!(exp.algorithms[1].mu, 0.05);
        assert_eq!(exp.channel.stages().len(), 1);
    }

    #[test]
    fn unknown_keys_and_names_rejected() {
        for bad in ["bogus=1", "noise.bogus=1", "CIMNLMP.lambda=1", "algorithms=[\"RLS\"]", "RLS.mu=1"] {
            let err = parse(Preset::Convergence, &[bad]).unwrap_err();
            assert!(err.to_string().contains(bad), "{bad}: {err}");
        }
        assert!(parse(Preset::Convergence, &["novalue"]).is_err());
        assert!(parse(Preset::Convergence, &["noise.=1"]).is_err());
    }

    #[test]
    fn range_errors_name_the_field() {
        let cases = [
            ("CIMVRNLMP.delta=1.5", "CIMVRNLMP.delta"),
            ("NLMP.mu=-1", "NLMP.mu"),
            ("noise.alpha=2.5", "noise.alpha"),
            ("ss_window=20000", "ss_window"),
            ("sweep.gammas=[]", "sweep.gammas"),
            ("sweep.alpha_values=[3.0]", "sweep.alpha_values"),
        ];
        for (set, field) in cases {
            let err = parse(Preset::Convergence, &[set]).unwrap_err().to_string();
            assert!(err.contains(field), "{set}: {err}");
        }
    }

    #[test]
    fn file_errors_carry_line_numbers() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "seed = 3\niterations = 100\n\n[noise]\nalpah = 1.0").unwrap();
        let err = parse_config(Preset::Convergence, &ConfigSources { file: Some(f.path()), ..Default::default() })
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 5") && err.contains("alpah"), "{err}");
    }

    #[test]
    fn precedence_file_then_shortcuts_then_overrides() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "seed = 3\nmc_runs = 7\niterations = 50\nss_window = 10").unwrap();
        let overrides = vec!["seed=9".to_string()];
        let cfg = parse_config(
            Preset::Convergence,
            &ConfigSources { file: Some(f.path()), mc_runs: Some(QUICK_MC_RUNS), seed: Some(4), overrides: &overrides },
        )
        .unwrap()
        .config;
        assert_eq!(cfg.experiment.mc_runs, QUICK_MC_RUNS);
        assert_eq!(cfg.experiment.seed, 9);
        assert_eq!(cfg.experiment.iterations, 50);
    }

    #[test]
    fn rendered_config_resolves_to_itself() {
        let parsed =
            parse(Preset::GammaSweep, &["noise.kind=silent", "VRNLMP.p=1.7", "iterations=300", "ss_window=100"])
                .unwrap();
        let text = to_toml(&parsed.config).unwrap();
        let doc: ConfigFile = toml::from_str(&text).unwrap();
        // explicit documents resolve identically under any preset
        for preset in [Preset::Convergence, Preset::GammaSweep, Preset::PAlphaGrid] {
            assert_eq!(doc.resolve(preset).unwrap(), parsed.config);
        }
    }

    #[test]
    fn explicit_stages_and_length_check() {
        let cfg = parse(
            Preset::Convergence,
            &["channel.stages=[{start = 0, weights = [1.0, 0.0]}, {start = 5, weights = [0.0, 1.0]}]"],
        )
        .unwrap()
        .config;
        assert_eq!(cfg.experiment.channel.len(), 2);
        assert!(cfg.experiment.algorithms.iter().all(|a| a.length == 2));
        assert!(parse(Preset::Convergence, &["length=12"]).is_err());
        assert!(parse(Preset::Convergence, &["channel.stages=[{start = 3, weights = [1.0]}]"]).is_err());
    }
}
