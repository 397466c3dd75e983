//! Monte-Carlo system identification.
//!
//! Each run draws one white Gaussian input stream and one noise stream, feeds
//! the same realization to every configured filter, and records the squared
//! deviation `‖w*(n) − w(n)‖²` before each update. Runs execute in parallel;
//! per-iteration sums are always accumulated in run order so results do not
//! depend on the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::filter::{self, Algorithm, FilterParams, SampleUpdate};
use crate::noise::{gaussian_regressors, RngStream, StableNoiseParams};
use rand_distr::Distribution;

const INPUT_LANE: u64 = 1;
const NOISE_LANE: u64 = 2;
/// Runs held in memory at once during aggregation.
const RUN_BATCH: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStage {
    pub start: u64,
    pub weights: Vec<f64>,
}

/// Piecewise-constant true impulse response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSchedule {
    length: usize,
    stages: Vec<ChannelStage>,
}

impl ChannelSchedule {
    pub fn new(length: usize, stages: Vec<ChannelStage>) -> Result<Self> {
        if length == 0 {
            return Err(Error::param("length", "channel length must be >= 1"));
        }
        let first = stages.first().ok_or_else(|| Error::param("stages", "at least one stage is required"))?;
        if first.start != 0 {
            return Err(Error::param("stages", format!("first stage must start at 0, got {}", first.start)));
        }
        for pair in stages.windows(2) {
            if pair[1].start <= pair[0].start {
                return Err(Error::param(
                    "stages",
                    format!("stage starts must increase strictly ({} after {})", pair[1].start, pair[0].start),
                ));
            }
        }
        for s in &stages {
            check_len(length, s.weights.len())?;
            if s.weights.iter().any(|w| !w.is_finite()) {
                return Err(Error::param("stages", "channel weights must be finite"));
            }
        }
        Ok(Self { length, stages })
    }

    pub fn stationary(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights.len(), vec![ChannelStage { start: 0, weights }])
    }

    /// The three-stage, length-30 channel: 4 unit taps, then 15 unit taps at
    /// even positions from iteration 4000, then all 30 taps alternating ±1
    /// from iteration 7000.
    pub fn three_stage() -> Self {
        const L: usize = 30;
        let mut sparse = vec![0.0; L];
        for i in [3, 9, 17, 24] {
            sparse[i] = 1.0;
        }
        let half = (0..L).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let dense = (0..L).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        Self::new(
            L,
            vec![
                ChannelStage { start: 0, weights: sparse },
                ChannelStage { start: 4000, weights: half },
                ChannelStage { start: 7000, weights: dense },
            ],
        )
        .expect("three-stage channel is valid")
    }

    /// Only the first (sparsest) stage of [`ChannelSchedule::three_stage`].
    pub fn sparse_stationary() -> Self {
        let full = Self::three_stage();
        Self::stationary(full.stages[0].weights.clone()).expect("valid")
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn stages(&self) -> &[ChannelStage] {
        &self.stages
    }

    pub fn stage_index_at(&self, iteration: u64) -> usize {
        self.stages.partition_point(|s| s.start <= iteration) - 1
    }

    pub fn weights_at(&self, iteration: u64) -> &[f64] {
        &self.stages[self.stage_index_at(iteration)].weights
    }
}

/// Additive noise `v(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseSource {
    Stable(StableNoiseParams),
    /// `v ≡ 0`.
    Silent,
}

impl NoiseSource {
    pub fn stable(&self) -> Option<&StableNoiseParams> {
        match self {
            NoiseSource::Stable(p) => Some(p),
            NoiseSource::Silent => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channel: ChannelSchedule,
    pub noise: NoiseSource,
    pub algorithms: Vec<FilterParams>,
    pub iterations: usize,
    pub mc_runs: usize,
    pub seed: u64,
    /// Trailing iterations averaged for the steady-state MSD.
    pub ss_window: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::param("iterations", "must be >= 1"));
        }
        if self.mc_runs == 0 {
            return Err(Error::param("mc_runs", "must be >= 1"));
        }
        if self.ss_window == 0 || self.ss_window > self.iterations {
            return Err(Error::param(
                "ss_window",
                format!("must lie in 1..={}, got {}", self.iterations, self.ss_window),
            ));
        }
        if let NoiseSource::Stable(p) = &self.noise {
            p.validate()?;
        }
        for a in &self.algorithms {
            a.validate()?;
            if a.length != self.channel.len() {
                return Err(Error::param(
                    "length",
                    format!("{} has length {} but the channel has {}", a.algorithm, a.length, self.channel.len()),
                ));
            }
        }
        Ok(())
    }
}

/// One run's input and noise realization.
#[derive(Debug, Clone)]
pub struct Realization<'a> {
    channel: &'a ChannelSchedule,
    // input samples newest-first, followed by L−1 zeros
    delay_line: Vec<f64>,
    desired: Vec<f64>,
}

/// One iteration of a [`Realization`].
#[derive(Debug, Clone, Copy)]
pub struct RunSample<'a> {
    pub x: &'a [f64],
    pub d: f64,
    pub w_true: &'a [f64],
}

impl<'a> Realization<'a> {
    pub fn len(&self) -> usize {
        self.desired.len()
    }

    pub fn is_empty(&self) -> bool {
        self.desired.is_empty()
    }

    /// `x(n) = [u(n), u(n−1), …, u(n−L+1)]` with zeros before `u(0)`.
    pub fn regressor(&self, n: usize) -> &[f64] {
        let start = self.len() - 1 - n;
        &self.delay_line[start..start + self.channel.len()]
    }

    pub fn sample(&self, n: usize) -> RunSample<'_> {
        RunSample { x: self.regressor(n), d: self.desired[n], w_true: self.channel.weights_at(n as u64) }
    }

    pub fn iter(&self) -> impl Iterator<Item = RunSample<'_>> + '_ {
        (0..self.len()).map(move |n| self.sample(n))
    }
}

/// Draw inputs and noise for one run and form `d(n) = w*(n)ᵀx(n) + v(n)`.
pub fn synthesize_run<'a>(
    channel: &'a ChannelSchedule,
    noise: &NoiseSource,
    rng: &RngStream,
    iterations: usize,
) -> Result<Realization<'a>> {
    let l = channel.len();
    let mut inputs = gaussian_regressors(&mut rng.lane(INPUT_LANE), iterations);
    inputs.reverse();
    inputs.resize(iterations + l - 1, 0.0);

    let mut noise_rng = rng.lane(NOISE_LANE);
    let dist = noise.stable().map(|p| p.distribution()).transpose()?;

    let mut real = Realization { channel, delay_line: inputs, desired: vec![0.0; iterations] };
    for n in 0..iterations {
        let x = real.regressor(n);
        let w = channel.weights_at(n as u64);
        let clean: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
        let v = dist.as_ref().map_or(0.0, |d| d.sample(&mut noise_rng));
        real.desired[n] = clean + v;
    }
    Ok(real)
}

/// Squared deviation before every update, or the divergence error.
pub fn run_filter(params: &FilterParams, realization: &Realization<'_>) -> Result<Vec<f64>> {
    let mut state = filter::reset(params)?;
    let mut out = Vec::with_capacity(realization.len());
    for s in realization.iter() {
        out.push(squared_distance(s.w_true, &state.w));
        filter::step(&mut state, params, SampleUpdate { x: s.x, d: s.d })?;
    }
    Ok(out)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// MC-averaged MSD learning curve of one algorithm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MsdTrace {
    pub label: String,
    pub algorithm: Algorithm,
    pub msd: Vec<f64>,
    pub runs: usize,
    pub diverged_runs: usize,
}

impl MsdTrace {
    /// `10·log₁₀(MSD)` per iteration.
    pub fn to_db(&self) -> Vec<f64> {
        self.msd.iter().map(|m| 10.0 * m.log10()).collect()
    }

    pub fn all_diverged(&self) -> bool {
        self.diverged_runs == self.runs
    }
}

/// Running per-iteration sum over runs, fed in run order.
#[derive(Debug, Clone)]
pub struct RunAccumulator {
    sum: Vec<f64>,
    kept: usize,
    diverged: usize,
}

impl RunAccumulator {
    pub fn new(iterations: usize) -> Self {
        Self { sum: vec![0.0; iterations], kept: 0, diverged: 0 }
    }

    /// `None` marks a diverged run.
    pub fn push(&mut self, run: Option<&[f64]>) {
        match run {
            Some(v) => {
                for (s, x) in self.sum.iter_mut().zip(v) {
                    *s += x;
                }
                self.kept += 1;
            }
            None => self.diverged += 1,
        }
    }

    /// Per-iteration mean over kept runs (NaN if every run diverged) and the
    /// number of diverged runs.
    pub fn finish(self) -> (Vec<f64>, usize) {
        let k = self.kept as f64;
        let mean =
            if self.kept == 0 { vec![f64::NAN; self.sum.len()] } else { self.sum.into_iter().map(|s| s / k).collect() };
        (mean, self.diverged)
    }
}

/// Run every algorithm over `mc_runs` paired realizations.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<MsdTrace>> {
    config.validate()?;
    if config.algorithms.is_empty() {
        return Ok(Vec::new());
    }
    let mut acc: Vec<RunAccumulator> =
        config.algorithms.iter().map(|_| RunAccumulator::new(config.iterations)).collect();

    let runs: Vec<usize> = (0..config.mc_runs).collect();
    for batch in runs.chunks(RUN_BATCH) {
        let results: Vec<Vec<Option<Vec<f64>>>> = batch
            .par_iter()
            .map(|&r| -> Result<_> {
                let rng = RngStream::new(config.seed, r as u64);
                let real = synthesize_run(&config.channel, &config.noise, &rng, config.iterations)?;
                Ok(config
                    .algorithms
                    .iter()
                    .map(|p| match run_filter(p, &real) {
                        Ok(v) => Some(v),
                        Err(Error::Diverged { iteration, .. }) => {
                            log::debug!("{} run {r} diverged at iteration {iteration}", p.algorithm);
                            None
                        }
                        // params were validated; no other error is reachable
                        Err(e) => panic!("unexpected filter error: {e}"),
                    })
                    .collect())
            })
            .collect::<Result<_>>()?;
        for per_algo in &results {
            for (a, run) in acc.iter_mut().zip(per_algo) {
                a.push(run.as_deref());
            }
        }
    }

    Ok(config
        .algorithms
        .iter()
        .zip(acc)
        .map(|(p, a)| {
            let (msd, diverged_runs) = a.finish();
            if diverged_runs > 0 {
                log::warn!("{}: {diverged_runs} of {} runs diverged", p.algorithm, config.mc_runs);
            }
            MsdTrace {
                label: p.algorithm.label().to_string(),
                algorithm: p.algorithm,
                msd,
                runs: config.mc_runs,
                diverged_runs,
            }
        })
        .collect())
}

/// Mean of the trailing `window` entries.
pub fn steady_state_msd(trace: &MsdTrace, window: usize) -> Result<f64> {
    let n = trace.msd.len();
    if window == 0 || window > n {
        return Err(Error::param("window", format!("must lie in 1..={n}, got {window}")));
    }
    window_mean(&trace.msd, n - window..n)
}

/// Mean over an iteration range.
pub fn window_mean(msd: &[f64], range: std::ops::Range<usize>) -> Result<f64> {
    if range.is_empty() || range.end > msd.len() {
        return Err(Error::param("window", format!("range {range:?} invalid for {} iterations", msd.len())));
    }
    let len = range.len() as f64;
    Ok(msd[range].iter().sum::<f64>() / len)
}

/// Steady-state MSD per dispersion value (rows) and algorithm (columns).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaSweep {
    pub gammas: Vec<f64>,
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

pub fn sweep_gamma(base: &ExperimentConfig, gammas: &[f64]) -> Result<GammaSweep> {
    if gammas.is_empty() {
        return Err(Error::param("gammas", "at least one value is required"));
    }
    let noise = *base.noise.stable().ok_or_else(|| Error::param("noise", "a dispersion sweep needs stable noise"))?;
    let mut values = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let cfg = ExperimentConfig { noise: NoiseSource::Stable(StableNoiseParams { gamma, ..noise }), ..base.clone() };
        let traces = run_experiment(&cfg)?;
        values.push(traces.iter().map(|t| steady_state_msd(t, cfg.ss_window)).collect::<Result<_>>()?);
    }
    Ok(GammaSweep {
        gammas: gammas.to_vec(),
        labels: base.algorithms.iter().map(|p| p.algorithm.label().to_string()).collect(),
        values,
    })
}

/// Steady-state MSD over a `p × α` grid; `values[i][j]` is `(p_values[i], alpha_values[j])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SsMsdGrid {
    pub algorithm: Algorithm,
    pub p_values: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl SsMsdGrid {
    pub fn get(&self, p: f64, alpha: f64) -> Option<f64> {
        let i = self.p_values.iter().position(|&v| v == p)?;
        let j = self.alpha_values.iter().position(|&v| v == alpha)?;
        Some(self.values[i][j])
    }
}

/// Sweep the error exponent of the single configured algorithm against the
/// characteristic exponent of the noise.
pub fn sweep_p_alpha(base: &ExperimentConfig, p_values: &[f64], alpha_values: &[f64]) -> Result<SsMsdGrid> {
    if p_values.is_empty() || alpha_values.is_empty() {
        return Err(Error::param("grid", "p and alpha value lists must be nonempty"));
    }
    let [algo] = base.algorithms.as_slice() else {
        return Err(Error::param(
            "algorithms",
            format!("a p-alpha grid takes exactly one algorithm, got {}", base.algorithms.len()),
        ));
    };
    let noise = *base.noise.stable().ok_or_else(|| Error::param("noise", "a p-alpha grid needs stable noise"))?;
    let mut values = Vec::with_capacity(p_values.len());
    for &p in p_values {
        let mut row = Vec::with_capacity(alpha_values.len());
        for &alpha in alpha_values {
            let cfg = ExperimentConfig {
                noise: NoiseSource::Stable(StableNoiseParams { alpha, ..noise }),
                algorithms: vec![FilterParams { p, ..algo.clone() }],
                ..base.clone()
            };
            let trace = run_experiment(&cfg)?.remove(0);
            row.push(steady_state_msd(&trace, cfg.ss_window)?);
        }
        values.push(row);
    }
    Ok(SsMsdGrid {
        algorithm: algo.algorithm,
        p_values: p_values.to_vec(),
        alpha_values: alpha_values.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(msd: Vec<f64>) -> MsdTrace {
        MsdTrace { label: "T".into(), algorithm: Algorithm::Nlmp, msd, runs: 1, diverged_runs: 0 }
    }

    #[test]
    fn three_stage_channel_shape() {
        let c = ChannelSchedule::three_stage();
        assert_eq!(c.len(), 30);
        assert_eq!(c.stages().len(), 3);
        let nnz = |s: &ChannelStage| s.weights.iter().filter(|w| **w != 0.0).count();
        assert_eq!(nnz(&c.stages()[0]), 4);
        assert_eq!(nnz(&c.stages()[1]), 15);
        assert_eq!(nnz(&c.stages()[2]), 30);
        assert_eq!(c.stage_index_at(3999), 0);
        assert_eq!(c.stage_index_at(4000), 1);
        assert_eq!(c.stage_index_at(6999), 1);
        assert_eq!(c.stage_index_at(7000), 2);
        assert_eq!(c.stage_index_at(u64::MAX), 2);
    }

    #[test]
    fn channel_validation() {
        let st = |start, n| ChannelStage { start, weights: vec![1.0; n] };
        assert!(ChannelSchedule::new(2, vec![]).is_err());
        assert!(ChannelSchedule::new(2, vec![st(1, 2)]).is_err());
        assert!(ChannelSchedule::new(2, vec![st(0, 2), st(0, 2)]).is_err());
        assert!(ChannelSchedule::new(2, vec![st(0, 2), st(5, 3)]).is_err());
        assert!(ChannelSchedule::new(0, vec![st(0, 0)]).is_err());
        assert!(ChannelSchedule::new(2, vec![st(0, 2), st(5, 2)]).is_ok());
    }

    #[test]
    fn silent_realization_is_noiseless() {
        let c = ChannelSchedule::three_stage();
        let real = synthesize_run(&c, &NoiseSource::Silent, &RngStream::new(5, 0), 4100).unwrap();
        for n in [0, 1, 29, 30, 3999, 4000, 4099] {
            let s = real.sample(n);
            let clean: f64 = s.w_true.iter().zip(s.x).map(|(a, b)| a * b).sum();
            assert_eq!(s.d, clean);
        }
        assert_eq!(real.sample(3999).w_true, c.stages()[0].weights.as_slice());
        assert_eq!(real.sample(4000).w_true, c.stages()[1].weights.as_slice());
    }

    #[test]
    fn delay_line_cold_start_and_shift() {
        let c = ChannelSchedule::stationary(vec![0.0; 4]).unwrap();
        let real = synthesize_run(&c, &NoiseSource::Silent, &RngStream::new(1, 2), 10).unwrap();
        let u = gaussian_regressors(&mut RngStream::new(1, 2).lane(INPUT_LANE), 10);
        assert_eq!(real.regressor(0), &[u[0], 0.0, 0.0, 0.0]);
        assert_eq!(real.regressor(2), &[u[2], u[1], u[0], 0.0]);
        assert_eq!(real.regressor(9), &[u[9], u[8], u[7], u[6]]);
    }

    #[test]
    fn steady_state_means() {
        assert_eq!(steady_state_msd(&trace(vec![1.0, 2.0, 3.0, 4.0]), 2).unwrap(), 3.5);
        let c = trace(vec![0.25; 100]);
        for w in [1, 10, 100] {
            assert_eq!(steady_state_msd(&c, w).unwrap(), 0.25);
        }
        assert!(steady_state_msd(&c, 0).is_err());
        assert!(steady_state_msd(&c, 101).is_err());
        assert_eq!(window_mean(&[1.0, 2.0, 3.0, 4.0], 0..2).unwrap(), 1.5);
        assert!(window_mean(&[1.0], 0..0).is_err());
    }

    #[test]
    fn accumulator_skips_diverged_runs() {
        let mut acc = RunAccumulator::new(2);
        acc.push(Some(&[1.0, 2.0]));
        acc.push(None);
        acc.push(Some(&[3.0, 4.0]));
        assert_eq!(acc.finish(), (vec![2.0, 3.0], 1));
        let mut all = RunAccumulator::new(1);
        all.push(None);
        let (m, d) = all.finish();
        assert!(m[0].is_nan());
        assert_eq!(d, 1);
    }
}
