use sparse_nlmp::config::{parse_config, ConfigSources, Preset};
use sparse_nlmp::filter::{Algorithm, FilterParams};
use sparse_nlmp::noise::{RngStream, StableNoiseParams};
use sparse_nlmp::sim::{self, ChannelSchedule, ExperimentConfig, NoiseSource, RunAccumulator};

fn small(algorithms: Vec<FilterParams>, noise: NoiseSource, iterations: usize, mc_runs: usize) -> ExperimentConfig {
    ExperimentConfig {
        channel: ChannelSchedule::sparse_stationary(),
        noise,
        algorithms,
        iterations,
        mc_runs,
        seed: 11,
        ss_window: iterations.min(1000),
    }
}

fn alpha14() -> NoiseSource {
    NoiseSource::Stable(StableNoiseParams::symmetric(1.4))
}

#[test]
fn cold_start_msd_is_channel_energy() {
    let cfg = parse_config(Preset::Convergence, &ConfigSources { mc_runs: Some(2), ..Default::default() }).unwrap();
    let mut exp = cfg.config.experiment;
    exp.iterations = 50;
    exp.ss_window = 10;
    for t in sim::run_experiment(&exp).unwrap() {
        assert_eq!(t.msd[0], 4.0, "{}", t.label);
    }
}

#[test]
fn algorithms_share_each_realization() {
    let l = 30;
    let nlmp = FilterParams::reference(Algorithm::Nlmp, l);
    let cfg = small(vec![nlmp.clone(), nlmp.clone(), FilterParams::reference(Algorithm::Lmp, l)], alpha14(), 500, 3);
    let traces = sim::run_experiment(&cfg).unwrap();
    assert_eq!(traces[0].msd, traces[1].msd);

    // both start from zero, then see the same first sample and move apart
    assert_eq!(traces[0].msd[0], traces[2].msd[0]);
    assert_ne!(traces[0].msd[1], traces[2].msd[1]);

    // a single run reproduces the first realization exactly
    let one = sim::run_experiment(&ExperimentConfig { mc_runs: 1, ..cfg.clone() }).unwrap();
    let real = sim::synthesize_run(&cfg.channel, &cfg.noise, &RngStream::new(cfg.seed, 0), cfg.iterations).unwrap();
    assert_eq!(one[0].msd, sim::run_filter(&nlmp, &real).unwrap());
}

#[test]
fn noiseless_nlms_converges() {
    let params = FilterParams { p: 2.0, mu: 0.5, ..FilterParams::reference(Algorithm::Nlmp, 30) };
    let cfg = small(vec![params], NoiseSource::Silent, 2000, 4);
    let t = &sim::run_experiment(&cfg).unwrap()[0];
    assert!(t.msd[1999] < 1e-6 * t.msd[0], "final {:e} from {:e}", t.msd[1999], t.msd[0]);
}

#[test]
fn empty_algorithm_list_yields_no_traces() {
    let cfg = small(Vec::new(), alpha14(), 100, 2);
    assert!(sim::run_experiment(&cfg).unwrap().is_empty());
}

#[test]
fn invalid_experiment_is_rejected() {
    let base = small(vec![FilterParams::reference(Algorithm::Nlmp, 30)], alpha14(), 100, 2);
    assert!(sim::run_experiment(&ExperimentConfig { mc_runs: 0, ..base.clone() }).is_err());
    assert!(sim::run_experiment(&ExperimentConfig { ss_window: 101, ..base.clone() }).is_err());
    let short = FilterParams::reference(Algorithm::Nlmp, 16);
    assert!(sim::run_experiment(&ExperimentConfig { algorithms: vec![short], ..base }).is_err());
}

#[test]
fn steady_state_is_stationary_in_the_window() {
    let cfg = small(vec![FilterParams::reference(Algorithm::CimVrNlmp, 30)], alpha14(), 6000, 20);
    let t = &sim::run_experiment(&cfg).unwrap()[0];
    let full = sim::steady_state_msd(t, 1000).unwrap();
    let half = sim::steady_state_msd(t, 500).unwrap();
    assert!((half / full - 1.0).abs() < 0.1, "{half} vs {full}");
}

#[test]
fn aggregation_ignores_run_order() {
    let runs: Vec<Vec<f64>> = (0..7).map(|r| (0..5).map(|n| ((r * 5 + n) as f64).sin().abs()).collect()).collect();
    let mean = |order: &[usize]| {
        let mut acc = RunAccumulator::new(5);
        for &i in order {
            acc.push(Some(&runs[i]));
        }
        acc.push(None);
        acc.finish()
    };
    let (a, da) = mean(&[0, 1, 2, 3, 4, 5, 6]);
    let (b, db) = mean(&[6, 4, 2, 0, 5, 3, 1]);
    assert_eq!((da, db), (1, 1));
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() <= 1e-15 * x.abs());
    }
}

#[test]
fn diverging_runs_are_excluded_and_counted() {
    let wild = FilterParams { p: 2.0, mu: 10.0, ..FilterParams::reference(Algorithm::Lmp, 30) };
    let tame = FilterParams::reference(Algorithm::Nlmp, 30);
    let cfg = small(vec![wild, tame], alpha14(), 2000, 3);
    let traces = sim::run_experiment(&cfg).unwrap();
    assert_eq!(traces[0].diverged_runs, 3);
    assert!(traces[0].all_diverged());
    assert!(traces[0].msd.iter().all(|v| v.is_nan()));
    assert_eq!(traces[1].diverged_runs, 0);
    assert!(traces[1].msd.iter().all(|v| v.is_finite()));
}

#[test]
fn sweeps_have_requested_shape() {
    let base = small(
        vec![FilterParams::reference(Algorithm::Nlmp, 30), FilterParams::reference(Algorithm::CimVrNlmp, 30)],
        alpha14(),
        300,
        2,
    );
    let g = sim::sweep_gamma(&ExperimentConfig { ss_window: 100, ..base.clone() }, &[0.5, 1.0, 2.0]).unwrap();
    assert_eq!(g.gammas, [0.5, 1.0, 2.0]);
    assert_eq!(g.labels, ["NLMP", "CIMVRNLMP"]);
    assert!(g.values.iter().all(|r| r.len() == 2));
    assert_eq!(g.values.len(), 3);

    // the grid needs exactly one algorithm
    assert!(sim::sweep_p_alpha(&base, &[1.2], &[1.4]).is_err());
    let single = ExperimentConfig { algorithms: vec![base.algorithms[1].clone()], ss_window: 100, ..base };
    let grid = sim::sweep_p_alpha(&single, &[1.0, 1.2], &[1.4, 1.6, 2.0]).unwrap();
    assert_eq!(grid.values.len(), 2);
    assert!(grid.values.iter().all(|r| r.len() == 3));
    assert_eq!(grid.get(1.2, 1.6), Some(grid.values[1][1]));
    assert_eq!(grid.get(1.3, 1.6), None);
}
