//! Sparsity-aware least-mean-p-power adaptive filters for system
//! identification under impulsive noise.
//!
//! The crate provides
//!
//! - [`filter`]: LMP, NLMP and their correntropy-penalized (CIM) and
//!   variable-regularization (VR) variants as single-sample updates,
//! - [`cim`]: the correntropy-induced metric used as a smooth ℓ₀ penalty,
//! - [`noise`]: reproducible Gaussian input streams and alpha-stable noise,
//! - [`sim`]: a paired Monte-Carlo harness producing MSD learning curves and
//!   steady-state sweeps,
//! - [`config`] and [`runner`]: TOML experiment configuration, the three
//!   experiment commands, and their CSV and manifest outputs.
//!
//! ```
//! use sparse_nlmp::filter::{AdaptiveFilter, Algorithm, FilterParams};
//!
//! let mut f = AdaptiveFilter::new(FilterParams::reference(Algorithm::CimVrNlmp, 4)).unwrap();
//! let e = f.step(&[1.0, 0.0, 0.0, 0.0], 0.5).unwrap();
//! assert_eq!(e, 0.5);
//! assert!(f.weights()[0] > 0.0);
//! ```

pub mod cim;
pub mod config;
pub mod error;
pub mod filter;
pub mod noise;
pub mod runner;
pub mod sim;

pub use cim::{cim_gradient, cim_squared, CimKernel};
pub use config::{parse_config, ConfigSources, ParsedConfig, Preset, RunConfig, SweepSpec};
pub use error::{Error, Result};
pub use filter::{
    error_power_term, predict, reset, step, AdaptiveFilter, Algorithm, FilterParams, FilterState, SampleUpdate,
};
pub use noise::{gaussian_regressors, stable_sample, theoretical_cf, AlphaStable, RngStream, StableNoiseParams};
pub use sim::{
    run_experiment, steady_state_msd, sweep_gamma, sweep_p_alpha, synthesize_run, ChannelSchedule, ChannelStage,
    ExperimentConfig, MsdTrace, NoiseSource,
};
