//! One realization, six filters, stepped sample by sample.
//!
//! Identifies a sparse 30-tap channel under alpha-stable noise (α = 1.4) with
//! every algorithm at its reference settings and prints the final squared
//! deviation.
//!
//! `cargo run --release --example filter_family`

use sparse_nlmp::noise::{RngStream, StableNoiseParams};
use sparse_nlmp::sim::{synthesize_run, ChannelSchedule, NoiseSource};
use sparse_nlmp::{AdaptiveFilter, Algorithm, FilterParams};

pub fn run_example() -> anyhow::Result<()> {
    let channel = ChannelSchedule::sparse_stationary();
    let noise = NoiseSource::Stable(StableNoiseParams::symmetric(1.4));
    let real = synthesize_run(&channel, &noise, &RngStream::new(7, 0), 4000)?;
    let truth = channel.weights_at(0);

    println!("{:<10} {:>12} {:>12}", "algorithm", "MSD [dB]", "regularizer");
    for alg in Algorithm::ALL {
        let mut f = AdaptiveFilter::new(FilterParams::reference(alg, channel.len()))?;
        for s in real.iter() {
            f.step(s.x, s.d)?;
        }
        let msd: f64 = f.weights().iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
        let reg = f.regularizer().map_or("-".to_string(), |r| format!("{r:.3e}"));
        println!("{:<10} {:>12.2} {:>12}", alg.label(), 10.0 * msd.log10(), reg);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
