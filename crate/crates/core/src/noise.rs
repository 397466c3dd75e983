//! Input and impulsive-noise generators.
//!
//! The noise is alpha-stable with characteristic function
//!
//! ```text
//! φ(t) = exp{ jδt − γ|t|^α [1 + jβ·sgn(t)·S(t, α)] }
//! S(t, α) = tan(απ/2)        α ≠ 1
//!         = (2/π)·log|t|     α = 1
//! ```
//!
//! Draws use the Chambers–Mallows–Stuck transform of a uniform angle and a unit
//! exponential. The transform is written for the Samorodnitsky–Taqqu form
//! `exp{−σ^α|t|^α [1 − jβ' sgn(t) tan(απ/2)] + jμt}`, so the scale is
//! `σ = γ^(1/α)` and, for `α ≠ 1`, the skewness is `β' = −β`. At `α = 1` both
//! forms agree and `β' = β`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The tuple `V = (α, β, γ, δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StableNoiseParams {
    /// Characteristic exponent in (0, 2]; smaller is heavier-tailed.
    pub alpha: f64,
    /// Symmetry in [−1, 1].
    pub beta: f64,
    /// Dispersion, > 0.
    pub gamma: f64,
    /// Location.
    #[serde(rename = "delta")]
    pub delta_loc: f64,
}

impl StableNoiseParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta_loc: f64) -> Result<Self> {
        let p = Self { alpha, beta, gamma, delta_loc };
        p.validate()?;
        Ok(p)
    }

    /// Symmetric noise with unit dispersion centered at zero.
    pub fn symmetric(alpha: f64) -> Self {
        Self { alpha, beta: 0.0, gamma: 1.0, delta_loc: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 2], got {}", self.alpha)));
        }
        if !(-1.0..=1.0).contains(&self.beta) {
            return Err(Error::param("beta", format!("must lie in [-1, 1], got {}", self.beta)));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::param("gamma", format!("must be a finite value > 0, got {}", self.gamma)));
        }
        if !self.delta_loc.is_finite() {
            return Err(Error::param("delta", "location must be finite"));
        }
        Ok(())
    }

    pub fn distribution(&self) -> Result<AlphaStable> {
        self.validate()?;
        Ok(AlphaStable::from_valid(*self))
    }
}

/// Sampler for a validated [`StableNoiseParams`].
#[derive(Debug, Clone, Copy)]
pub struct AlphaStable {
    params: StableNoiseParams,
    kind: Branch,
}

#[derive(Debug, Clone, Copy)]
enum Branch {
    Gaussian { std_dev: f64 },
    Unit { beta: f64, scale: f64, shift: f64 },
    General { alpha: f64, b: f64, s: f64, scale: f64 },
}

impl AlphaStable {
    fn from_valid(params: StableNoiseParams) -> Self {
        let StableNoiseParams { alpha, beta, gamma, .. } = params;
        let kind = if alpha == 2.0 {
            // exp(−γt²) is the CF of N(0, 2γ)
            Branch::Gaussian { std_dev: (2.0 * gamma).sqrt() }
        } else if alpha == 1.0 {
            Branch::Unit { beta, scale: gamma, shift: 2.0 / PI * beta * gamma * gamma.ln() }
        } else {
            let beta_st = -beta;
            let zeta = beta_st * (PI * alpha / 2.0).tan();
            Branch::General {
                alpha,
                b: zeta.atan() / alpha,
                s: (1.0 + zeta * zeta).powf(1.0 / (2.0 * alpha)),
                scale: gamma.powf(1.0 / alpha),
            }
        };
        Self { params, kind }
    }

    pub fn params(&self) -> &StableNoiseParams {
        &self.params
    }
}

impl Distribution<f64> for AlphaStable {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let loc = self.params.delta_loc;
        match self.kind {
            Branch::Gaussian { std_dev } => {
                let z: f64 = rng.sample(StandardNormal);
                loc + std_dev * z
            }
            Branch::Unit { beta, scale, shift } => {
                let v = PI * (rng.random::<f64>() - 0.5);
                let w: f64 = rng.sample(Exp1);
                let a = FRAC_PI_2 + beta * v;
                let x = 2.0 / PI * (a * v.tan() - beta * (FRAC_PI_2 * w * v.cos() / a).ln());
                loc + scale * x + shift
            }
            Branch::General { alpha, b, s, scale } => {
                let v = PI * (rng.random::<f64>() - 0.5);
                let w: f64 = rng.sample(Exp1);
                let phi = alpha * (v + b);
                let x = s * phi.sin() / v.cos().powf(1.0 / alpha) * ((v - phi).cos() / w).powf((1.0 - alpha) / alpha);
                loc + scale * x
            }
        }
    }
}

/// One draw from the stable law with parameters `params`.
pub fn stable_sample<R: Rng + ?Sized>(params: &StableNoiseParams, rng: &mut R) -> Result<f64> {
    Ok(params.distribution()?.sample(rng))
}

/// Characteristic function `φ(t)` of the stable law, evaluated directly.
pub fn theoretical_cf(params: &StableNoiseParams, t: f64) -> Complex64 {
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let StableNoiseParams { alpha, beta, gamma, delta_loc } = *params;
    let skew = if alpha == 1.0 { 2.0 / PI * t.abs().ln() } else { (alpha * PI / 2.0).tan() };
    let bracket = Complex64::new(1.0, beta * t.signum() * skew);
    (Complex64::new(0.0, delta_loc * t) - gamma * t.abs().powf(alpha) * bracket).exp()
}

/// `count` i.i.d. standard normal samples.
pub fn gaussian_regressors<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<f64> {
    rng.sample_iter(StandardNormal).take(count).collect()
}

/// A reproducible random stream keyed by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the seed as key and the stream id as the 64-bit
/// stream selector, so streams are independent and replay exactly no matter
/// which thread owns them. [`RngStream::lane`] derives sub-streams for the
/// separate signals of one run; stream ids must stay below 2⁶⁰.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

const LANE_BITS: u32 = 4;

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self::with_selector(seed, stream_id, stream_id << LANE_BITS)
    }

    fn with_selector(seed: u64, stream_id: u64, selector: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(selector);
        Self { seed, stream_id, rng }
    }

    /// Independent sub-stream `lane` (1..16) of this stream.
    pub fn lane(&self, lane: u64) -> Self {
        assert!(lane > 0 && lane < 1 << LANE_BITS, "lane {lane} out of range");
        Self::with_selector(self.seed, self.stream_id, (self.stream_id << LANE_BITS) | lane)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
