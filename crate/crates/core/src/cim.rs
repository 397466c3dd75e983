//! Correntropy-induced metric (CIM) as a smooth surrogate of the ℓ₀ pseudo-norm.
//!
//! With a Gaussian kernel of width `σ` and `κ(0) = 1/(σ√(2π))`,
//!
//! ```text
//! CIM²(x, 0) = κ(0)/N · Σᵢ (1 − exp(−xᵢ² / 2σ²))
//! ∂CIM²/∂xᵢ  = κ(0)/(N σ²) · xᵢ · exp(−xᵢ² / 2σ²)
//! ```
//!
//! Every entry with `|xᵢ| ≫ σ` contributes `κ(0)/N` and every zero entry
//! contributes nothing, so `N · CIM² / κ(0)` counts the nonzeros as `σ → 0`.
//! The gradient is an odd attractor that pulls small entries toward zero and
//! leaves large ones alone. The sparse filters subtract `ρ` times this gradient
//! from each weight update, with `N` equal to the filter length.

use std::f64::consts::PI;

use crate::error::{check_len, Error, Result};

/// Gaussian kernel width and vector length for the CIM penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CimKernel {
    sigma: f64,
    n: usize,
}

impl CimKernel {
    pub fn new(sigma: f64, n: usize) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param("sigma", format!("kernel width must be > 0, got {sigma}")));
        }
        if n == 0 {
            return Err(Error::param("n", "vector length must be >= 1"));
        }
        Ok(Self { sigma, n })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// `κ(0) = 1/(σ√(2π))`, the peak of the Gaussian kernel.
    pub fn kappa0(&self) -> f64 {
        1.0 / (self.sigma * (2.0 * PI).sqrt())
    }

    /// Gradient of `CIM²` with respect to a single entry.
    #[inline]
    pub fn gradient_component(&self, xi: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        self.kappa0() / (self.n as f64 * s2) * xi * (-xi * xi / (2.0 * s2)).exp()
    }
}

/// `CIM²(x, 0)`. The result lies in `[0, κ(0)]`.
pub fn cim_squared(x: &[f64], kernel: &CimKernel) -> Result<f64> {
    check_len(kernel.n, x.len())?;
    let two_s2 = 2.0 * kernel.sigma * kernel.sigma;
    let sum: f64 = x.iter().map(|&xi| -(-xi * xi / two_s2).exp_m1()).sum();
    Ok(kernel.kappa0() / kernel.n as f64 * sum)
}

pub fn cim_gradient(x: &[f64], kernel: &CimKernel) -> Result<Vec<f64>> {
    check_len(kernel.n, x.len())?;
    Ok(x.iter().map(|&xi| kernel.gradient_component(xi)).collect())
}
