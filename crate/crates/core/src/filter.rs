//! The least-mean-p-power filter family.
//!
//! All six algorithms share one update skeleton:
//!
//! ```text
//! e(n)   = d(n) − w(n)ᵀ x(n)
//! g(n)   = |e(n)|^(p−1) · sgn(e(n))
//! w(n+1) = w(n) + μ · g(n) · x(n) / D(n) − ρ · ∇CIM²(w(n))
//! ```
//!
//! | algorithm | `D(n)`                  | penalty |
//! |-----------|-------------------------|---------|
//! | LMP       | 1                       | no      |
//! | CIMLMP    | 1                       | yes     |
//! | NLMP      | ‖x(n)‖ₚᵖ + ε            | no      |
//! | CIMNLMP   | ‖x(n)‖ₚᵖ + ε            | yes     |
//! | VRNLMP    | ‖x(n)‖ₚᵖ + 1/θ(n)       | no      |
//! | CIMVRNLMP | ‖x(n)‖ₚᵖ + 1/θ(n)       | yes     |
//!
//! `‖x‖ₚᵖ = Σ|xᵢ|ᵖ`, so `p = 2` gives the NLMS denominator `xᵀx`. The
//! variable-regularization variants track the error power
//! `θ(n) = (1 − Δ)·θ(n−1) + Δ·|e(n)|ᵖ` before the weight update of step `n`.
//! The penalty gradient uses the filter length as `N`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cim::CimKernel;
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "LMP")]
    Lmp,
    #[serde(rename = "CIMLMP")]
    CimLmp,
    #[serde(rename = "NLMP")]
    Nlmp,
    #[serde(rename = "CIMNLMP")]
    CimNlmp,
    #[serde(rename = "VRNLMP")]
    VrNlmp,
    #[serde(rename = "CIMVRNLMP")]
    CimVrNlmp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Lmp,
        Algorithm::CimLmp,
        Algorithm::Nlmp,
        Algorithm::CimNlmp,
        Algorithm::VrNlmp,
        Algorithm::CimVrNlmp,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Lmp => "LMP",
            Algorithm::CimLmp => "CIMLMP",
            Algorithm::Nlmp => "NLMP",
            Algorithm::CimNlmp => "CIMNLMP",
            Algorithm::VrNlmp => "VRNLMP",
            Algorithm::CimVrNlmp => "CIMVRNLMP",
        }
    }

    pub fn has_penalty(self) -> bool {
        matches!(self, Algorithm::CimLmp | Algorithm::CimNlmp | Algorithm::CimVrNlmp)
    }

    pub fn uses_fixed_regularizer(self) -> bool {
        matches!(self, Algorithm::Nlmp | Algorithm::CimNlmp)
    }

    pub fn uses_variable_regularizer(self) -> bool {
        matches!(self, Algorithm::VrNlmp | Algorithm::CimVrNlmp)
    }

    pub fn is_normalized(self) -> bool {
        self.uses_fixed_regularizer() || self.uses_variable_regularizer()
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.label().eq_ignore_ascii_case(s)).ok_or_else(|| {
            let known: Vec<_> = Algorithm::ALL.iter().map(|a| a.label()).collect();
            Error::Config(format!("unknown algorithm `{s}` (expected one of {})", known.join(", ")))
        })
    }
}

/// Hyperparameters of one filter. Fields an algorithm does not use are
/// ignored by [`step`] but still validated when set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub algorithm: Algorithm,
    /// Error power exponent.
    pub p: f64,
    /// Step size μ.
    pub mu: f64,
    /// Penalty weight ρ.
    pub rho: f64,
    /// Fixed regularizer ε (NLMP, CIMNLMP).
    pub eps: Option<f64>,
    /// Error-power smoothing constant Δ (VR variants).
    pub delta: Option<f64>,
    /// Initial error power θ(0) (VR variants).
    pub theta0: Option<f64>,
    /// CIM kernel width σ (CIM variants).
    pub sigma: Option<f64>,
    /// Filter length L.
    pub length: usize,
}

impl FilterParams {
    /// Reference settings for each algorithm with `p = 1.2`.
    ///
    /// LMP carries `ρ = 1e-4` as listed alongside the other settings; it has
    /// no penalty term, so the value is inert.
    pub fn reference(algorithm: Algorithm, length: usize) -> Self {
        let base = FilterParams {
            algorithm,
            p: 1.2,
            mu: 0.0,
            rho: 0.0,
            eps: None,
            delta: None,
            theta0: None,
            sigma: None,
            length,
        };
        match algorithm {
            Algorithm::Lmp => FilterParams { mu: 7e-3, rho: 1e-4, ..base },
            Algorithm::CimLmp => FilterParams { mu: 7e-3, rho: 1e-3, sigma: Some(1e-2), ..base },
            Algorithm::Nlmp => FilterParams { mu: 8e-2, eps: Some(1e-3), ..base },
            Algorithm::CimNlmp => FilterParams { mu: 9e-2, rho: 1e-3, eps: Some(1e-3), sigma: Some(8e-2), ..base },
            Algorithm::VrNlmp => FilterParams { mu: 8e-2, delta: Some(0.99), theta0: Some(1e-5), ..base },
            Algorithm::CimVrNlmp => {
                FilterParams { mu: 9e-2, rho: 1e-3, delta: Some(0.99), theta0: Some(1e-5), sigma: Some(8e-2), ..base }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be a finite value > 0, got {v}")))
            }
        }
        fn required(name: &'static str, v: Option<f64>, algorithm: Algorithm) -> Result<f64> {
            v.ok_or_else(|| Error::param(name, format!("required by {algorithm}")))
        }

        if !(self.p.is_finite() && self.p > 0.0) {
            return Err(Error::param("p", format!("must be a finite value > 0, got {}", self.p)));
        }
        positive("mu", self.mu)?;
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(Error::param("rho", format!("must be a finite value >= 0, got {}", self.rho)));
        }
        if self.length == 0 {
            return Err(Error::param("length", "must be >= 1"));
        }
        if let Some(eps) = self.eps {
            positive("eps", eps)?;
        }
        if let Some(delta) = self.delta {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
            }
        }
        if let Some(theta0) = self.theta0 {
            positive("theta0", theta0)?;
        }
        if let Some(sigma) = self.sigma {
            positive("sigma", sigma)?;
        }

        let a = self.algorithm;
        if a.uses_fixed_regularizer() {
            required("eps", self.eps, a)?;
        }
        if a.uses_variable_regularizer() {
            required("delta", self.delta, a)?;
            required("theta0", self.theta0, a)?;
        }
        if a.has_penalty() {
            required("sigma", self.sigma, a)?;
        }
        Ok(())
    }

    /// Settings that are legal but likely unintended.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.p <= 1.0 {
            out.push(format!(
                "{}: p = {} <= 1; the p-power update is not stabilized against impulsive noise",
                self.algorithm, self.p
            ));
        }
        if self.p > 2.0 {
            out.push(format!("{}: p = {} is outside the usual range (0, 2]", self.algorithm, self.p));
        }
        if !self.algorithm.has_penalty() && self.rho != 0.0 {
            out.push(format!("{}: rho = {} is ignored (no penalty term)", self.algorithm, self.rho));
        }
        out
    }

    fn kernel(&self) -> Option<CimKernel> {
        if self.algorithm.has_penalty() && self.rho != 0.0 {
            self.sigma.and_then(|s| CimKernel::new(s, self.length).ok())
        } else {
            None
        }
    }
}

/// Evolving filter state: `w(n)`, `θ(n)` for VR variants, and `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub w: Vec<f64>,
    pub theta: Option<f64>,
    pub iteration: u64,
}

/// One regressor/desired pair.
#[derive(Debug, Clone, Copy)]
pub struct SampleUpdate<'a> {
    pub x: &'a [f64],
    pub d: f64,
}

/// Zero weights, `θ = θ(0)` for VR variants, `n = 0`.
pub fn reset(params: &FilterParams) -> Result<FilterState> {
    params.validate()?;
    Ok(FilterState {
        w: vec![0.0; params.length],
        theta: if params.algorithm.uses_variable_regularizer() { params.theta0 } else { None },
        iteration: 0,
    })
}

pub fn predict(state: &FilterState, x: &[f64]) -> Result<f64> {
    check_len(state.w.len(), x.len())?;
    Ok(dot(&state.w, x))
}

/// `|e|^(p−1)·sgn(e)`, with the value at `e = 0` defined as 0 for every `p`.
#[inline]
pub fn error_power_term(e: f64, p: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else {
        e.abs().powf(p - 1.0) * e.signum()
    }
}

/// `Σ|xᵢ|ᵖ`.
#[inline]
pub fn p_norm_pow(x: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        x.iter().map(|v| v * v).sum()
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum()
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Advance the filter by one sample and return the a-priori error `e(n)`.
///
/// On divergence the state is left at `w(n)` and an error naming the
/// iteration is returned.
pub fn step(state: &mut FilterState, params: &FilterParams, sample: SampleUpdate<'_>) -> Result<f64> {
    params.validate()?;
    check_len(params.length, state.w.len())?;
    check_len(params.length, sample.x.len())?;
    let n = state.iteration;

    let e = sample.d - dot(&state.w, sample.x);
    if !e.is_finite() {
        return Err(Error::Diverged { iteration: n, what: "error" });
    }
    let g = error_power_term(e, params.p);

    let mut theta = state.theta;
    let gain = match params.algorithm {
        Algorithm::Lmp | Algorithm::CimLmp => params.mu * g,
        Algorithm::Nlmp | Algorithm::CimNlmp => {
            // validated above
            let eps = params.eps.unwrap_or_default();
            params.mu * g / (p_norm_pow(sample.x, params.p) + eps)
        }
        Algorithm::VrNlmp | Algorithm::CimVrNlmp => {
            let delta = params.delta.unwrap_or_default();
            let prev = state
                .theta
                .or(params.theta0)
                .ok_or_else(|| Error::param("theta", "variable-regularization state missing"))?;
            let next = (1.0 - delta) * prev + delta * e.abs().powf(params.p);
            if !(next.is_finite() && next > 0.0) {
                return Err(Error::Diverged { iteration: n, what: "error power" });
            }
            theta = Some(next);
            params.mu * g / (p_norm_pow(sample.x, params.p) + 1.0 / next)
        }
    };

    let kernel = params.kernel();
    let updated = |wi: f64, xi: f64| match &kernel {
        Some(k) => wi + gain * xi - params.rho * k.gradient_component(wi),
        None => wi + gain * xi,
    };
    if !state.w.iter().zip(sample.x).all(|(&wi, &xi)| updated(wi, xi).is_finite()) {
        return Err(Error::Diverged { iteration: n, what: "weights" });
    }
    for (wi, &xi) in state.w.iter_mut().zip(sample.x) {
        *wi = updated(*wi, xi);
    }
    state.theta = theta;
    state.iteration += 1;
    Ok(e)
}

/// A filter bundled with its parameters.
#[derive(Debug, Clone)]
pub struct AdaptiveFilter {
    params: FilterParams,
    state: FilterState,
}

impl AdaptiveFilter {
    pub fn new(params: FilterParams) -> Result<Self> {
        let state = reset(&params)?;
        Ok(Self { params, state })
    }

    pub fn params(&self) -> &FilterParams {
        &self.params
    }

    pub fn state(&self) -> &FilterState {
        &self.state
    }

    pub fn weights(&self) -> &[f64] {
        &self.state.w
    }

    /// The regularizer in effect for the most recent step: `ε`, `1/θ(n)`, or
    /// `None` for the unnormalized variants.
    pub fn regularizer(&self) -> Option<f64> {
        match self.params.algorithm {
            a if a.uses_fixed_regularizer() => self.params.eps,
            a if a.uses_variable_regularizer() => self.state.theta.map(|t| 1.0 / t),
            _ => None,
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        predict(&self.state, x)
    }

    pub fn step(&mut self, x: &[f64], d: f64) -> Result<f64> {
        step(&mut self.state, &self.params, SampleUpdate { x, d })
    }

    pub fn reset(&mut self) {
        self.state = reset(&self.params).expect("params validated at construction");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn params(algorithm: Algorithm, length: usize) -> FilterParams {
        FilterParams::reference(algorithm, length)
    }

    #[test]
    fn predict_zero_and_selector() {
        let mut state = reset(&params(Algorithm::Nlmp, 5)).unwrap();
        let x = [0.3, -1.0, 2.5, 4.0, -0.7];
        assert_eq!(predict(&state, &x).unwrap(), 0.0);
        state.w[2] = 1.0;
        assert_eq!(predict(&state, &x).unwrap(), 2.5);
        assert!(predict(&state, &x[..4]).is_err());
    }

    #[test]
    fn predict_matches_compensated_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut state = reset(&params(Algorithm::Lmp, 8)).unwrap();
        for _ in 0..50 {
            state.w = (0..8).map(|_| rng.sample(StandardNormal)).collect();
            let x: Vec<f64> = (0..8).map(|_| rng.sample(StandardNormal)).collect();
            // Neumaier sum over exact products (two-product via fma)
            let (mut s, mut c) = (0.0f64, 0.0f64);
            for (a, b) in state.w.iter().zip(&x) {
                let prod = a * b;
                let err = a.mul_add(*b, -prod);
                for term in [prod, err] {
                    let t = s + term;
                    c += if s.abs() >= term.abs() { (s - t) + term } else { (term - t) + s };
                    s = t;
                }
            }
            assert!((predict(&state, &x).unwrap() - (s + c)).abs() < 1e-12);
        }
    }

    #[test]
    fn error_power_term_values() {
        for p in [0.5, 1.0, 1.2, 2.0] {
            assert_eq!(error_power_term(0.0, p), 0.0);
        }
        assert_eq!(error_power_term(-2.0, 2.0), -2.0);
        assert_relative_eq!(error_power_term(0.5, 1.2), 0.870_550_563_296_124_1, max_relative = 1e-15);
        assert_eq!(error_power_term(-3.0, 1.0), -1.0);
    }

    #[test]
    fn zero_error_without_penalty_keeps_weights() {
        let x = [1.0, -2.0, 0.5];
        for a in Algorithm::ALL {
            let mut p = params(a, 3);
            p.rho = 0.0;
            let mut state = reset(&p).unwrap();
            state.w = vec![0.2, 0.1, -0.4];
            let d = predict(&state, &x).unwrap();
            let before = state.w.clone();
            let e = step(&mut state, &p, SampleUpdate { x: &x, d }).unwrap();
            assert_eq!(e, 0.0);
            assert_eq!(state.w, before, "{a}");
            assert_eq!(state.iteration, 1);
        }
    }

    #[test]
    fn variable_regularizer_first_step() {
        // θ(1) = 0.01·1e-5 + 0.99·|1|^1.2 = 0.9900001
        let p = params(Algorithm::VrNlmp, 2);
        let mut f = AdaptiveFilter::new(p).unwrap();
        assert_eq!(f.state().theta, Some(1e-5));
        f.step(&[0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(f.state().theta.unwrap(), 0.990_000_1, max_relative = 1e-15);
        assert_relative_eq!(f.regularizer().unwrap(), 1.010_100_908_070_615_3, max_relative = 1e-14);
    }

    #[test]
    fn single_cimnlmp_step() {
        // frozen from a 40-digit evaluation of the NLMP gain and CIM gradient
        let p = FilterParams {
            algorithm: Algorithm::CimNlmp,
            p: 1.2,
            mu: 0.1,
            rho: 1e-3,
            eps: Some(1e-3),
            delta: None,
            theta0: None,
            sigma: Some(0.08),
            length: 2,
        };
        let mut state = reset(&p).unwrap();
        state.w = vec![0.5, 0.0];
        let e = step(&mut state, &p, SampleUpdate { x: &[1.0, 1.0], d: 1.0 }).unwrap();
        assert_eq!(e, 0.5);
        assert_relative_eq!(state.w[0], 0.543_505_774_635_565_2, max_relative = 1e-14);
        assert_relative_eq!(state.w[1], 0.043_505_775_277_167_623, max_relative = 1e-14);
    }

    #[test]
    fn reset_cold_start() {
        for a in Algorithm::ALL {
            let s = reset(&params(a, 30)).unwrap();
            assert_eq!(s.w, vec![0.0; 30]);
            assert_eq!(s.iteration, 0);
            assert_eq!(s.theta.is_some(), a.uses_variable_regularizer());
        }
        let mut f = AdaptiveFilter::new(params(Algorithm::CimNlmp, 4)).unwrap();
        let e = f.step(&[1.0, 2.0, 3.0, 4.0], 0.0).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(f.weights(), &[0.0; 4]);
    }

    #[test]
    fn parameter_validation() {
        let ok = params(Algorithm::CimVrNlmp, 4);
        ok.validate().unwrap();
        let cases: Vec<(&str, FilterParams)> = vec![
            ("p", FilterParams { p: 0.0, ..ok.clone() }),
            ("p", FilterParams { p: f64::INFINITY, ..ok.clone() }),
            ("mu", FilterParams { mu: 0.0, ..ok.clone() }),
            ("rho", FilterParams { rho: -1e-3, ..ok.clone() }),
            ("delta", FilterParams { delta: Some(1.0), ..ok.clone() }),
            ("delta", FilterParams { delta: None, ..ok.clone() }),
            ("theta0", FilterParams { theta0: Some(0.0), ..ok.clone() }),
            ("sigma", FilterParams { sigma: None, ..ok.clone() }),
            ("eps", FilterParams { eps: Some(-1.0), ..ok.clone() }),
            ("length", FilterParams { length: 0, ..ok.clone() }),
        ];
        for (name, p) in cases {
            match p.validate() {
                Err(Error::Parameter { name: got, .. }) => assert_eq!(got, name),
                other => panic!("{name}: {other:?}"),
            }
        }
        let nlmp = FilterParams { eps: None, ..params(Algorithm::Nlmp, 4) };
        assert!(nlmp.validate().is_err());
    }

    #[test]
    fn warnings_for_low_p_and_inert_rho() {
        let lmp = params(Algorithm::Lmp, 4);
        assert_eq!(lmp.warnings().len(), 1);
        let low = FilterParams { p: 0.8, ..params(Algorithm::Nlmp, 4) };
        assert!(low.warnings()[0].contains("p = 0.8"));
        assert!(params(Algorithm::CimVrNlmp, 4).warnings().is_empty());
        let high = FilterParams { p: 2.5, ..params(Algorithm::CimVrNlmp, 4) };
        high.validate().unwrap();
        assert_eq!(high.warnings().len(), 1);
    }

    #[test]
    fn divergence_is_reported_with_iteration() {
        let p = FilterParams { mu: 1e300, ..params(Algorithm::Lmp, 2) };
        let mut state = reset(&p).unwrap();
        step(&mut state, &p, SampleUpdate { x: &[1.0, 1.0], d: 0.0 }).unwrap();
        let err = step(&mut state, &p, SampleUpdate { x: &[1e10, 1e10], d: 1e300 }).unwrap_err();
        assert!(matches!(err, Error::Diverged { iteration: 1, .. }), "{err}");
        assert_eq!(state.iteration, 1);
        assert!(state.w.iter().all(|w| w.is_finite()));
    }

    #[test]
    fn algorithm_labels_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.label().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("cimvrnlmp".parse::<Algorithm>().unwrap(), Algorithm::CimVrNlmp);
        assert!("RLS".parse::<Algorithm>().is_err());
    }
}
