//! Closed-form quantities of the univariate and bivariate normal model.
//!
//! Everything here is a pure function. Density powers are evaluated as
//! `exp(beta * log f)` so that far outliers underflow to zero instead of
//! producing NaNs, and `beta == 0` dispatches to the log-likelihood limit of
//! the objective rather than evaluating `(1 + 1/beta)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Margin kept between an admissible correlation and +/-1.
pub const RHO_GUARD: f64 = 1e-6;

/// Largest admissible |rho| for objective evaluations.
pub const RHO_MAX: f64 = 1.0 - RHO_GUARD;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Robustness tuning parameter, restricted to `[0, 1]`. Zero is the
/// maximum-likelihood limit.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TuningBeta(f64);

impl TuningBeta {
    pub const MLE: TuningBeta = TuningBeta(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(TuningBeta(value))
        } else {
            Err(Error::BetaOutOfRange(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn is_mle(self) -> bool {
        self.0 == 0.0
    }
}

impl TryFrom<f64> for TuningBeta {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        TuningBeta::new(value)
    }
}

impl From<TuningBeta> for f64 {
    fn from(b: TuningBeta) -> f64 {
        b.0
    }
}

/// Mean and variance of one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalParams {
    pub mu: f64,
    pub sigma2: f64,
}

impl MarginalParams {
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        let p = MarginalParams { mu, sigma2 };
        p.validate()?;
        Ok(p)
    }

    pub fn standard() -> Self {
        MarginalParams { mu: 0.0, sigma2: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::Invalid(format!("non-finite mean {}", self.mu)));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::NonPositiveVariance(self.sigma2));
        }
        Ok(())
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// Two marginals plus their correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairParams {
    pub a: MarginalParams,
    pub b: MarginalParams,
    pub rho: f64,
}

impl PairParams {
    pub fn new(a: MarginalParams, b: MarginalParams, rho: f64) -> Result<Self> {
        let p = PairParams { a, b, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.a.validate()?;
        self.b.validate()?;
        if !(self.rho.is_finite() && self.rho.abs() < 1.0) {
            return Err(Error::SingularCorrelation(self.rho));
        }
        Ok(())
    }

    fn validate_guarded(&self) -> Result<()> {
        self.validate()?;
        if self.rho.abs() > RHO_MAX + f64::EPSILON {
            return Err(Error::SingularCorrelation(self.rho));
        }
        Ok(())
    }
}

/// `log f(x)` for the univariate normal.
#[inline]
pub fn log_density(x: f64, p: &MarginalParams) -> f64 {
    let r = x - p.mu;
    -0.5 * (LN_2PI + p.sigma2.ln()) - 0.5 * r * r / p.sigma2
}

/// `log f(x1, x2)` for the bivariate normal.
#[inline]
pub fn bivariate_log_density(x1: f64, x2: f64, p: &PairParams) -> f64 {
    let a = (x1 - p.a.mu) / p.a.sigma();
    let c = (x2 - p.b.mu) / p.b.sigma();
    let one_m = 1.0 - p.rho * p.rho;
    let q = ((a * a + c * c) - 2.0 * p.rho * (a * c)) / one_m;
    -LN_2PI - 0.5 * (p.a.sigma2 * p.b.sigma2 * one_m).ln() - 0.5 * q
}

/// `∫ f^(1+β)` of the univariate normal: `(2πσ²)^(-β/2) (1+β)^(-1/2)`.
pub fn univariate_power_integral(p: &MarginalParams, beta: TuningBeta) -> Result<f64> {
    p.validate()?;
    Ok(univariate_power_integral_unchecked(p.sigma2, beta.value()))
}

#[inline]
pub(crate) fn univariate_power_integral_unchecked(sigma2: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    (-0.5 * beta * (LN_2PI + sigma2.ln())).exp() / (1.0 + beta).sqrt()
}

/// `∫∫ f^(1+β)` of the bivariate normal:
/// `(2π)^(-β) (σ₁²σ₂²(1-ρ²))^(-β/2) (1+β)^(-1)`.
pub fn bivariate_power_integral(p: &PairParams, beta: TuningBeta) -> Result<f64> {
    p.validate()?;
    let log_det = (p.a.sigma2 * p.b.sigma2 * (1.0 - p.rho * p.rho)).ln();
    Ok(bivariate_power_integral_unchecked(log_det, beta.value()))
}

#[inline]
fn bivariate_power_integral_unchecked(log_det: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    (-beta * LN_2PI - 0.5 * beta * log_det).exp() / (1.0 + beta)
}

fn check_sample(x: &[f64], needed: usize) -> Result<()> {
    if x.len() < needed {
        return Err(Error::SampleTooSmall { needed, got: x.len() });
    }
    Ok(())
}

/// Marginal DPD objective
/// `∫f^(1+β) − (1 + 1/β) (1/n) Σ f^β(xᵢ)`, or the mean negative
/// log-likelihood when `β = 0`.
pub fn marginal_objective(x: &[f64], p: &MarginalParams, beta: TuningBeta) -> Result<f64> {
    check_sample(x, 2)?;
    p.validate()?;
    Ok(marginal_objective_unchecked(x, p, beta.value()))
}

pub(crate) fn marginal_objective_unchecked(x: &[f64], p: &MarginalParams, beta: f64) -> f64 {
    let n = x.len() as f64;
    if beta == 0.0 {
        return -x.iter().map(|&xi| log_density(xi, p)).sum::<f64>() / n;
    }
    let mean_pow = x.iter().map(|&xi| (beta * log_density(xi, p)).exp()).sum::<f64>() / n;
    univariate_power_integral_unchecked(p.sigma2, beta) - (1.0 + 1.0 / beta) * mean_pow
}

/// Gradient of [`marginal_objective`] with respect to `(μ, σ²)`.
pub fn marginal_objective_gradient(
    x: &[f64],
    p: &MarginalParams,
    beta: TuningBeta,
) -> Result<[f64; 2]> {
    check_sample(x, 2)?;
    p.validate()?;
    let beta = beta.value();
    let n = x.len() as f64;
    let s2 = p.sigma2;
    let (mut g_mu, mut g_s2) = (0.0, 0.0);
    for &xi in x {
        let r = xi - p.mu;
        let u_mu = r / s2;
        let u_s2 = (r * r / s2 - 1.0) / (2.0 * s2);
        let w = if beta == 0.0 { 1.0 } else { (beta * log_density(xi, p)).exp() };
        g_mu += w * u_mu;
        g_s2 += w * u_s2;
    }
    if beta == 0.0 {
        return Ok([-g_mu / n, -g_s2 / n]);
    }
    let integral = univariate_power_integral_unchecked(s2, beta);
    Ok([
        -(1.0 + beta) * g_mu / n,
        -beta * integral / (2.0 * s2) - (1.0 + beta) * g_s2 / n,
    ])
}

/// Two columns standardized by fixed marginals. Evaluating the pairwise
/// objective as a function of `ρ` alone only touches these residuals.
#[derive(Debug, Clone)]
pub struct StandardizedPair {
    a: Vec<f64>,
    c: Vec<f64>,
    log_var_product: f64,
}

impl StandardizedPair {
    pub fn new(xj: &[f64], xk: &[f64], mj: &MarginalParams, mk: &MarginalParams) -> Result<Self> {
        if xj.len() != xk.len() {
            return Err(Error::LengthMismatch { left: xj.len(), right: xk.len() });
        }
        check_sample(xj, 2)?;
        mj.validate()?;
        mk.validate()?;
        let (sj, sk) = (mj.sigma(), mk.sigma());
        Ok(StandardizedPair {
            a: xj.iter().map(|&x| (x - mj.mu) / sj).collect(),
            c: xk.iter().map(|&x| (x - mk.mu) / sk).collect(),
            log_var_product: (mj.sigma2 * mk.sigma2).ln(),
        })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Pairwise objective at correlation `rho`; caller guarantees `|rho| < 1`.
    pub fn objective(&self, rho: f64, beta: f64) -> f64 {
        let n = self.a.len() as f64;
        let one_m = 1.0 - rho * rho;
        let log_det = self.log_var_product + one_m.ln();
        let log_norm = -LN_2PI - 0.5 * log_det;
        if beta == 0.0 {
            let q_sum: f64 = self
                .a
                .iter()
                .zip(&self.c)
                .map(|(&a, &c)| (a * a + c * c) - 2.0 * rho * (a * c))
                .sum();
            return -log_norm + 0.5 * q_sum / (one_m * n);
        }
        let mean_pow = self
            .a
            .iter()
            .zip(&self.c)
            .map(|(&a, &c)| {
                let q = ((a * a + c * c) - 2.0 * rho * (a * c)) / one_m;
                (beta * (log_norm - 0.5 * q)).exp()
            })
            .sum::<f64>()
            / n;
        bivariate_power_integral_unchecked(log_det, beta) - (1.0 + 1.0 / beta) * mean_pow
    }
}

/// Pairwise (bivariate) DPD objective, or the mean bivariate negative
/// log-likelihood when `β = 0`. Requires `|ρ| ≤ 1 − RHO_GUARD`.
pub fn pairwise_objective(xj: &[f64], xk: &[f64], p: &PairParams, beta: TuningBeta) -> Result<f64> {
    p.validate_guarded()?;
    let sp = StandardizedPair::new(xj, xk, &p.a, &p.b)?;
    Ok(sp.objective(p.rho, beta.value()))
}

/// Gradient of [`pairwise_objective`] with respect to
/// `(μ₁, σ₁², μ₂, σ₂², ρ)`.
pub fn pairwise_objective_gradient(
    xj: &[f64],
    xk: &[f64],
    p: &PairParams,
    beta: TuningBeta,
) -> Result<[f64; 5]> {
    p.validate_guarded()?;
    if xj.len() != xk.len() {
        return Err(Error::LengthMismatch { left: xj.len(), right: xk.len() });
    }
    check_sample(xj, 2)?;
    let beta = beta.value();
    let n = xj.len() as f64;
    let (s1, s2) = (p.a.sigma(), p.b.sigma());
    let (v1, v2) = (p.a.sigma2, p.b.sigma2);
    let rho = p.rho;
    let one_m = 1.0 - rho * rho;

    let mut acc = [0.0; 5];
    for (&x1, &x2) in xj.iter().zip(xk) {
        let a = (x1 - p.a.mu) / s1;
        let c = (x2 - p.b.mu) / s2;
        let score = [
            (a - rho * c) / (one_m * s1),
            -0.5 / v1 + (a * a - rho * a * c) / (2.0 * v1 * one_m),
            (c - rho * a) / (one_m * s2),
            -0.5 / v2 + (c * c - rho * a * c) / (2.0 * v2 * one_m),
            rho / one_m - (rho * (a * a + c * c) - (1.0 + rho * rho) * a * c) / (one_m * one_m),
        ];
        let w = if beta == 0.0 { 1.0 } else { (beta * bivariate_log_density(x1, x2, p)).exp() };
        for (g, s) in acc.iter_mut().zip(score) {
            *g += w * s;
        }
    }
    if beta == 0.0 {
        return Ok(acc.map(|g| -g / n));
    }
    let integral = bivariate_power_integral_unchecked((v1 * v2 * one_m).ln(), beta);
    // derivative of the power integral in each parameter
    let d_int = [
        0.0,
        -beta * integral / (2.0 * v1),
        0.0,
        -beta * integral / (2.0 * v2),
        beta * rho * integral / one_m,
    ];
    let mut grad = [0.0; 5];
    for i in 0..5 {
        grad[i] = d_int[i] - (1.0 + beta) * acc[i] / n;
    }
    Ok(grad)
}
