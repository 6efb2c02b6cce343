//! Step 1: per-component location/variance by minimizing the marginal DPD
//! objective with an iteratively reweighted fixed-point scheme.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{marginal_objective_unchecked, MarginalParams, TuningBeta};

/// Consistency constant making the MAD unbiased for the normal SD.
pub const MAD_SCALE: f64 = 1.4826;

const MAX_HALVINGS: usize = 20;

/// Starting point of the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Median and squared scaled MAD.
    #[default]
    MedianMad,
    /// Sample mean and (1/n) variance.
    MeanVar,
    User(MarginalParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Threshold on `max(|Δμ|/(1+|μ|), |Δσ²|/(1+σ²))`.
    pub tol: f64,
    pub max_iter: usize,
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-8, max_iter: 500, init: Init::MedianMad }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Invalid(format!("solver tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Invalid("max_iter must be at least 1".into()));
        }
        if let Init::User(p) = self.init {
            p.validate()?;
        }
        Ok(())
    }
}

/// Fitted marginal parameters with solver telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalEstimate {
    pub params: MarginalParams,
    pub iterations: usize,
    pub converged: bool,
    pub final_step_norm: f64,
    pub objective: f64,
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median and `(1.4826·MAD)²`.
pub fn median_mad(x: &[f64]) -> (f64, f64) {
    let med = median(x);
    let dev: Vec<f64> = x.iter().map(|v| (v - med).abs()).collect();
    let mad = MAD_SCALE * median(&dev);
    (med, mad * mad)
}

/// Sample mean and `(1/n)`-denominator variance.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

fn validate_sample(x: &[f64]) -> Result<()> {
    if x.len() < 2 {
        return Err(Error::SampleTooSmall { needed: 2, got: x.len() });
    }
    if let Some(row) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row, column: 0 });
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::DegenerateSample);
    }
    Ok(())
}

fn step_norm(old: &MarginalParams, new: &MarginalParams) -> f64 {
    let dm = (new.mu - old.mu).abs() / (1.0 + old.mu.abs());
    let ds = (new.sigma2 - old.sigma2).abs() / (1.0 + old.sigma2);
    dm.max(ds)
}

/// One fixed-point update from `cur`. Returns `None` when every weight
/// underflows.
fn irls_update(x: &[f64], cur: &MarginalParams, beta: f64) -> Option<MarginalParams> {
    let n = x.len() as f64;
    let scale = -0.5 * beta / cur.sigma2;
    let mut sw = 0.0;
    let mut swx = 0.0;
    let weights: Vec<f64> = x
        .iter()
        .map(|&xi| {
            let r = xi - cur.mu;
            let w = (scale * r * r).exp();
            sw += w;
            swx += w * xi;
            w
        })
        .collect();
    if !(sw.is_finite() && sw > 0.0) {
        return None;
    }
    let mu = swx / sw;
    let ssr: f64 = x.iter().zip(&weights).map(|(&xi, &w)| w * (xi - mu) * (xi - mu)).sum();
    let denom = sw - n * beta * (1.0 + beta).powf(-1.5);
    // a non-positive denominator restarts the variance at the weighted residual mean
    let sigma2 = if denom > 0.0 { ssr / denom } else { ssr / sw };
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return None;
    }
    Some(MarginalParams { mu, sigma2 })
}

/// Fit `(μ, σ²)` of one component by minimizing the marginal DPD objective.
///
/// For `β = 0` the closed-form maximum-likelihood values are returned.
/// Non-convergence is reported through [`MarginalEstimate::converged`].
pub fn fit_marginal(x: &[f64], beta: TuningBeta, cfg: &SolverConfig) -> Result<MarginalEstimate> {
    validate_sample(x)?;
    cfg.validate()?;
    let beta = beta.value();

    if beta == 0.0 {
        let (mu, sigma2) = mean_var(x);
        let params = MarginalParams { mu, sigma2 };
        return Ok(MarginalEstimate {
            params,
            iterations: 0,
            converged: true,
            final_step_norm: 0.0,
            objective: marginal_objective_unchecked(x, &params, 0.0),
        });
    }

    let mut cur = match cfg.init {
        Init::MedianMad => {
            let (mu, s2) = median_mad(x);
            if s2 > 0.0 {
                MarginalParams { mu, sigma2: s2 }
            } else {
                // more than half the sample tied: fall back to moments
                let (_, v) = mean_var(x);
                MarginalParams { mu, sigma2: v }
            }
        }
        Init::MeanVar => {
            let (mu, sigma2) = mean_var(x);
            MarginalParams { mu, sigma2 }
        }
        Init::User(p) => p,
    };
    let mut obj = marginal_objective_unchecked(x, &cur, beta);
    let mut last_step = f64::INFINITY;

    for iter in 1..=cfg.max_iter {
        let Some(target) = irls_update(x, &cur, beta) else {
            return Ok(MarginalEstimate {
                params: cur,
                iterations: iter,
                converged: false,
                final_step_norm: last_step,
                objective: obj,
            });
        };

        // rounding bound of an n-term sum; below it descent cannot be resolved
        let slack = 2.0 * x.len() as f64 * f64::EPSILON * obj.abs().max(f64::MIN_POSITIVE);
        let mut accepted = None;
        let mut frac = 1.0;
        for _ in 0..=MAX_HALVINGS {
            let cand = MarginalParams {
                mu: cur.mu + frac * (target.mu - cur.mu),
                sigma2: cur.sigma2 + frac * (target.sigma2 - cur.sigma2),
            };
            let cand_obj = marginal_objective_unchecked(x, &cand, beta);
            if cand_obj <= obj + slack {
                accepted = Some((cand, cand_obj));
                break;
            }
            frac *= 0.5;
        }
        let Some((next, next_obj)) = accepted else {
            return Ok(MarginalEstimate {
                params: cur,
                iterations: iter,
                converged: false,
                final_step_norm: last_step,
                objective: obj,
            });
        };

        last_step = step_norm(&cur, &next);
        cur = next;
        obj = next_obj;
        if last_step <= cfg.tol {
            return Ok(MarginalEstimate {
                params: cur,
                iterations: iter,
                converged: true,
                final_step_norm: last_step,
                objective: obj,
            });
        }
    }

    Ok(MarginalEstimate {
        params: cur,
        iterations: cfg.max_iter,
        converged: false,
        final_step_norm: last_step,
        objective: obj,
    })
}
