//! Simultaneous multivariate MDPDE of (μ, Σ) and the plug-in MLE, used as
//! comparison baselines.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::marginal::{mean_var, median_mad, SolverConfig};
use crate::model::TuningBeta;

/// Why a simultaneous fit stopped without converging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// `n ≤ p`.
    TooFewObservations,
    /// The scatter update lost positive definiteness.
    NotPositiveDefinite,
    /// `Σwᵢ − nβ(1+β)^(−p/2−1) ≤ 0`.
    NonPositiveDenominator,
    /// Every observation received zero weight.
    ZeroWeights,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdpdeFitResult {
    pub mu_hat: DVector<f64>,
    pub sigma_hat: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<FailureReason>,
    /// Columns with zero sample variance (MLE only).
    pub degenerate_columns: Vec<usize>,
}

impl MdpdeFitResult {
    fn failed(mu_hat: DVector<f64>, sigma_hat: DMatrix<f64>, iterations: usize, reason: FailureReason) -> Self {
        MdpdeFitResult {
            mu_hat,
            sigma_hat,
            iterations,
            converged: false,
            failure: Some(reason),
            degenerate_columns: Vec::new(),
        }
    }
}

/// Sample mean and `(1/n)` covariance.
pub fn fit_mle(data: &DataMatrix) -> MdpdeFitResult {
    let x = data.to_matrix();
    let n = data.n() as f64;
    let mu = x.row_mean().transpose();
    let mut centered = x;
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mu[j]);
    }
    let mut sigma = centered.tr_mul(&centered) / n;
    symmetrize(&mut sigma);
    let degenerate_columns: Vec<usize> = (0..data.p()).filter(|&j| sigma[(j, j)] <= 0.0).collect();
    let pd = sigma.clone().cholesky().is_some();
    MdpdeFitResult {
        mu_hat: mu,
        sigma_hat: sigma,
        iterations: 0,
        converged: pd,
        failure: (!pd).then_some(FailureReason::NotPositiveDefinite),
        degenerate_columns,
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    new.iter().zip(old).map(|(a, b)| (a - b).abs() / (1.0 + b.abs())).fold(0.0, f64::max)
}

/// IRLS for the simultaneous minimum DPD estimator of a p-variate normal.
///
/// Weights are `exp(−β d²/2)` with `d` the current Mahalanobis distance,
/// and the scatter update divides by `Σw − nβ(1+β)^(−p/2−1)`. Failure to
/// converge is reported in the result, not raised.
pub fn fit_mdpde(data: &DataMatrix, beta: TuningBeta, cfg: &SolverConfig) -> Result<MdpdeFitResult> {
    cfg.validate()?;
    if beta.is_mle() {
        return Ok(fit_mle(data));
    }
    let (n, p) = (data.n(), data.p());

    let mut mu = DVector::zeros(p);
    let mut sigma = DMatrix::zeros(p, p);
    for j in 0..p {
        let (med, mad2) = median_mad(data.column(j));
        let scale = if mad2 > 0.0 { mad2 } else { mean_var(data.column(j)).1 };
        if scale <= 0.0 {
            return Err(Error::DegenerateColumn { column: j });
        }
        mu[j] = med;
        sigma[(j, j)] = scale;
    }
    if n <= p {
        return Ok(MdpdeFitResult::failed(mu, sigma, 0, FailureReason::TooFewObservations));
    }

    let b = beta.value();
    let shrink = n as f64 * b * (1.0 + b).powf(-(p as f64) / 2.0 - 1.0);
    let x = data.to_matrix();

    for iter in 1..=cfg.max_iter {
        let Some(chol) = sigma.clone().cholesky() else {
            return Ok(MdpdeFitResult::failed(mu, sigma, iter - 1, FailureReason::NotPositiveDefinite));
        };
        let mut centered = x.clone();
        for (j, mut col) in centered.column_iter_mut().enumerate() {
            col.add_scalar_mut(-mu[j]);
        }
        let z = chol.l().solve_lower_triangular(&centered.transpose()).expect("cholesky factor is invertible");
        let w: Vec<f64> = z.column_iter().map(|c| (-0.5 * b * c.norm_squared()).exp()).collect();
        let sw: f64 = w.iter().sum();
        if !(sw > 0.0) {
            return Ok(MdpdeFitResult::failed(mu, sigma, iter, FailureReason::ZeroWeights));
        }

        let wv = DVector::from_column_slice(&w);
        let mu_new = x.tr_mul(&wv) / sw;
        let mut resid = x.clone();
        for (j, mut col) in resid.column_iter_mut().enumerate() {
            col.add_scalar_mut(-mu_new[j]);
        }
        let mut weighted = resid.clone();
        for (i, mut row) in weighted.row_iter_mut().enumerate() {
            row *= w[i];
        }
        let denom = sw - shrink;
        if denom <= 0.0 {
            return Ok(MdpdeFitResult::failed(mu, sigma, iter, FailureReason::NonPositiveDenominator));
        }
        let mut sigma_new = resid.tr_mul(&weighted) / denom;
        symmetrize(&mut sigma_new);
        if sigma_new.iter().any(|v| !v.is_finite()) || sigma_new.clone().cholesky().is_none() {
            return Ok(MdpdeFitResult::failed(mu_new, sigma_new, iter, FailureReason::NotPositiveDefinite));
        }

        let change = relative_change(mu_new.as_slice(), mu.as_slice())
            .max(relative_change(sigma_new.as_slice(), sigma.as_slice()));
        mu = mu_new;
        sigma = sigma_new;
        if change <= cfg.tol {
            return Ok(MdpdeFitResult {
                mu_hat: mu,
                sigma_hat: sigma,
                iterations: iter,
                converged: true,
                failure: None,
                degenerate_columns: Vec::new(),
            });
        }
    }
    Ok(MdpdeFitResult::failed(mu, sigma, cfg.max_iter, FailureReason::MaxIterations))
}
