//! Step 2: correlation of a pair of components with the Step-1 marginals
//! plugged in, by bounded one-dimensional minimization of the pairwise DPD
//! objective.

use serde::{Deserialize, Serialize};

use crate::brent;
use crate::error::{Error, Result};
use crate::model::{MarginalParams, StandardizedPair, TuningBeta, RHO_MAX};

/// Equispaced starting points scanned before Brent refinement.
pub const DEFAULT_SEEDS: usize = 41;
pub const DEFAULT_RHO_TOL: f64 = 1e-8;
const BRENT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub rho: f64,
    pub objective_at_min: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// The minimizer sits on the guard `|ρ| = 1 − RHO_GUARD`.
    pub at_boundary: bool,
}

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimize `ρ ↦ H(m̂ⱼ, m̂ₖ, ρ)` over `[−1+δ, 1−δ]`.
pub fn fit_correlation(
    xj: &[f64],
    xk: &[f64],
    mj: &MarginalParams,
    mk: &MarginalParams,
    beta: TuningBeta,
    tol: f64,
) -> Result<CorrelationEstimate> {
    fit_correlation_with_seeds(xj, xk, mj, mk, beta, tol, DEFAULT_SEEDS)
}

/// [`fit_correlation`] with an explicit number of scan seeds (at least 3).
pub fn fit_correlation_with_seeds(
    xj: &[f64],
    xk: &[f64],
    mj: &MarginalParams,
    mk: &MarginalParams,
    beta: TuningBeta,
    tol: f64,
    seeds: usize,
) -> Result<CorrelationEstimate> {
    if xj.len() != xk.len() {
        return Err(Error::LengthMismatch { left: xj.len(), right: xk.len() });
    }
    if xj.len() < 3 {
        return Err(Error::SampleTooSmall { needed: 3, got: xj.len() });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Invalid(format!("correlation tolerance must be positive, got {tol}")));
    }
    if seeds < 3 {
        return Err(Error::Invalid(format!("need at least 3 scan seeds, got {seeds}")));
    }
    let pair = StandardizedPair::new(xj, xk, mj, mk)?;
    let beta = beta.value();
    let objective = |rho: f64| finite_or_inf(pair.objective(rho, beta));

    let step = 2.0 * RHO_MAX / (seeds - 1) as f64;
    let grid: Vec<f64> = (0..seeds)
        .map(|i| if i == seeds - 1 { RHO_MAX } else { -RHO_MAX + i as f64 * step })
        .collect();
    let values: Vec<f64> = grid.iter().map(|&r| objective(r)).collect();
    let mut evaluations = seeds;

    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(seeds - 1)];
    let refined = brent::minimize(objective, lo, hi, tol, BRENT_MAX_ITER);
    evaluations += refined.evaluations;

    // the scan values include both guard points, so a boundary minimum wins here
    let (rho, fmin, converged) = if values[best] < refined.fx {
        (grid[best], values[best], refined.converged || best == 0 || best == seeds - 1)
    } else {
        (refined.x, refined.fx, refined.converged)
    };
    let at_boundary = rho.abs() >= RHO_MAX;

    Ok(CorrelationEstimate { rho, objective_at_min: fmin, evaluations, converged, at_boundary })
}
