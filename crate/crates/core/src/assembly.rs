//! The two-step pipeline over a full data matrix: marginals, then pairwise
//! correlations, then assembly of R̂ and Σ̂ with optional PD repair.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::marginal::{fit_marginal, MarginalEstimate, SolverConfig};
use crate::model::TuningBeta;
use crate::nearpd::{min_eigenvalue, nearest_pd, DEFAULT_EIGEN_FLOOR, DEFAULT_MAX_SWEEPS};
use crate::pairwise::{fit_correlation_with_seeds, CorrelationEstimate, DEFAULT_RHO_TOL, DEFAULT_SEEDS};

/// When to run the nearest-PD repair on R̂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PdPolicy {
    /// Only when the smallest eigenvalue is below the floor.
    #[default]
    Auto,
    Always,
    Never,
}

impl std::str::FromStr for PdPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(PdPolicy::Auto),
            "always" => Ok(PdPolicy::Always),
            "never" => Ok(PdPolicy::Never),
            other => Err(Error::Invalid(format!("unknown PD policy '{other}' (expected auto, always or never)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    pub solver: SolverConfig,
    pub rho_tol: f64,
    pub rho_seeds: usize,
    pub pd_policy: PdPolicy,
    pub eigen_floor: f64,
    pub max_sweeps: usize,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            solver: SolverConfig::default(),
            rho_tol: DEFAULT_RHO_TOL,
            rho_seeds: DEFAULT_SEEDS,
            pd_policy: PdPolicy::Auto,
            eigen_floor: DEFAULT_EIGEN_FLOOR,
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

/// One fitted off-diagonal entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub j: usize,
    pub k: usize,
    pub estimate: CorrelationEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocationScatterEstimate {
    pub beta: TuningBeta,
    pub mu_hat: DVector<f64>,
    pub sigma2_hat: DVector<f64>,
    /// Reported correlation matrix (after repair when `pd_corrected`).
    pub r_hat: DMatrix<f64>,
    pub sigma_hat: DMatrix<f64>,
    pub pd_corrected: bool,
    pub per_component: Vec<MarginalEstimate>,
    /// Raw pairwise fits, `j < k`, in row-major upper-triangle order.
    pub per_pair: Vec<PairEstimate>,
}

impl LocationScatterEstimate {
    pub fn p(&self) -> usize {
        self.mu_hat.len()
    }

    /// Number of free parameters, `(p² + 3p)/2`.
    pub fn parameter_count(&self) -> usize {
        let p = self.p();
        (p * p + 3 * p) / 2
    }

    /// Every marginal and pairwise solve converged.
    pub fn converged(&self) -> bool {
        self.per_component.iter().all(|m| m.converged) && self.per_pair.iter().all(|c| c.estimate.converged)
    }

    /// Uncorrected correlation matrix built from the pairwise fits.
    pub fn raw_correlation(&self) -> DMatrix<f64> {
        let mut r = DMatrix::identity(self.p(), self.p());
        for pe in &self.per_pair {
            r[(pe.j, pe.k)] = pe.estimate.rho;
            r[(pe.k, pe.j)] = pe.estimate.rho;
        }
        r
    }
}

/// `Σ[j][k] = σⱼ σₖ R[j][k]`, with `Σ[j][j] = σⱼ²` exactly.
pub fn assemble_covariance(sigma2: &DVector<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    let p = sigma2.len();
    let sd = sigma2.map(f64::sqrt);
    DMatrix::from_fn(p, p, |j, k| if j == k { sigma2[j] } else { sd[j] * sd[k] * r[(j, k)] })
}

fn upper_pairs(p: usize) -> Vec<(usize, usize)> {
    (0..p).flat_map(|j| (j + 1..p).map(move |k| (j, k))).collect()
}

/// Sequential minimum DPD estimate of location and scatter.
pub fn estimate(data: &DataMatrix, beta: TuningBeta, cfg: &EstimateConfig) -> Result<LocationScatterEstimate> {
    cfg.solver.validate()?;
    let p = data.p();

    let per_component: Vec<MarginalEstimate> = (0..p)
        .into_par_iter()
        .map(|j| {
            fit_marginal(data.column(j), beta, &cfg.solver).map_err(|e| match e {
                Error::DegenerateSample => Error::DegenerateColumn { column: j },
                other => other,
            })
        })
        .collect::<Result<_>>()?;

    let per_pair: Vec<PairEstimate> = upper_pairs(p)
        .into_par_iter()
        .map(|(j, k)| {
            let estimate = fit_correlation_with_seeds(
                data.column(j),
                data.column(k),
                &per_component[j].params,
                &per_component[k].params,
                beta,
                cfg.rho_tol,
                cfg.rho_seeds,
            )?;
            Ok(PairEstimate { j, k, estimate })
        })
        .collect::<Result<_>>()?;

    let mu_hat = DVector::from_iterator(p, per_component.iter().map(|m| m.params.mu));
    let sigma2_hat = DVector::from_iterator(p, per_component.iter().map(|m| m.params.sigma2));

    let mut out = LocationScatterEstimate {
        beta,
        mu_hat,
        sigma2_hat,
        r_hat: DMatrix::identity(p, p),
        sigma_hat: DMatrix::zeros(p, p),
        pd_corrected: false,
        per_component,
        per_pair,
    };
    let raw = out.raw_correlation();
    let repair = match cfg.pd_policy {
        PdPolicy::Never => false,
        PdPolicy::Always => true,
        PdPolicy::Auto => min_eigenvalue(&raw) < cfg.eigen_floor,
    };
    out.r_hat = if repair {
        let fixed = nearest_pd(&raw, cfg.eigen_floor, cfg.max_sweeps)?;
        out.pd_corrected = fixed != raw;
        fixed
    } else {
        raw
    };
    out.sigma_hat = assemble_covariance(&out.sigma2_hat, &out.r_hat);
    Ok(out)
}
