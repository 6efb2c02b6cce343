//! Sequential minimum density power divergence estimation of multivariate
//! location and scatter under the normal model.
//!
//! The estimator fits each component's mean and variance separately, then
//! each pairwise correlation with those marginals held fixed, and assembles
//! the covariance matrix from the pieces. Because every unit of work touches
//! one or two columns only, all of it runs in parallel.
//!
//! ```
//! use smdpde::{estimate, DataMatrix, EstimateConfig, TuningBeta};
//!
//! let x = DataMatrix::from_rows(&[
//!     vec![0.1, 0.3], vec![-0.4, -0.2], vec![1.2, 0.9],
//!     vec![0.5, 0.8], vec![-1.0, -0.7], vec![0.0, 0.2],
//! ]).unwrap();
//! let fit = estimate(&x, TuningBeta::new(0.3).unwrap(), &EstimateConfig::default()).unwrap();
//! assert_eq!(fit.sigma_hat.nrows(), 2);
//! ```

pub mod assembly;
pub mod baseline;
pub mod brent;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod fmt;
pub mod marginal;
pub mod model;
pub mod nearpd;
pub mod pairwise;
pub mod simulation;

pub use assembly::{assemble_covariance, estimate, EstimateConfig, LocationScatterEstimate, PairEstimate, PdPolicy};
pub use baseline::{fit_mdpde, fit_mle, MdpdeFitResult};
pub use data::DataMatrix;
pub use error::{Error, Result};
pub use marginal::{fit_marginal, Init, MarginalEstimate, SolverConfig};
pub use model::{MarginalParams, PairParams, TuningBeta};
pub use nearpd::nearest_pd;
pub use pairwise::{fit_correlation, CorrelationEstimate};
