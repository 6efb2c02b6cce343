//! Nearest correlation matrix by alternating projections with Dykstra's
//! correction, followed by eigenvalue flooring.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-8;
pub const DEFAULT_MAX_SWEEPS: usize = 200;
/// Frobenius change between sweeps that stops the projections.
pub const SWEEP_TOL: f64 = 1e-10;
const INPUT_TOL: f64 = 1e-12;
const FLOOR_PASSES: usize = 10;

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    m.clone().symmetric_eigen().eigenvalues.min()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn reconstruct(eig: &SymmetricEigen<f64, nalgebra::Dyn>, floor: f64) -> DMatrix<f64> {
    let v = &eig.eigenvectors;
    let clipped = eig.eigenvalues.map(|l| l.max(floor));
    let mut out = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    symmetrize(&mut out);
    out
}

fn check_correlation_input(r: &DMatrix<f64>) -> Result<()> {
    if !r.is_square() {
        return Err(Error::Invalid(format!("matrix is {}x{}, expected square", r.nrows(), r.ncols())));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    let p = r.nrows();
    for i in 0..p {
        if (r[(i, i)] - 1.0).abs() > INPUT_TOL {
            return Err(Error::Invalid(format!("diagonal entry {i} is {} (expected 1)", r[(i, i)])));
        }
        for j in 0..i {
            if (r[(i, j)] - r[(j, i)]).abs() > INPUT_TOL {
                return Err(Error::Invalid(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Repair a symmetric unit-diagonal matrix into a positive-definite
/// correlation matrix.
///
/// Inputs whose smallest eigenvalue is already at least `eigen_floor` are
/// returned unchanged.
pub fn nearest_pd(r: &DMatrix<f64>, eigen_floor: f64, max_sweeps: usize) -> Result<DMatrix<f64>> {
    check_correlation_input(r)?;
    if !(eigen_floor.is_finite() && eigen_floor >= 0.0) {
        return Err(Error::Invalid(format!("eigen floor must be non-negative, got {eigen_floor}")));
    }
    if min_eigenvalue(r) >= eigen_floor {
        return Ok(r.clone());
    }

    let p = r.nrows();
    let mut y = r.clone();
    let mut correction = DMatrix::<f64>::zeros(p, p);
    for _ in 0..max_sweeps.max(1) {
        let shifted = &y - &correction;
        let psd = reconstruct(&shifted.clone().symmetric_eigen(), 0.0);
        correction = &psd - &shifted;
        let mut next = psd;
        next.fill_diagonal(1.0);
        let change = (&next - &y).norm();
        y = next;
        if change <= SWEEP_TOL {
            break;
        }
    }

    for _ in 0..FLOOR_PASSES {
        let mut floored = reconstruct(&y.clone().symmetric_eigen(), eigen_floor);
        let scale = floored.diagonal().map(|d| 1.0 / d.sqrt());
        for j in 0..p {
            for i in 0..p {
                floored[(i, j)] *= scale[i] * scale[j];
            }
        }
        floored.fill_diagonal(1.0);
        y = floored;
        if min_eigenvalue(&y) >= eigen_floor * (1.0 - 1e-6) {
            return Ok(y);
        }
    }
    Err(Error::NotPositiveDefinite)
}
