mod common;

use common::*;
use smdpde::marginal::{fit_marginal, Init, SolverConfig};
use smdpde::model::{marginal_objective_gradient, RHO_MAX};
use smdpde::pairwise::{fit_correlation, DEFAULT_RHO_TOL};
use smdpde::{Error, MarginalParams, TuningBeta};

fn b(v: f64) -> TuningBeta {
    TuningBeta::new(v).unwrap()
}

#[test]
fn mle_closed_form() {
    let e = fit_marginal(&[1.0, 2.0, 3.0, 4.0], TuningBeta::MLE, &SolverConfig::default()).unwrap();
    assert_eq!(e.params.mu, 2.5);
    assert_eq!(e.params.sigma2, 1.25);
    assert!(e.converged);
}

#[test]
fn constant_sample_is_degenerate() {
    let err = fit_marginal(&[2.0; 10], b(0.3), &SolverConfig::default()).unwrap_err();
    assert_eq!(err, Error::DegenerateSample);
}

#[test]
fn single_gross_outlier() {
    let mut x = normal_sample(99, 0.0, 1.0, 2024);
    x.push(50.0);
    let mle = fit_marginal(&x, TuningBeta::MLE, &SolverConfig::default()).unwrap();
    let robust = fit_marginal(&x, b(0.5), &SolverConfig::default()).unwrap();
    assert!(mle.params.mu > 0.4, "MLE mean {}", mle.params.mu);
    assert!(robust.params.mu.abs() < 0.5);
    let (gm, gv) = marginal_grid_oracle(&x, 0.5);
    assert!((robust.params.mu - gm).abs() <= 1e-3, "{} vs grid {gm}", robust.params.mu);
    assert!((robust.params.sigma2 - gv).abs() <= 1e-3, "{} vs grid {gv}", robust.params.sigma2);
}

#[test]
fn affine_equivariance() {
    let x = contaminated_sample(300, 0.1, 8.0, 5);
    let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
    let cfg = SolverConfig { tol: 1e-12, ..Default::default() };
    for &beta in &[0.0, 0.2, 0.5, 1.0] {
        let e = fit_marginal(&x, b(beta), &cfg).unwrap();
        let f = fit_marginal(&y, b(beta), &cfg).unwrap();
        assert!((f.params.mu - (2.0 * e.params.mu + 3.0)).abs() < 1e-8);
        assert!((f.params.sigma2 - 4.0 * e.params.sigma2).abs() < 1e-8 * f.params.sigma2);
    }
}

#[test]
fn fixed_point_solves_estimating_equations() {
    let cfg = SolverConfig { tol: 1e-12, ..Default::default() };
    for seed in 0..10 {
        let x = contaminated_sample(250, 0.05, 6.0, 100 + seed);
        for &beta in &[0.1, 0.3, 0.5, 0.8] {
            let e = fit_marginal(&x, b(beta), &cfg).unwrap();
            assert!(e.converged);
            let g = marginal_objective_gradient(&x, &e.params, b(beta)).unwrap();
            assert!(g[0].abs() <= 1e-8 && g[1].abs() <= 1e-8, "seed {seed} beta {beta}: {g:?}");
        }
    }
}

#[test]
fn converged_implies_small_step() {
    let cfg = SolverConfig::default();
    let x = contaminated_sample(200, 0.1, 10.0, 3);
    let e = fit_marginal(&x, b(0.4), &cfg).unwrap();
    assert!(e.converged && e.final_step_norm <= cfg.tol);
    let capped = fit_marginal(&x, b(0.4), &SolverConfig { max_iter: 1, ..cfg }).unwrap();
    assert!(!capped.converged);
}

#[test]
fn small_beta_is_close_to_mle() {
    for seed in 0..10 {
        let x = normal_sample(200, 1.0, 2.0, seed);
        let a = fit_marginal(&x, TuningBeta::MLE, &SolverConfig::default()).unwrap();
        let e = fit_marginal(&x, b(1e-4), &SolverConfig::default()).unwrap();
        assert!((a.params.mu - e.params.mu).abs() < 1e-3);
        assert!((a.params.sigma2 - e.params.sigma2).abs() < 1e-3);
    }
}

#[test]
fn initialisations_agree_on_clean_data() {
    let x = normal_sample(400, -1.0, 0.7, 55);
    let a = fit_marginal(&x, b(0.3), &SolverConfig::default()).unwrap();
    for init in [Init::MeanVar, Init::User(MarginalParams::new(0.0, 3.0).unwrap())] {
        let e = fit_marginal(&x, b(0.3), &SolverConfig { init, ..Default::default() }).unwrap();
        assert!((a.params.mu - e.params.mu).abs() < 1e-6);
        assert!((a.params.sigma2 - e.params.sigma2).abs() < 1e-6);
    }
}

#[test]
fn marginal_matches_grid_oracle() {
    for &beta in &[0.1, 0.3, 0.5] {
        for seed in 0..8 {
            let x = contaminated_sample(150, 0.05, 5.0, 1000 * seed + (beta * 10.0) as u64);
            let e = fit_marginal(&x, b(beta), &SolverConfig::default()).unwrap();
            let (gm, gv) = marginal_grid_oracle(&x, beta);
            assert!((e.params.mu - gm).abs() <= 1e-3, "beta {beta} seed {seed}: mu {} vs {gm}", e.params.mu);
            assert!((e.params.sigma2 - gv).abs() <= 1e-3, "beta {beta} seed {seed}: s2 {} vs {gv}", e.params.sigma2);
        }
    }
}

#[test]
fn correlation_matches_grid_oracle() {
    let cfg = SolverConfig::default();
    for &beta in &[0.0, 0.1, 0.3, 0.5] {
        for seed in 0..50u64 {
            let rho = -0.8 + 1.6 * (seed as f64 / 49.0);
            let (x, y) = bivariate_sample(200, rho, 7 * seed + 1);
            let mx = fit_marginal(&x, b(beta), &cfg).unwrap().params;
            let my = fit_marginal(&y, b(beta), &cfg).unwrap().params;
            let e = fit_correlation(&x, &y, &mx, &my, b(beta), DEFAULT_RHO_TOL).unwrap();
            let g = rho_grid_oracle(&x, &y, (mx.mu, mx.sigma2), (my.mu, my.sigma2), beta);
            assert!((e.rho - g).abs() <= 1e-3, "beta {beta} seed {seed}: {} vs grid {g}", e.rho);
        }
    }
}

#[test]
fn independent_permutations_have_small_correlation() {
    let base = normal_sample(500, 0.0, 1.0, 31);
    let mut rng = TestRng::new(32);
    let mut perm = base.clone();
    for i in (1..perm.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    let m = MarginalParams::standard();
    let e = fit_correlation(&base, &perm, &m, &m, b(0.3), DEFAULT_RHO_TOL).unwrap();
    let g = rho_grid_oracle(&base, &perm, (0.0, 1.0), (0.0, 1.0), 0.3);
    assert!((e.rho - g).abs() <= 1e-3);
    assert!(e.rho.abs() < 0.15);
}

#[test]
fn correlation_sign_equivariance() {
    let cfg = SolverConfig::default();
    for seed in 0..10 {
        let (x, y) = bivariate_sample(250, 0.45, 400 + seed);
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        for &beta in &[0.0, 0.2, 0.5] {
            let mx = fit_marginal(&x, b(beta), &cfg).unwrap().params;
            let my = fit_marginal(&y, b(beta), &cfg).unwrap().params;
            let mn = MarginalParams::new(-my.mu, my.sigma2).unwrap();
            let e = fit_correlation(&x, &y, &mx, &my, b(beta), DEFAULT_RHO_TOL).unwrap();
            let f = fit_correlation(&x, &neg, &mx, &mn, b(beta), DEFAULT_RHO_TOL).unwrap();
            assert!((e.rho + f.rho).abs() < 1e-7);
        }
    }
}

#[test]
fn perfect_dependence_sits_on_guard() {
    let x = normal_sample(100, 0.0, 1.0, 1);
    let m = MarginalParams::standard();
    let e = fit_correlation(&x, &x, &m, &m, b(0.1), DEFAULT_RHO_TOL).unwrap();
    assert_eq!(e.rho, RHO_MAX);
    assert!(e.at_boundary && e.converged);
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    let f = fit_correlation(&x, &neg, &m, &m, b(0.1), DEFAULT_RHO_TOL).unwrap();
    assert_eq!(f.rho, -RHO_MAX);
}
