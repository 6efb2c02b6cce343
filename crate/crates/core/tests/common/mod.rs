//! Independent oracles shared by the integration tests: a private sampler,
//! quadrature rules, brute-force grid minimizers and a numerical sandwich
//! for asymptotic variances. Nothing here calls into the library.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, SMatrix, SVector};

// ---------------------------------------------------------------------------
// sampling

/// xorshift64* with Box–Muller normals.
pub struct TestRng {
    state: u64,
    spare: Option<f64>,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng { state: seed.wrapping_mul(0x2545_F491_4F6C_DD1D) | 1, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform on (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let (u, v) = (self.uniform(), self.uniform());
        let r = (-2.0 * u.ln()).sqrt();
        self.spare = Some(r * (2.0 * PI * v).sin());
        r * (2.0 * PI * v).cos()
    }
}

pub fn normal_sample(n: usize, mu: f64, sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = TestRng::new(seed);
    (0..n).map(|_| mu + sd * rng.normal()).collect()
}

/// Normal sample where a fraction `eps` of points is moved to `N(shift, 1)`.
pub fn contaminated_sample(n: usize, eps: f64, shift: f64, seed: u64) -> Vec<f64> {
    let mut rng = TestRng::new(seed);
    (0..n)
        .map(|_| if rng.uniform() < eps { shift + rng.normal() } else { rng.normal() })
        .collect()
}

/// Standard bivariate normal pair with correlation `rho`.
pub fn bivariate_sample(n: usize, rho: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = TestRng::new(seed);
    let s = (1.0 - rho * rho).sqrt();
    (0..n)
        .map(|_| {
            let (a, b) = (rng.normal(), rng.normal());
            (a, rho * a + s * b)
        })
        .unzip()
}

/// Rows of a p-variate standard normal sample.
pub fn standard_rows(n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = TestRng::new(seed);
    (0..n).map(|_| (0..p).map(|_| rng.normal()).collect()).collect()
}

// ---------------------------------------------------------------------------
// quadrature

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    // split first so narrow peaks are not missed by the initial three points
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let (lo, hi) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson_step(&f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// Nested adaptive Simpson over a rectangle.
pub fn adaptive_simpson_2d<F: Fn(f64, f64) -> f64>(f: F, a: (f64, f64), b: (f64, f64), tol: f64) -> f64 {
    adaptive_simpson(|x| adaptive_simpson(|y| f(x, y), b.0, b.1, tol), a.0, a.1, tol)
}

/// Gauss–Hermite rule for expectations under `N(0, 1)` (Golub–Welsch):
/// `E g(Z) ≈ Σ wᵢ g(zᵢ)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64).sqrt() } else { 0.0 });
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

// ---------------------------------------------------------------------------
// objectives written out from the definitions

pub fn normal_logpdf(x: f64, mu: f64, v: f64) -> f64 {
    -0.5 * (2.0 * PI * v).ln() - 0.5 * (x - mu).powi(2) / v
}

pub fn bvn_logpdf(x1: f64, x2: f64, m1: f64, v1: f64, m2: f64, v2: f64, r: f64) -> f64 {
    let a = (x1 - m1) / v1.sqrt();
    let c = (x2 - m2) / v2.sqrt();
    let one = 1.0 - r * r;
    let q = (a * a - 2.0 * r * a * c + c * c) / one;
    -(2.0 * PI).ln() - 0.5 * (v1 * v2 * one).ln() - 0.5 * q
}

/// `∫ φ^(1+β)` for a univariate normal, closed form.
pub fn power_int_1(v: f64, beta: f64) -> f64 {
    (2.0 * PI * v).powf(-beta / 2.0) / (1.0 + beta).sqrt()
}

pub fn power_int_2(v1: f64, v2: f64, r: f64, beta: f64) -> f64 {
    (2.0 * PI).powf(-beta) * (v1 * v2 * (1.0 - r * r)).powf(-beta / 2.0) / (1.0 + beta)
}

/// Per-observation marginal DPD loss (negative log-density at β = 0).
pub fn v1(x: f64, mu: f64, v: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return -normal_logpdf(x, mu, v);
    }
    power_int_1(v, beta) - (1.0 + 1.0 / beta) * (beta * normal_logpdf(x, mu, v)).exp()
}

pub fn v2(x1: f64, x2: f64, th: &[f64; 5], beta: f64) -> f64 {
    let [m1, s1, m2, s2, r] = *th;
    if beta == 0.0 {
        return -bvn_logpdf(x1, x2, m1, s1, m2, s2, r);
    }
    power_int_2(s1, s2, r, beta) - (1.0 + 1.0 / beta) * (beta * bvn_logpdf(x1, x2, m1, s1, m2, s2, r)).exp()
}

pub fn marginal_h(x: &[f64], mu: f64, v: f64, beta: f64) -> f64 {
    x.iter().map(|&xi| v1(xi, mu, v, beta)).sum::<f64>() / x.len() as f64
}

pub fn pair_h(x1: &[f64], x2: &[f64], th: &[f64; 5], beta: f64) -> f64 {
    x1.iter().zip(x2).map(|(&a, &b)| v2(a, b, th, beta)).sum::<f64>() / x1.len() as f64
}

// ---------------------------------------------------------------------------
// grid oracles

/// Argmin of `f` over `lo, lo+step, …` up to `hi`.
pub fn grid_argmin_1d<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n)
        .map(|i| lo + i as f64 * step)
        .map(|x| (x, f(x)))
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

/// Argmin of `f(x, y)` over a rectangular grid.
pub fn grid_argmin_2d<F: Fn(f64, f64) -> f64>(f: F, xr: (f64, f64), yr: (f64, f64), step: f64) -> (f64, f64, f64) {
    let nx = ((xr.1 - xr.0) / step).round() as usize;
    let ny = ((yr.1 - yr.0) / step).round() as usize;
    let mut best = (f64::NAN, f64::NAN, f64::INFINITY);
    for i in 0..=nx {
        let x = xr.0 + i as f64 * step;
        for j in 0..=ny {
            let y = yr.0 + j as f64 * step;
            let v = f(x, y);
            if v < best.2 {
                best = (x, y, v);
            }
        }
    }
    best
}

/// Two-level grid search for the marginal objective: a 0.05 grid over
/// `μ ∈ [−2, 2] × σ² ∈ [0.1, 4]`, then a 1e−3 grid in a ±0.05 window.
pub fn marginal_grid_oracle(x: &[f64], beta: f64) -> (f64, f64) {
    let f = |m: f64, v: f64| marginal_h(x, m, v, beta);
    let (m0, s0, _) = grid_argmin_2d(f, (-2.0, 2.0), (0.1, 4.0), 0.05);
    let (m1, s1, _) = grid_argmin_2d(f, (m0 - 0.05, m0 + 0.05), ((s0 - 0.05).max(1e-3), s0 + 0.05), 1e-3);
    (m1, s1)
}

/// Exhaustive 1e−3 grid over ρ ∈ [−0.999, 0.999] with the marginals fixed.
pub fn rho_grid_oracle(x1: &[f64], x2: &[f64], m1: (f64, f64), m2: (f64, f64), beta: f64) -> f64 {
    grid_argmin_1d(|r| pair_h(x1, x2, &[m1.0, m1.1, m2.0, m2.1, r], beta), -0.999, 0.999, 1e-3).0
}

// ---------------------------------------------------------------------------
// numerical sandwich

pub type M5 = SMatrix<f64, 5, 5>;
pub type V5 = SVector<f64, 5>;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Marginal losses for the first four coordinates, pairwise loss for ρ only.
    Sequential,
    /// Pairwise loss for all five coordinates.
    Simultaneous,
}

const FD_H: f64 = 1e-5;
const FD_H_OUTER: f64 = 1e-4;

// steps follow each coordinate's own scale so the differences stay well
// conditioned when the variances are far from one
fn step(th: &[f64; 5], k: usize, h: f64) -> f64 {
    match k {
        0 => h * th[1].sqrt(),
        1 => h * th[1],
        2 => h * th[3].sqrt(),
        3 => h * th[3],
        _ => h,
    }
}

/// Estimating function at one point, `(μ₁, σ₁², μ₂, σ₂², ρ)` ordering, by
/// central differences of the per-observation losses.
pub fn psi(th: &[f64; 5], x1: f64, x2: f64, beta: f64, scheme: Scheme) -> V5 {
    V5::from_fn(|k, _| {
        let mut up = *th;
        let mut dn = *th;
        let h = step(th, k, FD_H);
        up[k] += h;
        dn[k] -= h;
        let loss = |t: &[f64; 5]| match (scheme, k) {
            (Scheme::Sequential, 0 | 1) => v1(x1, t[0], t[1], beta),
            (Scheme::Sequential, 2 | 3) => v1(x2, t[2], t[3], beta),
            _ => v2(x1, x2, t, beta),
        };
        (loss(&up) - loss(&dn)) / (2.0 * h)
    })
}

/// Tensor Gauss–Hermite nodes for the bivariate normal at `th`.
pub struct BvnRule {
    pub points: Vec<(f64, f64, f64)>,
}

impl BvnRule {
    pub fn new(th: &[f64; 5], order: usize) -> Self {
        let (z, w) = gauss_hermite(order);
        let [m1, v1, m2, v2, r] = *th;
        let s = (1.0 - r * r).sqrt();
        let mut points = Vec::with_capacity(order * order);
        for i in 0..order {
            for j in 0..order {
                let x1 = m1 + v1.sqrt() * z[i];
                let x2 = m2 + v2.sqrt() * (r * z[i] + s * z[j]);
                points.push((x1, x2, w[i] * w[j]));
            }
        }
        BvnRule { points }
    }

    pub fn expect<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        self.points.iter().map(|&(a, b, w)| w * f(a, b)).sum()
    }
}

pub struct Sandwich {
    /// `E ∂ψ/∂θ`
    pub bread: M5,
    /// `Var ψ`
    pub meat: M5,
    pub covariance: M5,
}

/// `B⁻¹ Γ B⁻ᵀ` with both pieces computed by quadrature under the model.
pub fn sandwich(th: &[f64; 5], beta: f64, scheme: Scheme) -> Sandwich {
    let rule = BvnRule::new(th, 60);
    let mean_psi = |t: &[f64; 5]| -> V5 {
        rule.points.iter().fold(V5::zeros(), |acc, &(a, b, w)| acc + psi(t, a, b, beta, scheme) * w)
    };
    let centre = mean_psi(th);
    let mut second = M5::zeros();
    for &(a, b, w) in &rule.points {
        let p = psi(th, a, b, beta, scheme);
        second += p * p.transpose() * w;
    }
    let meat = second - centre * centre.transpose();
    let mut bread = M5::zeros();
    for k in 0..5 {
        let mut up = *th;
        let mut dn = *th;
        let h = step(th, k, FD_H_OUTER);
        up[k] += h;
        dn[k] -= h;
        let col = (mean_psi(&up) - mean_psi(&dn)) / (2.0 * h);
        bread.set_column(k, &col);
    }
    let inv = bread.try_inverse().expect("invertible bread");
    let covariance = inv * meat * inv.transpose();
    Sandwich { bread, meat, covariance }
}

/// `−B⁻¹ψ(y)`, the influence function of the M-estimator defined by `ψ`.
pub fn influence_oracle(th: &[f64; 5], beta: f64, scheme: Scheme, y1: f64, y2: f64) -> V5 {
    let s = sandwich(th, beta, scheme);
    -(s.bread.try_inverse().unwrap() * psi(th, y1, y2, beta, scheme))
}

// ---------------------------------------------------------------------------
// population-level marginal functional

/// Minimizer of the marginal DPD objective at the distribution
/// `(1 − ε) N(μ₀, σ₀²) + ε δ_y`, by fixed-point iteration on the closed-form
/// population estimating equations.
pub fn marginal_functional(mu0: f64, v0: f64, eps: f64, y: f64, beta: f64) -> (f64, f64) {
    let (mut mu, mut v) = (mu0, v0);
    for _ in 0..10_000 {
        // tilting N(μ₀, σ₀²) by w(x) = exp(−β(x−μ)²/(2σ²)) gives another normal
        let denom = v + beta * v0;
        let mass = (v / denom).sqrt() * (-beta * (mu - mu0).powi(2) / (2.0 * denom)).exp();
        let tm = (mu0 * v + beta * v0 * mu) / denom;
        let tv = v * v0 / denom;
        let wy = (-beta * (y - mu).powi(2) / (2.0 * v)).exp();

        let sw = (1.0 - eps) * mass + eps * wy;
        let swx = (1.0 - eps) * mass * tm + eps * wy * y;
        let mu_new = swx / sw;
        let sq = (1.0 - eps) * mass * (tv + (tm - mu_new).powi(2)) + eps * wy * (y - mu_new).powi(2);
        let v_new = sq / (sw - beta * (1.0 + beta).powf(-1.5));
        let done = (mu_new - mu).abs() < 1e-15 && (v_new - v).abs() < 1e-15;
        mu = mu_new;
        v = v_new;
        if done {
            break;
        }
    }
    (mu, v)
}

/// Two-sided Gâteaux derivative of the marginal functional toward `δ_y`.
pub fn marginal_influence_oracle(mu0: f64, v0: f64, y: f64, beta: f64, eps: f64) -> (f64, f64) {
    let (mp, vp) = marginal_functional(mu0, v0, eps, y, beta);
    let (mm, vm) = marginal_functional(mu0, v0, -eps, y, beta);
    ((mp - mm) / (2.0 * eps), (vp - vm) / (2.0 * eps))
}
