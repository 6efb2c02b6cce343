//! Influence functions and asymptotic variances under the bivariate normal
//! model, plus the relative-efficiency tables built from them.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::model::{bivariate_log_density, log_density, MarginalParams, PairParams, TuningBeta};

const MAX_CONDITION: f64 = 1e14;

// ---------------------------------------------------------------------------
// influence functions

/// Influence of a point `y` on the marginal mean.
///
/// Carries a leading minus sign, so at β = 0 this is `−(y − μ)`, the
/// negative of the textbook MLE influence.
pub fn if_mean(y: f64, m: &MarginalParams, beta: TuningBeta) -> Result<f64> {
    m.validate()?;
    let b = beta.value();
    let r = y - m.mu;
    Ok(-(1.0 + b).powf(1.5) * r * (-b * r * r / (2.0 * m.sigma2)).exp())
}

/// Influence of a point `y` on the marginal variance.
pub fn if_variance(y: f64, m: &MarginalParams, beta: TuningBeta) -> Result<f64> {
    m.validate()?;
    let b = beta.value();
    let v = m.sigma2;
    let fb = (b * log_density(y, m)).exp();
    let shift = -b * (2.0 * PI).powf(-b / 2.0) * v.powf(1.0 - b / 2.0) * (1.0 + b).powf(-1.5);
    let scale = (b * b + 2.0) * (2.0 * PI * v).powf(-b / 2.0) * (1.0 + b).powf(-2.5);
    let r = y - m.mu;
    Ok((fb * (r * r - v) - shift) / (0.5 * scale))
}

/// Score of the bivariate normal log-density in ρ.
pub fn rho_score(y1: f64, y2: f64, model: &PairParams) -> f64 {
    let r = model.rho;
    let a = (y1 - model.a.mu) / model.a.sigma();
    let c = (y2 - model.b.mu) / model.b.sigma();
    let one = 1.0 - r * r;
    r / one - (r * (a * a + c * c) - (1.0 + r * r) * a * c) / (one * one)
}

/// Influence of a point `(y1, y2)` on the correlation estimated with the
/// marginals plugged in.
pub fn if_correlation(y1: f64, y2: f64, model: &PairParams, beta: TuningBeta) -> Result<f64> {
    model.validate()?;
    let b = beta.value();
    let r = model.rho;
    let (v1, v2) = (model.a.sigma2, model.b.sigma2);
    let one = 1.0 - r * r;
    let k = (2.0 * PI).powf(b) * (v1 * v2).powf(b / 2.0);

    let fb = (b * bivariate_log_density(y1, y2, model)).exp();
    let u = rho_score(y1, y2, model);
    let i1 = r * b / (k * one.powf(1.0 + b / 2.0) * (1.0 + b).powi(2));
    let var_part = if_variance(y1, &model.a, beta)? / v1 + if_variance(y2, &model.b, beta)? / v2;
    let ia = -r * (1.0 + b * b) / (2.0 * k * one.powf(1.0 + b / 2.0) * (1.0 + b).powi(3)) * var_part;
    let r2 = r * r;
    let ib = (r2 + (1.0 - 3.0 * r2 * r2 + 2.0 * r2 * r2 * r2) / (one * one * (1.0 + b).powi(2)) - 2.0 * r2 / (1.0 + b))
        / (k * one.powf(2.0 + b / 2.0) * (1.0 + b));
    Ok((fb * u - i1 - ia) / ib)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IfTarget {
    /// Mean of component 1 or 2.
    Mean(u8),
    Variance(u8),
    Correlation,
}

impl std::str::FromStr for IfTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "mean" | "mean1" => IfTarget::Mean(1),
            "mean2" => IfTarget::Mean(2),
            "variance" | "variance1" | "var" | "var1" => IfTarget::Variance(1),
            "variance2" | "var2" => IfTarget::Variance(2),
            "correlation" | "rho" => IfTarget::Correlation,
            other => return Err(Error::Invalid(format!("unknown influence target '{other}'"))),
        })
    }
}

impl IfTarget {
    pub fn is_bivariate(self) -> bool {
        matches!(self, IfTarget::Correlation)
    }
}

/// Equispaced points `lo, …, hi` (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        let g = GridSpec { lo, hi, points };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Invalid("grid has no points".into()));
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.hi < self.lo {
            return Err(Error::Invalid(format!("bad grid range [{}, {}]", self.lo, self.hi)));
        }
        if self.points > 1 && self.hi == self.lo {
            return Err(Error::Invalid("grid range is empty".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| if i + 1 == self.points { self.hi } else { self.lo + i as f64 * step })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfluencePoint {
    pub y1: f64,
    /// Unused (NaN) for the marginal targets.
    pub y2: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceGrid {
    pub target: IfTarget,
    pub beta: TuningBeta,
    pub model: PairParams,
    pub points: Vec<InfluencePoint>,
}

impl InfluenceGrid {
    pub fn max_abs(&self) -> f64 {
        self.points.iter().map(|p| p.value.abs()).fold(0.0, f64::max)
    }

    /// Point with the largest |IF|.
    pub fn argmax_abs(&self) -> Option<InfluencePoint> {
        self.points.iter().copied().max_by(|a, b| a.value.abs().total_cmp(&b.value.abs()))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        if self.target.is_bivariate() {
            s.push_str("y1,y2,if\n");
            for p in &self.points {
                let _ = writeln!(s, "{},{},{}", sig12(p.y1), sig12(p.y2), sig12(p.value));
            }
        } else {
            s.push_str("y,if\n");
            for p in &self.points {
                let _ = writeln!(s, "{},{}", sig12(p.y1), sig12(p.value));
            }
        }
        s
    }
}

/// Evaluate an influence function over a 1-D (marginal targets) or 2-D
/// (correlation) grid. Rows of the 2-D grid vary `y2` fastest.
pub fn influence_grid(target: IfTarget, model: &PairParams, beta: TuningBeta, grid: &GridSpec) -> Result<InfluenceGrid> {
    model.validate()?;
    grid.validate()?;
    let ys = grid.values();
    let points: Vec<InfluencePoint> = match target {
        IfTarget::Mean(c) | IfTarget::Variance(c) => {
            let m = match c {
                1 => model.a,
                2 => model.b,
                _ => return Err(Error::Invalid(format!("component must be 1 or 2, got {c}"))),
            };
            let f = if matches!(target, IfTarget::Mean(_)) { if_mean } else { if_variance };
            ys.iter()
                .map(|&y| Ok(InfluencePoint { y1: y, y2: f64::NAN, value: f(y, &m, beta)? }))
                .collect::<Result<_>>()?
        }
        IfTarget::Correlation => ys
            .par_iter()
            .flat_map_iter(|&y1| ys.iter().map(move |&y2| (y1, y2)))
            .map(|(y1, y2)| Ok(InfluencePoint { y1, y2, value: if_correlation(y1, y2, model, beta)? }))
            .collect::<Result<_>>()?,
    };
    Ok(InfluenceGrid { target, beta, model: *model, points })
}

// ---------------------------------------------------------------------------
// asymptotic variances

/// Asymptotic variance of `√n μ̂ⱼ` for the sequential estimator.
pub fn smdpde_mean_avar(beta: TuningBeta, sigma2: f64) -> f64 {
    let b = beta.value();
    (1.0 + b * b / (1.0 + 2.0 * b)).powf(1.5) * sigma2
}

/// Asymptotic variance of `√n μ̂ⱼ` for the simultaneous MDPDE.
pub fn mdpde_mean_avar(beta: TuningBeta, sigma2: f64) -> f64 {
    let b = beta.value();
    (1.0 + b * b / (1.0 + 2.0 * b)).powi(2) * sigma2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AvarMethod {
    Smdpde,
    Mdpde,
}

/// Sandwich pieces for `(σ₁², σ₂², ρ)` and the variances they imply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymVarReport {
    pub method: AvarMethod,
    /// B for the sequential estimator, J for the simultaneous one.
    pub bread: Matrix3<f64>,
    /// Γ₀ or K.
    pub meat: Matrix3<f64>,
    pub covariance: Matrix3<f64>,
    pub var_sigma2_1: f64,
    pub var_sigma2_2: f64,
    pub var_rho: f64,
    pub var_mean_1: f64,
    pub var_mean_2: f64,
    /// 2-norm condition number of the bread matrix.
    pub condition: f64,
}

fn check_block_args(beta: TuningBeta, sigma1: f64, sigma2: f64, rho: f64) -> Result<f64> {
    for s in [sigma1, sigma2] {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::NonPositiveVariance(s));
        }
    }
    if !(rho.is_finite() && rho.abs() < 1.0) {
        return Err(Error::SingularCorrelation(rho));
    }
    Ok(beta.value())
}

fn sandwich(
    method: AvarMethod,
    name: &'static str,
    bread: Matrix3<f64>,
    meat: Matrix3<f64>,
    beta: TuningBeta,
    sigma1: f64,
    sigma2: f64,
) -> Result<AsymVarReport> {
    let sv = bread.singular_values();
    let condition = sv.max() / sv.min();
    if !(condition.is_finite() && condition < MAX_CONDITION) {
        return Err(Error::SingularMatrix { name, condition });
    }
    let lu = bread.lu();
    let left = lu.solve(&meat).ok_or(Error::SingularMatrix { name, condition })?;
    let covariance = lu.solve(&left.transpose()).ok_or(Error::SingularMatrix { name, condition })?;
    let mean_avar = match method {
        AvarMethod::Smdpde => smdpde_mean_avar,
        AvarMethod::Mdpde => mdpde_mean_avar,
    };
    Ok(AsymVarReport {
        method,
        bread,
        meat,
        covariance,
        var_sigma2_1: covariance[(0, 0)],
        var_sigma2_2: covariance[(1, 1)],
        var_rho: covariance[(2, 2)],
        var_mean_1: mean_avar(beta, sigma1 * sigma1),
        var_mean_2: mean_avar(beta, sigma2 * sigma2),
        condition,
    })
}

/// Sandwich `B⁻¹Γ₀B⁻ᵀ` for `(σ₁², σ₂², ρ)` of the sequential estimator.
/// `sigma1`, `sigma2` are standard deviations.
pub fn smdpde_block_avar(beta: TuningBeta, sigma1: f64, sigma2: f64, rho: f64) -> Result<AsymVarReport> {
    let b = check_block_args(beta, sigma1, sigma2, rho)?;
    let (s1, s2, r) = (sigma1, sigma2, rho);
    let tp = 2.0 * PI;
    let one = 1.0 - r * r;
    let r2 = r * r;
    let r4 = r2 * r2;
    let r6 = r4 * r2;

    let d = |s: f64| (b * b + 2.0) / (4.0 * tp.powf(b / 2.0) * (1.0 + b).powf(1.5) * s.powf(b + 4.0));
    let (d22, d44) = (d(s1), d(s2));
    let e12 = r * (1.0 + b * b) + r * b * (1.0 - b - (2.0 * r4 - 4.0 * r2 + 2.0) / ((1.0 + b) * one * one));
    let ce = (s1 * s2).powf(b) * tp.powf(b) * one.powf(1.0 + b / 2.0) * (1.0 + b);
    let e1 = -e12 / (2.0 * s1 * s1 * ce);
    let e2 = -e12 / (2.0 * s2 * s2 * ce);
    let f = 1.0 + r2 * (1.0 + b) - b * (2.0 * r6 - 3.0 * r4 + 1.0) / ((1.0 + b) * one * one);
    let a = f / ((s1 * s2).powf(b) * tp.powf(b) * one.powf(2.0 + b / 2.0) * (1.0 + b));
    #[rustfmt::skip]
    let bread = Matrix3::new(
        d22, 0.0, 0.0,
        0.0, d44, 0.0,
        e1,  e2,  a,
    );

    let q = 1.0 + 2.0 * b;
    let g22 = q.powf(-0.5) * (0.5 + 1.5 / (q * q) - 1.0 / q) - b * b / (2.0 * (1.0 + b).powi(3));
    let gv = |s: f64| (1.0 + b).powi(2) * g22 / (2.0 * tp.powf(b) * s.powf(2.0 * b + 4.0));
    let (gam22, gam44) = (gv(s1), gv(s2));
    let dd = (1.0 + b).powi(2) - (b * r).powi(2);
    let g24 = dd.powf(-0.5) * ((1.0 - (1.0 + b * one) / dd).powi(2) + 2.0 * r2 / (dd * dd)) - b * b / (1.0 + b).powi(3);
    let gam24 = (1.0 + b).powi(2) * g24 / (4.0 * tp.powf(b) * (s1 * s2).powf(b + 2.0));
    let kk = 1.0 - 2.0 * (1.0 + b).powi(2) / q.powf(1.5);
    let cross = |sa: f64, sb: f64| {
        b * b * r / (2.0 * tp.powf(1.5 * b) * sa.powf(2.0 * b + 2.0) * sb.powf(b) * one.powf(1.0 + b / 2.0) * (1.0 + b).powf(1.5))
            * kk
    };
    let (gam25, gam45) = (cross(s1, s2), cross(s2, s1));
    let g55 = r2 / q + (1.0 - 3.0 * r4 + 2.0 * r6) / (one * one * q.powi(3)) - 2.0 * r2 / (q * q) - b * b * r2 / (1.0 + b).powi(4);
    let gam55 = (1.0 + b).powi(2) * g55 / (tp.powf(2.0 * b) * (s1 * s2).powf(2.0 * b) * one.powf(b + 2.0));
    #[rustfmt::skip]
    let meat = Matrix3::new(
        gam22, gam24, gam25,
        gam24, gam44, gam45,
        gam25, gam45, gam55,
    );
    sandwich(AvarMethod::Smdpde, "B", bread, meat, beta, sigma1, sigma2)
}

/// Sandwich `J⁻¹KJ⁻¹` for `(σ₁², σ₂², ρ)` of the simultaneous MDPDE.
pub fn mdpde_block_avar(beta: TuningBeta, sigma1: f64, sigma2: f64, rho: f64) -> Result<AsymVarReport> {
    let b = check_block_args(beta, sigma1, sigma2, rho)?;
    let (s1, s2, r) = (sigma1, sigma2, rho);
    let tp = 2.0 * PI;
    let one = 1.0 - r * r;
    let r2 = r * r;
    let r4 = r2 * r2;
    let r6 = r4 * r2;
    let ps = (s1 * s2).powf(b);

    let c = tp.powf(b) * ps * one.powf(b / 2.0);
    let jd = |s: f64| (b * b + (2.0 - r2) / one) / (4.0 * s.powi(4) * c * (1.0 + b).powi(2));
    let (j22, j44) = (jd(s1), jd(s2));
    let j55 = (r2 * (1.0 + b) + (2.0 * r6 - 3.0 * r4 + 1.0) / ((1.0 + b) * one * one) - 2.0 * r2)
        / (ps * tp.powf(b) * one.powf(2.0 + b / 2.0) * (1.0 + b));
    let j24 = (1.0 - 2.0 / (1.0 + b) + (1.0 - 2.0 * r2) / (one * (1.0 + b).powi(2)))
        / (4.0 * (s1 * s2).powf(b + 2.0) * tp.powf(b) * one.powf(b / 2.0));
    let jc = |s: f64| r * (1.0 - b - 2.0 / (1.0 + b)) / (2.0 * s * s * ps * tp.powf(b) * one.powf(1.0 + b / 2.0) * (1.0 + b));
    let (j25, j45) = (jc(s1), jc(s2));
    #[rustfmt::skip]
    let bread = Matrix3::new(
        j22, j24, j25,
        j24, j44, j45,
        j25, j45, j55,
    );

    let q = 1.0 + 2.0 * b;
    let cc = tp.powf(2.0 * b) * (s1 * s2).powf(2.0 * b) * one.powf(b);
    let lead = (1.0 + b).powi(2) / q.powi(3);
    let tail = (b / (1.0 + b)).powi(2);
    let kd = |s: f64| (lead * (4.0 * b * b + (2.0 - r2) / one) - tail) / (4.0 * s.powi(4) * cc);
    let (k22, k44) = (kd(s1), kd(s2));
    let g55 = r2 / q + (1.0 - 3.0 * r4 + 2.0 * r6) / (one * one * q.powi(3)) - 2.0 * r2 / (q * q) - b * b * r2 / (1.0 + b).powi(4);
    let k55 = (1.0 + b).powi(2) * g55 / (tp.powf(2.0 * b) * (s1 * s2).powf(2.0 * b) * one.powf(2.0 + b));
    let k24 = (lead * (4.0 * b * b - r2 / one) - tail) / (4.0 * s1 * s1 * s2 * s2 * cc);
    let kk = (1.0 + b).powi(2) / (q * q) * (1.0 - 2.0 * b - 2.0 / q) + tail;
    let kc = |s: f64| r * kk / (2.0 * s * s * cc * one);
    let (k25, k45) = (kc(s1), kc(s2));
    #[rustfmt::skip]
    let meat = Matrix3::new(
        k22, k24, k25,
        k24, k44, k45,
        k25, k45, k55,
    );
    sandwich(AvarMethod::Mdpde, "J", bread, meat, beta, sigma1, sigma2)
}

// ---------------------------------------------------------------------------
// relative efficiencies

/// Mean ARE in percent, `(sequential, simultaneous)`.
pub fn are_mean(beta: TuningBeta) -> (f64, f64) {
    (100.0 / smdpde_mean_avar(beta, 1.0), 100.0 / mdpde_mean_avar(beta, 1.0))
}

/// Variance ARE in percent. Does not depend on ρ; evaluated at ρ = 0.
pub fn are_variance(beta: TuningBeta) -> Result<(f64, f64)> {
    let s = smdpde_block_avar(beta, 1.0, 1.0, 0.0)?;
    let m = mdpde_block_avar(beta, 1.0, 1.0, 0.0)?;
    Ok((200.0 / s.var_sigma2_1, 200.0 / m.var_sigma2_1))
}

/// Correlation ARE in percent.
pub fn are_correlation(beta: TuningBeta, rho: f64) -> Result<(f64, f64)> {
    let s = smdpde_block_avar(beta, 1.0, 1.0, rho)?;
    let m = mdpde_block_avar(beta, 1.0, 1.0, rho)?;
    let mle = (1.0 - rho * rho).powi(2);
    Ok((100.0 * mle / s.var_rho, 100.0 * mle / m.var_rho))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreRow {
    pub beta: f64,
    pub mean_smdpde: f64,
    pub mean_mdpde: f64,
    pub variance_smdpde: f64,
    pub variance_mdpde: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreCell {
    pub beta: f64,
    pub rho: f64,
    pub smdpde: f64,
    pub mdpde: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreTables {
    pub betas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub location_scale: Vec<AreRow>,
    /// `betas.len() × rhos.len()`, row-major by β.
    pub correlation: Vec<AreCell>,
}

impl AreTables {
    pub fn cell(&self, bi: usize, ri: usize) -> &AreCell {
        &self.correlation[bi * self.rhos.len() + ri]
    }

    /// Mean and variance efficiencies, one row per β.
    pub fn location_scale_csv(&self) -> String {
        let mut s = String::from("beta,mean_smdpde,mean_mdpde,variance_smdpde,variance_mdpde\n");
        for r in &self.location_scale {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                sig12(r.beta),
                sig12(r.mean_smdpde),
                sig12(r.mean_mdpde),
                sig12(r.variance_smdpde),
                sig12(r.variance_mdpde)
            );
        }
        s
    }

    /// Correlation efficiencies in the printed-table layout: one row per β,
    /// one column per ρ, each cell `SMDPDE (MDPDE)` to three decimals.
    pub fn correlation_csv(&self) -> String {
        let mut s = String::from("beta");
        for r in &self.rhos {
            let _ = write!(s, ",rho={}", sig12(*r));
        }
        s.push('\n');
        for (bi, b) in self.betas.iter().enumerate() {
            s.push_str(&sig12(*b));
            for ri in 0..self.rhos.len() {
                let c = self.cell(bi, ri);
                let _ = write!(s, ",{:.3} ({:.3})", c.smdpde, c.mdpde);
            }
            s.push('\n');
        }
        s
    }

    /// One line per (β, ρ) at full precision.
    pub fn correlation_long_csv(&self) -> String {
        let mut s = String::from("beta,rho,smdpde,mdpde\n");
        for c in &self.correlation {
            let _ = writeln!(s, "{},{},{},{}", sig12(c.beta), sig12(c.rho), sig12(c.smdpde), sig12(c.mdpde));
        }
        s
    }
}

/// Efficiency tables over a β grid and a ρ grid.
pub fn are_tables(betas: &[f64], rhos: &[f64]) -> Result<AreTables> {
    if betas.is_empty() || rhos.is_empty() {
        return Err(Error::Invalid("ARE grids must be non-empty".into()));
    }
    let tb: Vec<TuningBeta> = betas.iter().map(|&b| TuningBeta::new(b)).collect::<Result<_>>()?;
    if let Some(&r) = rhos.iter().find(|r| !(r.abs() < 1.0)) {
        return Err(Error::SingularCorrelation(r));
    }
    let location_scale = tb
        .iter()
        .map(|&b| {
            let (mean_smdpde, mean_mdpde) = are_mean(b);
            let (variance_smdpde, variance_mdpde) = are_variance(b)?;
            Ok(AreRow { beta: b.value(), mean_smdpde, mean_mdpde, variance_smdpde, variance_mdpde })
        })
        .collect::<Result<_>>()?;
    let mut correlation = Vec::with_capacity(betas.len() * rhos.len());
    for &b in &tb {
        for &rho in rhos {
            let (smdpde, mdpde) = are_correlation(b, rho)?;
            correlation.push(AreCell { beta: b.value(), rho, smdpde, mdpde });
        }
    }
    Ok(AreTables { betas: betas.to_vec(), rhos: rhos.to_vec(), location_scale, correlation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tb(v: f64) -> TuningBeta {
        TuningBeta::new(v).unwrap()
    }

    #[test]
    fn mle_limits() {
        for &rho in &[-0.6, 0.0, 0.45] {
            let s = smdpde_block_avar(TuningBeta::MLE, 1.0, 1.0, rho).unwrap();
            let m = mdpde_block_avar(TuningBeta::MLE, 1.0, 1.0, rho).unwrap();
            let want = (1.0 - rho * rho).powi(2);
            assert!((s.var_sigma2_1 - 2.0).abs() < 1e-12);
            assert!((s.var_rho - want).abs() < 1e-12);
            assert!((m.var_sigma2_2 - 2.0).abs() < 1e-12);
            assert!((m.var_rho - want).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_if_at_zero_beta() {
        let m = MarginalParams::standard();
        assert_eq!(if_mean(2.0, &m, TuningBeta::MLE).unwrap(), -2.0);
        assert_eq!(if_mean(0.0, &m, tb(0.4)).unwrap(), 0.0);
    }

    #[test]
    fn variance_if_at_zero_beta() {
        let m = MarginalParams::new(0.5, 2.0).unwrap();
        for &y in &[-3.0, 0.0, 1.0, 7.5] {
            let v = if_variance(y, &m, TuningBeta::MLE).unwrap();
            assert!((v - ((y - 0.5) * (y - 0.5) - 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_if_at_centre() {
        let model = PairParams::new(MarginalParams::new(1.0, 4.0).unwrap(), MarginalParams::new(4.0, 9.0).unwrap(), 0.5).unwrap();
        assert!((rho_score(1.0, 4.0, &model) - 0.5 / 0.75).abs() < 1e-15);
        assert!(if_correlation(1.0, 4.0, &model, tb(0.3)).unwrap().is_finite());
    }

    #[test]
    fn grid_values_hit_endpoints() {
        let g = GridSpec::new(-2.0, 3.0, 11).unwrap().values();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], -2.0);
        assert_eq!(g[10], 3.0);
        assert!(GridSpec::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn singular_rho_rejected() {
        assert!(matches!(smdpde_block_avar(tb(0.2), 1.0, 1.0, 1.0), Err(Error::SingularCorrelation(_))));
        assert!(are_tables(&[0.1], &[0.2, -1.0]).is_err());
        assert!(are_tables(&[], &[0.2]).is_err());
    }
}
