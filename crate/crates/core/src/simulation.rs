//! Data generation, contamination schemes and the Monte-Carlo driver that
//! compares estimators by bias, MSE and convergence rate.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{estimate, EstimateConfig, LocationScatterEstimate};
use crate::baseline::{fit_mdpde, fit_mle, MdpdeFitResult};
use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::fmt::sig12;
use crate::model::TuningBeta;

pub const DEFAULT_REPLICATIONS: usize = 20;

// ---------------------------------------------------------------------------
// generators

/// Block-banded covariance: the leading `⌊p/2⌋` block has entries `ρ^|i−j|`,
/// the rest is the identity. For `p = 2` the result is `[[1, ρ], [ρ, 1]]`.
pub fn gen_block_banded(p: usize, rho: f64) -> Result<DMatrix<f64>> {
    if p < 2 {
        return Err(Error::Invalid(format!("block-banded covariance needs p >= 2, got {p}")));
    }
    if !(rho.abs() <= 1.0) {
        return Err(Error::Invalid(format!("block-banded rho must lie in [-1, 1], got {rho}")));
    }
    let p1 = if p == 2 { 2 } else { p / 2 };
    Ok(DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            1.0
        } else if i < p1 && j < p1 {
            rho.powi(i.abs_diff(j) as i32)
        } else {
            0.0
        }
    }))
}

fn cholesky_factor(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !sigma.is_square() {
        return Err(Error::Invalid("covariance matrix must be square".into()));
    }
    sigma.clone().cholesky().map(|c| c.l()).ok_or(Error::NotPositiveDefinite)
}

/// Fill `rows` of `out` (column-major n×p) with `mu + L z`.
fn fill_normal(rng: &mut ChaCha8Rng, out: &mut DMatrix<f64>, row: usize, mu: &DVector<f64>, l: &DMatrix<f64>) {
    let p = mu.len();
    let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let x = l * z + mu;
    for j in 0..p {
        out[(row, j)] = x[j];
    }
}

/// `n` draws from `N(mu, sigma)`, reproducible from `seed`.
pub fn sample_mvn(n: usize, mu: &DVector<f64>, sigma: &DMatrix<f64>, seed: u64) -> Result<DataMatrix> {
    if mu.len() != sigma.nrows() {
        return Err(Error::LengthMismatch { left: mu.len(), right: sigma.nrows() });
    }
    let l = cholesky_factor(sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(n, mu.len());
    for i in 0..n {
        fill_normal(&mut rng, &mut out, i, mu, &l);
    }
    DataMatrix::from_matrix(&out)
}

/// A contaminated sample with the true outlier labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Contaminated {
    pub data: DataMatrix,
    pub outlier: Vec<bool>,
}

/// Rows drawn from `N(0, sigma)` with probability `1 − eps`, otherwise from
/// `N(shift·1, I)`.
pub fn contaminate_casewise(n: usize, p: usize, eps: f64, shift: f64, sigma: &DMatrix<f64>, seed: u64) -> Result<Contaminated> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Invalid(format!("contamination fraction must lie in [0, 1], got {eps}")));
    }
    if sigma.nrows() != p {
        return Err(Error::LengthMismatch { left: p, right: sigma.nrows() });
    }
    let l = cholesky_factor(sigma)?;
    let ident = DMatrix::identity(p, p);
    let zero = DVector::zeros(p);
    let far = DVector::from_element(p, shift);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(n, p);
    let mut outlier = Vec::with_capacity(n);
    for i in 0..n {
        let bad = rng.random::<f64>() < eps;
        if bad {
            fill_normal(&mut rng, &mut out, i, &far, &ident);
        } else {
            fill_normal(&mut rng, &mut out, i, &zero, &l);
        }
        outlier.push(bad);
    }
    Ok(Contaminated { data: DataMatrix::from_matrix(&out)?, outlier })
}

/// Cellwise design: `clean` rows from `N(0, I_p)` followed, for each axis `i`,
/// by `per_axis` rows from `N(shift·eᵢ, I_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellwiseDesign {
    pub clean: usize,
    pub per_axis: usize,
    pub shift: f64,
}

impl Default for CellwiseDesign {
    fn default() -> Self {
        CellwiseDesign { clean: 600, per_axis: 100, shift: 5.0 }
    }
}

impl CellwiseDesign {
    pub fn rows(&self, p: usize) -> usize {
        self.clean + p * self.per_axis
    }
}

pub fn cellwise_sample(design: &CellwiseDesign, p: usize, seed: u64) -> Result<Contaminated> {
    if p == 0 {
        return Err(Error::Invalid("cellwise design needs p >= 1".into()));
    }
    let n = design.rows(p);
    let ident = DMatrix::identity(p, p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DMatrix::zeros(n, p);
    let mut outlier = vec![false; n];
    let zero = DVector::zeros(p);
    for i in 0..design.clean {
        fill_normal(&mut rng, &mut out, i, &zero, &ident);
    }
    for axis in 0..p {
        let mut mu = DVector::zeros(p);
        mu[axis] = design.shift;
        for r in 0..design.per_axis {
            let i = design.clean + axis * design.per_axis + r;
            fill_normal(&mut rng, &mut out, i, &mu, &ident);
            outlier[i] = true;
        }
    }
    Ok(Contaminated { data: DataMatrix::from_matrix(&out)?, outlier })
}

/// The 1000 × 4 design: 600 clean rows and four blocks of 100 shifted by 5 along one axis.
pub fn contaminate_cellwise(seed: u64) -> Result<DataMatrix> {
    Ok(cellwise_sample(&CellwiseDesign::default(), 4, seed)?.data)
}

// ---------------------------------------------------------------------------
// metrics

/// Anything that yields a location vector and scatter matrix.
pub trait LocationScatter {
    fn location(&self) -> &DVector<f64>;
    fn scatter(&self) -> &DMatrix<f64>;
}

impl LocationScatter for LocationScatterEstimate {
    fn location(&self) -> &DVector<f64> {
        &self.mu_hat
    }
    fn scatter(&self) -> &DMatrix<f64> {
        &self.sigma_hat
    }
}

impl LocationScatter for MdpdeFitResult {
    fn location(&self) -> &DVector<f64> {
        &self.mu_hat
    }
    fn scatter(&self) -> &DMatrix<f64> {
        &self.sigma_hat
    }
}

impl LocationScatter for (DVector<f64>, DMatrix<f64>) {
    fn location(&self) -> &DVector<f64> {
        &self.0
    }
    fn scatter(&self) -> &DMatrix<f64> {
        &self.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// `‖mean(μ̂) − μ‖₂`
    pub bias_location: f64,
    /// `mean ‖μ̂ − μ‖₂²`
    pub mse_location: f64,
    /// `‖mean(Σ̂) − Σ‖_F`
    pub bias_scatter: f64,
    /// `mean ‖Σ̂ − Σ‖_F²`
    pub mse_scatter: f64,
}

pub fn bias_mse<E: LocationScatter>(estimates: &[E], mu: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<Metrics> {
    if estimates.is_empty() {
        return Err(Error::Invalid("no estimates to summarise".into()));
    }
    let p = mu.len();
    if sigma.shape() != (p, p) {
        return Err(Error::LengthMismatch { left: p, right: sigma.nrows() });
    }
    let m = estimates.len() as f64;
    let mut mean_mu = DVector::zeros(p);
    let mut mean_sigma = DMatrix::zeros(p, p);
    let (mut mse_l, mut mse_s) = (0.0, 0.0);
    for e in estimates {
        let (l, s) = (e.location(), e.scatter());
        if l.len() != p || s.shape() != (p, p) {
            return Err(Error::LengthMismatch { left: p, right: l.len() });
        }
        mean_mu += l;
        mean_sigma += s;
        mse_l += (l - mu).norm_squared();
        mse_s += (s - sigma).norm_squared();
    }
    mean_mu /= m;
    mean_sigma /= m;
    Ok(Metrics {
        bias_location: (mean_mu - mu).norm(),
        mse_location: mse_l / m,
        bias_scatter: (mean_sigma - sigma).norm(),
        mse_scatter: mse_s / m,
    })
}

// ---------------------------------------------------------------------------
// scenarios

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaKind {
    Identity,
    BlockBanded {
        #[serde(default = "default_banded_rho")]
        rho: f64,
    },
    Custom {
        matrix: Vec<Vec<f64>>,
    },
}

fn default_banded_rho() -> f64 {
    0.7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Contamination {
    None,
    Casewise { eps: f64, shift: f64 },
    Cellwise { clean_count: usize, per_axis_count: usize, shift: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase", deny_unknown_fields)]
pub enum Method {
    Mle,
    Smdpde { beta: f64 },
    Mdpde { beta: f64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Mle => "mle",
            Method::Smdpde { .. } => "smdpde",
            Method::Mdpde { .. } => "mdpde",
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Method::Mle => 0.0,
            Method::Smdpde { beta } | Method::Mdpde { beta } => beta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    pub sigma: SigmaKind,
    #[serde(default = "default_contamination")]
    pub contamination: Contamination,
    #[serde(default = "default_replications")]
    pub replications: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
}

fn default_contamination() -> Contamination {
    Contamination::None
}

fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

fn invalid(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{key}: {msg}"))
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(invalid("p", "must be at least 1"));
        }
        if self.n < 2 {
            return Err(invalid("n", "must be at least 2"));
        }
        if self.replications == 0 {
            return Err(invalid("replications", "must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(invalid("methods", "at least one method is required"));
        }
        for m in &self.methods {
            TuningBeta::new(m.beta()).map_err(|e| invalid("methods.beta", e))?;
        }
        match &self.sigma {
            SigmaKind::BlockBanded { rho } => {
                if self.p < 2 {
                    return Err(invalid("sigma", "block_banded requires p >= 2"));
                }
                if !(rho.abs() < 1.0) {
                    return Err(invalid("sigma.rho", format!("must lie in (-1, 1), got {rho}")));
                }
            }
            SigmaKind::Custom { matrix } => {
                if matrix.len() != self.p || matrix.iter().any(|r| r.len() != self.p) {
                    return Err(invalid("sigma.matrix", format!("must be {0} x {0}", self.p)));
                }
            }
            SigmaKind::Identity => {}
        }
        match self.contamination {
            Contamination::None => {}
            Contamination::Casewise { eps, shift } => {
                if !(0.0..1.0).contains(&eps) {
                    return Err(invalid("contamination.eps", format!("must lie in [0, 1), got {eps}")));
                }
                if !shift.is_finite() {
                    return Err(invalid("contamination.shift", "must be finite"));
                }
            }
            Contamination::Cellwise { clean_count, per_axis_count, shift } => {
                if clean_count + self.p * per_axis_count != self.n {
                    return Err(invalid(
                        "contamination",
                        format!(
                            "clean_count + p * per_axis_count = {} does not match n = {}",
                            clean_count + self.p * per_axis_count,
                            self.n
                        ),
                    ));
                }
                if !shift.is_finite() {
                    return Err(invalid("contamination.shift", "must be finite"));
                }
            }
        }
        let sigma = self.true_sigma()?;
        if sigma.clone().cholesky().is_none() {
            return Err(invalid("sigma", "covariance is not positive definite"));
        }
        Ok(())
    }

    /// Covariance of the uncontaminated component.
    pub fn true_sigma(&self) -> Result<DMatrix<f64>> {
        match &self.sigma {
            SigmaKind::Identity => Ok(DMatrix::identity(self.p, self.p)),
            SigmaKind::BlockBanded { rho } => gen_block_banded(self.p, *rho),
            SigmaKind::Custom { matrix } => {
                let m = DMatrix::from_fn(self.p, self.p, |i, j| matrix[i][j]);
                if (&m - m.transpose()).amax() > 1e-12 {
                    return Err(invalid("sigma.matrix", "must be symmetric"));
                }
                Ok(m)
            }
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Contaminated> {
        let sigma = self.true_sigma()?;
        match self.contamination {
            Contamination::None => {
                let data = sample_mvn(self.n, &DVector::zeros(self.p), &sigma, seed)?;
                Ok(Contaminated { data, outlier: vec![false; self.n] })
            }
            Contamination::Casewise { eps, shift } => contaminate_casewise(self.n, self.p, eps, shift, &sigma, seed),
            Contamination::Cellwise { clean_count, per_axis_count, shift } => {
                cellwise_sample(&CellwiseDesign { clean: clean_count, per_axis: per_axis_count, shift }, self.p, seed)
            }
        }
    }
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `r`: `splitmix64(seed ^ splitmix64(r))`.
pub fn replication_seed(seed: u64, r: usize) -> u64 {
    splitmix64(seed ^ splitmix64(r as u64))
}

/// Outcome of one method on one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub converged: bool,
    pub pd_corrected: bool,
    pub mu_hat: DVector<f64>,
    pub sigma_hat: DMatrix<f64>,
}

pub fn fit_method(method: &Method, data: &DataMatrix) -> Option<FitOutcome> {
    match *method {
        Method::Mle => {
            let f = fit_mle(data);
            Some(FitOutcome { converged: f.converged, pd_corrected: false, mu_hat: f.mu_hat, sigma_hat: f.sigma_hat })
        }
        Method::Smdpde { beta } => {
            let e = estimate(data, TuningBeta::new(beta).ok()?, &EstimateConfig::default()).ok()?;
            Some(FitOutcome { converged: e.converged(), pd_corrected: e.pd_corrected, mu_hat: e.mu_hat, sigma_hat: e.sigma_hat })
        }
        Method::Mdpde { beta } => {
            let f = fit_mdpde(data, TuningBeta::new(beta).ok()?, &Default::default()).ok()?;
            Some(FitOutcome { converged: f.converged, pd_corrected: false, mu_hat: f.mu_hat, sigma_hat: f.sigma_hat })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: Method,
    pub name: String,
    pub beta: f64,
    pub attempted: usize,
    pub converged: usize,
    pub convergence_rate: f64,
    /// Fraction of converged fits whose correlation matrix needed PD repair.
    pub pd_corrected_rate: f64,
    /// `None` when no replication converged.
    pub metrics: Option<Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: ScenarioConfig,
    pub methods: Vec<MethodReport>,
    pub wall_time_secs: f64,
    pub not_compared: Vec<String>,
}

impl SimReport {
    /// One line per method; metrics of methods that never converged are empty.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("method,beta,bias_loc,mse_loc,bias_scatter,mse_scatter,conv_rate\n");
        for m in &self.methods {
            let cells = match m.metrics {
                Some(x) => [x.bias_location, x.mse_location, x.bias_scatter, x.mse_scatter].map(sig12),
                None => Default::default(),
            };
            s.push_str(&format!("{},{},{},{}\n", m.name, sig12(m.beta), cells.join(","), sig12(m.convergence_rate)));
        }
        s
    }

    pub fn method(&self, method: &Method) -> Option<&MethodReport> {
        self.methods.iter().find(|m| &m.method == method)
    }
}

/// Run every replication of a scenario and summarise each method.
///
/// Replications run in parallel; each uses [`replication_seed`] so results
/// do not depend on scheduling. Non-converged fits count against the
/// convergence rate and are left out of the metrics.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimReport> {
    cfg.validate()?;
    let started = Instant::now();
    let sigma = cfg.true_sigma()?;
    let mu = DVector::zeros(cfg.p);

    let outcomes: Vec<Vec<Option<FitOutcome>>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let sample = cfg.generate(replication_seed(cfg.seed, r))?;
            Ok(cfg.methods.iter().map(|m| fit_method(m, &sample.data)).collect())
        })
        .collect::<Result<_>>()?;

    let mut methods = Vec::with_capacity(cfg.methods.len());
    for (k, method) in cfg.methods.iter().enumerate() {
        let good: Vec<(DVector<f64>, DMatrix<f64>)> = outcomes
            .iter()
            .filter_map(|row| row[k].as_ref())
            .filter(|o| o.converged)
            .map(|o| (o.mu_hat.clone(), o.sigma_hat.clone()))
            .collect();
        let corrected = outcomes.iter().filter_map(|row| row[k].as_ref()).filter(|o| o.converged && o.pd_corrected).count();
        let converged = good.len();
        methods.push(MethodReport {
            method: *method,
            name: method.name().to_string(),
            beta: method.beta(),
            attempted: cfg.replications,
            converged,
            convergence_rate: converged as f64 / cfg.replications as f64,
            pd_corrected_rate: if converged == 0 { 0.0 } else { corrected as f64 / converged as f64 },
            metrics: if good.is_empty() { None } else { Some(bias_mse(&good, &mu, &sigma)?) },
        });
    }

    Ok(SimReport {
        config: cfg.clone(),
        methods,
        wall_time_secs: started.elapsed().as_secs_f64(),
        not_compared: ["MCD", "MVE", "GK", "MM", "S"].iter().map(|s| s.to_string()).collect(),
    })
}
