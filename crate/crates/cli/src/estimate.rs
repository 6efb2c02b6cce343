use std::path::PathBuf;

use clap::Args;
use nalgebra::DMatrix;
use serde::Serialize;
use smdpde::{estimate, EstimateConfig, PdPolicy, TuningBeta};

use crate::error::{CliError, CliResult};
use crate::input::{read_csv, select};
use crate::write_output;

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// Input CSV, one observation per row
    pub input: PathBuf,
    /// Tuning parameter in [0, 1]; 0 gives the MLE
    #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
    pub beta: f64,
    /// Repair of the pairwise correlation matrix
    #[arg(long, default_value = "auto")]
    pub pd_policy: PdPolicy,
    /// First line of the CSV holds column names
    #[arg(long)]
    pub header: bool,
    /// Columns to use: names (with --header) or 0-based indices, comma separated
    #[arg(long)]
    pub columns: Option<String>,
    /// Write the JSON here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Serialize)]
struct MarginalTelemetry {
    column: String,
    iterations: usize,
    converged: bool,
    final_step_norm: f64,
    objective: f64,
}

#[derive(Serialize)]
struct PairTelemetry {
    j: usize,
    k: usize,
    rho_raw: f64,
    evaluations: usize,
    converged: bool,
    at_boundary: bool,
}

#[derive(Serialize)]
struct Telemetry {
    converged: bool,
    marginals: Vec<MarginalTelemetry>,
    pairs: Vec<PairTelemetry>,
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct EstimateReport {
    schema_version: u32,
    beta: f64,
    n: usize,
    p: usize,
    columns: Vec<String>,
    mu_hat: Vec<f64>,
    sigma2_hat: Vec<f64>,
    R_hat: Vec<Vec<f64>>,
    Sigma_hat: Vec<Vec<f64>>,
    pd_corrected: bool,
    pd_policy: PdPolicy,
    telemetry: Telemetry,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn run(args: &EstimateArgs) -> CliResult<()> {
    let beta = TuningBeta::new(args.beta).map_err(|e| CliError::validation(format!("--beta: {e}")))?;
    let table = select(read_csv(&args.input, args.header)?, args.columns.as_deref())?;
    let cfg = EstimateConfig { pd_policy: args.pd_policy, ..Default::default() };
    let e = estimate(&table.data, beta, &cfg).map_err(|err| match err {
        smdpde::Error::DegenerateColumn { column } => CliError {
            code: crate::error::EXIT_DEGENERATE,
            message: format!("column {:?} is constant (zero variance)", table.names[column]),
        },
        other => other.into(),
    })?;
    let report = EstimateReport {
        schema_version: 1,
        beta: beta.value(),
        n: table.data.n(),
        p: e.p(),
        mu_hat: e.mu_hat.iter().copied().collect(),
        sigma2_hat: e.sigma2_hat.iter().copied().collect(),
        R_hat: rows(&e.r_hat),
        Sigma_hat: rows(&e.sigma_hat),
        pd_corrected: e.pd_corrected,
        pd_policy: args.pd_policy,
        telemetry: Telemetry {
            converged: e.converged(),
            marginals: e
                .per_component
                .iter()
                .zip(&table.names)
                .map(|(m, name)| MarginalTelemetry {
                    column: name.clone(),
                    iterations: m.iterations,
                    converged: m.converged,
                    final_step_norm: m.final_step_norm,
                    objective: m.objective,
                })
                .collect(),
            pairs: e
                .per_pair
                .iter()
                .map(|p| PairTelemetry {
                    j: p.j,
                    k: p.k,
                    rho_raw: p.estimate.rho,
                    evaluations: p.estimate.evaluations,
                    converged: p.estimate.converged,
                    at_boundary: p.estimate.at_boundary,
                })
                .collect(),
        },
        columns: table.names,
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_output(args.output.as_deref(), &json)
}
