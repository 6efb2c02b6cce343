use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use smdpde::diagnostics::{are_tables, influence_grid, GridSpec, IfTarget};
use smdpde::{MarginalParams, PairParams, TuningBeta};

use crate::error::{CliError, CliResult};
use crate::input::parse_list;
use crate::write_output;

/// ρ grid of the printed correlation table.
pub const TABLE_RHOS: [f64; 7] = [-0.7, -0.5, -0.3, 0.0, 0.3, 0.5, 0.7];

#[derive(Subcommand, Debug)]
pub enum DiagnoseCommand {
    /// Asymptotic relative efficiencies against the MLE
    Are(AreArgs),
    /// Influence function values over a grid
    Influence(InfluenceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum AreTable {
    /// mean and variance efficiencies
    LocationScale,
    /// correlation efficiencies, `SMDPDE (MDPDE)` cells
    Correlation,
    /// correlation efficiencies, one (beta, rho) per line
    Long,
    /// location-scale then correlation, separated by a blank line
    All,
}

#[derive(Args, Debug)]
pub struct AreArgs {
    /// Comma-separated beta values
    #[arg(long, default_value = "0,0.1,0.3,0.5,0.7")]
    pub betas: String,
    /// Comma-separated rho values, or `lo..hi` for the table grid points inside [lo, hi]
    #[arg(long, default_value = "-0.7..0.7", allow_hyphen_values = true)]
    pub rhos: String,
    #[arg(long, value_enum, default_value_t = AreTable::All)]
    pub table: AreTable,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InfluenceArgs {
    /// mean, mean2, variance, variance2 or correlation
    #[arg(long)]
    pub target: IfTarget,
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    /// Model `mu1,var1,mu2,var2,rho`
    #[arg(long, default_value = "1,4,4,9,0.5", allow_hyphen_values = true)]
    pub model: String,
    /// Grid `lo:hi:points`, used on both axes for the correlation target
    #[arg(long, default_value = "-10:12:111", allow_hyphen_values = true)]
    pub grid: String,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub fn parse_rhos(s: &str) -> CliResult<Vec<f64>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let lo: f64 = lo.trim().parse().map_err(|_| CliError::validation(format!("--rhos: bad range {s:?}")))?;
        let hi: f64 = hi.trim().parse().map_err(|_| CliError::validation(format!("--rhos: bad range {s:?}")))?;
        if lo.abs() >= 1.0 || hi.abs() >= 1.0 {
            return Err(CliError::validation(format!("--rhos: correlations must lie in (-1, 1), got {s}")));
        }
        return Ok(TABLE_RHOS.iter().copied().filter(|r| (lo - 1e-12..=hi + 1e-12).contains(r)).collect());
    }
    parse_list("--rhos", s)
}

fn run_are(a: &AreArgs) -> CliResult<()> {
    let betas = parse_list("--betas", &a.betas)?;
    let rhos = parse_rhos(&a.rhos)?;
    if betas.is_empty() || rhos.is_empty() {
        return Err(CliError::validation("ARE grids must be non-empty"));
    }
    let t = are_tables(&betas, &rhos)?;
    let out = match a.table {
        AreTable::LocationScale => t.location_scale_csv(),
        AreTable::Correlation => t.correlation_csv(),
        AreTable::Long => t.correlation_long_csv(),
        AreTable::All => format!("{}\n{}", t.location_scale_csv(), t.correlation_csv()),
    };
    write_output(a.output.as_deref(), &out)
}

fn parse_model(s: &str) -> CliResult<PairParams> {
    let v = parse_list("--model", s)?;
    let [m1, v1, m2, v2, r] = v[..] else {
        return Err(CliError::validation("--model: expected mu1,var1,mu2,var2,rho"));
    };
    Ok(PairParams::new(MarginalParams::new(m1, v1)?, MarginalParams::new(m2, v2)?, r)?)
}

fn parse_grid(s: &str) -> CliResult<GridSpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::validation(format!("--grid: expected lo:hi:points, got {s:?}"));
    let [lo, hi, n] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    GridSpec::new(lo, hi, n).map_err(|e| CliError::validation(format!("--grid: {e}")))
}

fn run_influence(a: &InfluenceArgs) -> CliResult<()> {
    let beta = TuningBeta::new(a.beta).map_err(|e| CliError::validation(format!("--beta: {e}")))?;
    let model = parse_model(&a.model)?;
    let grid = parse_grid(&a.grid)?;
    let g = influence_grid(a.target, &model, beta, &grid)?;
    write_output(a.output.as_deref(), &g.to_csv())
}

pub fn run(cmd: &DiagnoseCommand) -> CliResult<()> {
    match cmd {
        DiagnoseCommand::Are(a) => run_are(a),
        DiagnoseCommand::Influence(a) => run_influence(a),
    }
}
