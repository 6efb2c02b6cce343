use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use smdpde::simulation::{run_scenario, ScenarioConfig, SimReport};

use crate::error::{CliError, CliResult};
use crate::write_output;

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scenario file (TOML)
    pub config: PathBuf,
    /// Override the seed in the config
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the replication count
    #[arg(long)]
    pub replications: Option<usize>,
    /// Write the full JSON report here
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the summary CSV here (stdout when neither output is given)
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: u32,
    #[serde(flatten)]
    report: &'a SimReport,
}

pub fn load_config(path: &std::path::Path) -> CliResult<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::validation(format!("{}: {}", path.display(), e.message())))
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let mut cfg = load_config(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.replications {
        cfg.replications = r;
    }
    let report = run_scenario(&cfg)?;
    let csv = report.to_csv();
    if let Some(path) = &args.json {
        let mut json = serde_json::to_string_pretty(&Envelope { schema_version: 1, report: &report }).expect("report serializes");
        json.push('\n');
        write_output(Some(path), &json)?;
    }
    if args.csv.is_some() || args.json.is_none() {
        write_output(args.csv.as_deref(), &csv)?;
    }
    Ok(())
}
