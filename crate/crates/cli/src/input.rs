use std::path::Path;

use smdpde::DataMatrix;

use crate::error::{CliError, CliResult};

pub struct Table {
    pub names: Vec<String>,
    pub data: DataMatrix,
}

/// Read a numeric CSV. Without a header, columns are named `x0, x1, …`.
pub fn read_csv(path: &Path, header: bool) -> CliResult<Table> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv_from(file, header, &path.display().to_string())
}

pub fn read_csv_from<R: std::io::Read>(reader: R, header: bool, label: &str) -> CliResult<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(header).trim(csv::Trim::All).from_reader(reader);
    let mut names = if header {
        let h = rdr.headers().map_err(|e| csv_error(label, e))?;
        h.iter().map(str::to_string).collect()
    } else {
        Vec::new()
    };
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(label, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); rec.len()];
        }
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| CliError::validation(format!("{label}: line {line}, column {}: not a number: {field:?}", j + 1)))?;
            if !v.is_finite() {
                return Err(CliError::validation(format!("{label}: line {line}, column {}: non-finite value", j + 1)));
            }
            columns[j].push(v);
        }
    }
    if columns.is_empty() {
        return Err(CliError::validation(format!("{label}: no data rows")));
    }
    if columns[0].len() < 2 {
        return Err(CliError::validation(format!("{label}: need at least 2 rows, got {}", columns[0].len())));
    }
    if names.is_empty() {
        names = (0..columns.len()).map(|j| format!("x{j}")).collect();
    } else if names.len() != columns.len() {
        return Err(CliError::validation(format!("{label}: header has {} fields, rows have {}", names.len(), columns.len())));
    }
    Ok(Table { names, data: DataMatrix::from_columns(columns)? })
}

fn csv_error(label: &str, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line());
    let detail = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => format!("expected {expected_len} fields, found {len}"),
        _ => e.to_string(),
    };
    match line {
        Some(l) => CliError::validation(format!("{label}: line {l}: {detail}")),
        None => CliError::validation(format!("{label}: {detail}")),
    }
}

/// Resolve `--columns`: header names when available, otherwise 0-based indices.
pub fn select(table: Table, spec: Option<&str>) -> CliResult<Table> {
    let Some(spec) = spec else { return Ok(table) };
    let mut idx = Vec::new();
    for tok in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let j = match table.names.iter().position(|n| n == tok) {
            Some(j) => j,
            None => tok
                .parse::<usize>()
                .ok()
                .filter(|&j| j < table.names.len())
                .ok_or_else(|| CliError::validation(format!("--columns: unknown column {tok:?}")))?,
        };
        idx.push(j);
    }
    if idx.is_empty() {
        return Err(CliError::validation("--columns: no columns selected"));
    }
    let names = idx.iter().map(|&j| table.names[j].clone()).collect();
    Ok(Table { names, data: table.data.select_columns(&idx)? })
}

/// Comma-separated reals.
pub fn parse_list(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| CliError::validation(format!("{flag}: not a number: {t:?}"))))
        .collect()
}
