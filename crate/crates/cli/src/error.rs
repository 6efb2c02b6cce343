use std::fmt;

/// Exit codes: 0 ok, 2 usage or validation, 3 degenerate data, 4 numeric failure.
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError { code: EXIT_VALIDATION, message: message.into() }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        CliError::validation(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<smdpde::Error> for CliError {
    fn from(e: smdpde::Error) -> Self {
        use smdpde::Error::*;
        let code = match e {
            DegenerateColumn { .. } | DegenerateSample => EXIT_DEGENERATE,
            SingularMatrix { .. } | NotPositiveDefinite => EXIT_NUMERIC,
            _ => EXIT_VALIDATION,
        };
        CliError { code, message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
