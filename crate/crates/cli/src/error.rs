use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

/// Process exit codes. Each error class gets its own code so scripts can
/// tell a bad file from a failed fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitCode {
    Success = 0,
    Io = 1,
    Usage = 2,
    Data = 3,
    Fit = 4,
    Measure = 5,
    Check = 6,
    Simulation = 7,
}

impl ExitCode {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// One bad cell found while reading a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseIssue {
    /// 1-based line number in the file (the header is line 1).
    pub line: u64,
    pub column: String,
    pub reason: String,
}

impl fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {:?}: {}", self.line, self.column, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("design file {path}: {reason}")]
    Design { path: PathBuf, reason: String },
    #[error("PARSE_ERROR: {} bad cell(s):\n  {}", .0.len(), join_issues(.0))]
    Parse(Vec<ParseIssue>),
    #[error("NON_BINARY_RISK_FACTOR: line {line}, column {column:?}: value {value:?} is not 0 or 1")]
    NonBinaryRiskFactor { line: u64, column: String, value: String },
    #[error("EMPTY_CLASS: the data contain no {0}")]
    EmptyClass(&'static str),
    #[error("model fit failed: {0}")]
    Fit(addodds::Error),
    #[error("simulation failed: {0}")]
    Simulation(addodds::Error),
    #[error("{0} measure(s) could not be estimated")]
    Measures(usize),
    #[error("{0} identity suite(s) failed")]
    Check(usize),
}

fn join_issues(issues: &[ParseIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n  ")
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Io { .. } => ExitCode::Io,
            CliError::Usage(_) | CliError::Design { .. } => ExitCode::Usage,
            CliError::Parse(_) | CliError::NonBinaryRiskFactor { .. } | CliError::EmptyClass(_) => ExitCode::Data,
            CliError::Fit(_) => ExitCode::Fit,
            CliError::Measures(_) => ExitCode::Measure,
            CliError::Check(_) => ExitCode::Check,
            CliError::Simulation(_) => ExitCode::Simulation,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
