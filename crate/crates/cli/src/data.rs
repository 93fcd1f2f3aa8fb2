//! CSV ingestion and emission.
//!
//! Dialect: comma-separated UTF-8 with a header row, `.` as the decimal
//! separator and unquoted numbers. The outcome and the risk factors are
//! `0`/`1`; covariates are finite reals. Categorical covariates must be
//! encoded as indicator columns before loading.

use crate::error::{CliError, CliResult, ParseIssue};
use addodds::{CaseControlDataset, ExposurePattern, Record};
use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

/// Which CSV columns play which role. Risk-factor order defines factor indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnRoles {
    pub outcome: String,
    pub risk_factors: Vec<String>,
    pub covariates: Vec<String>,
}

impl ColumnRoles {
    pub fn validate(&self) -> CliResult<()> {
        if self.risk_factors.is_empty() {
            return Err(CliError::Usage("at least one risk factor column is required".into()));
        }
        let mut seen = HashSet::new();
        for name in std::iter::once(&self.outcome).chain(&self.risk_factors).chain(&self.covariates) {
            if !seen.insert(name.as_str()) {
                return Err(CliError::Usage(format!("column {name:?} is listed more than once")));
            }
        }
        Ok(())
    }
}

/// Reads a dataset, reporting every unparseable cell rather than the first.
pub fn load_csv(path: &Path, roles: &ColumnRoles) -> CliResult<CaseControlDataset<f64>> {
    roles.validate()?;
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv(file, roles).map_err(|e| match e {
        ReadError::Io(source) => CliError::io(path, source),
        ReadError::Cli(e) => e,
    })
}

enum ReadError {
    Io(std::io::Error),
    Cli(CliError),
}

impl From<CliError> for ReadError {
    fn from(e: CliError) -> Self {
        ReadError::Cli(e)
    }
}

fn read_csv<R: std::io::Read>(input: R, roles: &ColumnRoles) -> Result<CaseControlDataset<f64>, ReadError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| ReadError::Cli(csv_failure(1, e)))?.clone();
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Usage(format!("column {name:?} not found in header")))
    };
    let outcome = position(&roles.outcome)?;
    let factors = roles.risk_factors.iter().map(|c| position(c)).collect::<CliResult<Vec<_>>>()?;
    let covariates = roles.covariates.iter().map(|c| position(c)).collect::<CliResult<Vec<_>>>()?;

    let mut issues = Vec::new();
    let mut records = Vec::new();
    for (index, row) in reader.records().enumerate() {
        let line = index as u64 + 2;
        let row = match row {
            Ok(row) => row,
            Err(e) if e.is_io_error() => match e.into_kind() {
                csv::ErrorKind::Io(io) => return Err(ReadError::Io(io)),
                _ => unreachable!("checked is_io_error"),
            },
            Err(e) => {
                let line = e.position().map_or(line, |p| p.line());
                issues.push(ParseIssue { line, column: String::new(), reason: e.to_string() });
                continue;
            }
        };
        let cell = |col: usize| row.get(col).unwrap_or("");
        let mut bad = |col: usize, reason: String| {
            issues.push(ParseIssue { line, column: header[col].to_string(), reason });
        };

        let y = match cell(outcome) {
            "0" => Some(false),
            "1" => Some(true),
            "" => {
                bad(outcome, "missing outcome".into());
                None
            }
            other => {
                bad(outcome, format!("outcome {other:?} is not 0 or 1"));
                None
            }
        };
        let mut bits = Vec::with_capacity(factors.len());
        for &col in &factors {
            match cell(col) {
                "0" => bits.push(0u8),
                "1" => bits.push(1u8),
                "" => bad(col, "missing risk factor".into()),
                other => {
                    return Err(CliError::NonBinaryRiskFactor {
                        line,
                        column: header[col].to_string(),
                        value: other.to_string(),
                    }
                    .into())
                }
            }
        }
        let mut z = Vec::with_capacity(covariates.len());
        for &col in &covariates {
            match cell(col).parse::<f64>() {
                Ok(x) if x.is_finite() => z.push(x),
                Ok(x) => bad(col, format!("covariate {x} is not finite")),
                Err(_) if cell(col).is_empty() => bad(col, "missing covariate".into()),
                Err(_) => bad(col, format!("covariate {:?} is not a number", cell(col))),
            }
        }
        if let (Some(y), true, true) = (y, bits.len() == factors.len(), z.len() == covariates.len()) {
            let v = ExposurePattern::new(&bits).map_err(|e| CliError::Usage(e.to_string()))?;
            records.push(Record { v, z, y });
        }
    }
    if !issues.is_empty() {
        return Err(CliError::Parse(issues).into());
    }
    if !records.iter().any(|r| r.y) {
        return Err(CliError::EmptyClass("cases").into());
    }
    if records.iter().all(|r| r.y) {
        return Err(CliError::EmptyClass("controls").into());
    }
    CaseControlDataset::new(factors.len(), covariates.len(), records)
        .map_err(|e| CliError::Usage(e.to_string()).into())
}

fn csv_failure(line: u64, e: csv::Error) -> CliError {
    CliError::Parse(vec![ParseIssue { line, column: String::new(), reason: e.to_string() }])
}

/// Writes a dataset in the ingestion format with the given column names.
pub fn write_csv<W: Write>(out: W, data: &CaseControlDataset<f64>, roles: &ColumnRoles) -> csv::Result<()> {
    let mut writer = csv::WriterBuilder::new().from_writer(out);
    let mut header = vec![roles.outcome.as_str()];
    header.extend(roles.risk_factors.iter().map(String::as_str));
    header.extend(roles.covariates.iter().map(String::as_str));
    writer.write_record(&header)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for r in data.records() {
        row.clear();
        row.push(u8::from(r.y).to_string());
        row.extend(r.v.bits().iter().map(|b| b.to_string()));
        // `Display` for f64 prints the shortest string that parses back exactly.
        row.extend(r.z.iter().map(|x| x.to_string()));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}
