//! Command-line front end: CSV ingestion, analysis configuration, report
//! rendering, simulation from design files and the identity self-checks.

pub mod analysis;
pub mod data;
pub mod design;
pub mod error;
pub mod names;
pub mod report;

use crate::analysis::{measure_label, split_for, AnalysisConfig, CiChoice, OutputFormat};
use crate::data::ColumnRoles;
use crate::error::{CliError, CliResult};
use addodds::{MeasureKind, MeasureSpec};
use clap::{Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "addodds", version, about = "Additive odds-scale interaction measures from case-control data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the saturated model and report EOR / AP / SI / OR with confidence intervals.
    Analyze(AnalyzeArgs),
    /// Simulate a case-control dataset from a design file.
    Simulate(SimulateArgs),
    /// Run the internal identity suites and report pass/fail.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CiArg {
    Delta,
    Boot,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Outcome column (1 = case, 0 = control).
    #[arg(long)]
    pub outcome: String,
    /// Comma-separated binary risk-factor columns; their order defines the factor order.
    #[arg(long, value_delimiter = ',', required = true)]
    pub risk_factors: Vec<String>,
    /// Comma-separated covariate columns entered linearly.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Vec<String>,
    /// Hold a risk factor at a level: COL=0 or COL=1 (repeatable).
    #[arg(long = "fix", value_parser = parse_fix)]
    pub fix: Vec<(String, bool)>,
    /// KIND:ORDER with KIND one of OR, EOR, AP, SI (repeatable; OR needs no order).
    #[arg(long = "measure", value_parser = parse_measure, required = true)]
    pub measures: Vec<(MeasureKind, usize)>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = CiArg::Delta)]
    pub ci: CiArg,
    #[arg(long, default_value_t = 1000)]
    pub n_boot: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    pub format: FormatArg,
    /// Fit only records at the fixed levels, with a model in the remaining factors.
    #[arg(long)]
    pub subset_fit: bool,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub design: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the design file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, clap::Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 20_240_101)]
    pub seed: u64,
}

pub fn parse_fix(s: &str) -> Result<(String, bool), String> {
    let (name, level) = s.split_once('=').ok_or_else(|| format!("expected COL=0 or COL=1, got {s:?}"))?;
    match level.trim() {
        "0" => Ok((name.trim().to_string(), false)),
        "1" => Ok((name.trim().to_string(), true)),
        other => Err(format!("level {other:?} is not 0 or 1")),
    }
}

pub fn parse_measure(s: &str) -> Result<(MeasureKind, usize), String> {
    let (kind, order) = match s.split_once(':') {
        Some((k, o)) => (k, Some(o)),
        None => (s, None),
    };
    let kind: MeasureKind = kind.trim().parse().map_err(|e: addodds::Error| e.to_string())?;
    let order = match (order, kind) {
        (Some(o), _) => o.trim().parse::<usize>().map_err(|_| format!("order {o:?} is not a positive integer"))?,
        (None, MeasureKind::OrJoint) => 1,
        (None, _) => return Err(format!("{kind} needs an order, e.g. {kind}:2")),
    };
    Ok((kind, order))
}

impl AnalyzeArgs {
    pub fn to_config(&self) -> AnalysisConfig {
        AnalysisConfig {
            data_path: self.data.clone(),
            roles: ColumnRoles {
                outcome: self.outcome.clone(),
                risk_factors: self.risk_factors.clone(),
                covariates: self.covariates.clone(),
            },
            fixed: self.fix.clone(),
            measures: self.measures.clone(),
            alpha: self.alpha,
            ci: match self.ci {
                CiArg::Delta => CiChoice::Delta,
                CiArg::Boot => CiChoice::Boot,
                CiArg::Both => CiChoice::Both,
            },
            n_boot: self.n_boot,
            seed: self.seed,
            format: match self.format {
                FormatArg::Text => OutputFormat::Text,
                FormatArg::Json => OutputFormat::Json,
                FormatArg::Csv => OutputFormat::Csv,
            },
            subset_fit: self.subset_fit,
        }
    }
}

fn stdout_error(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

/// Runs one command, writing its normal output to `out`.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> CliResult<()> {
    match &cli.command {
        Command::Analyze(args) => analyze(&args.to_config(), out),
        Command::Simulate(args) => simulate(args, out),
        Command::Check(args) => check(args.seed, out),
    }
}

pub fn analyze<W: Write>(config: &AnalysisConfig, out: &mut W) -> CliResult<()> {
    let report = analysis::run_analysis(config)?;
    match config.format {
        OutputFormat::Text => out.write_all(report::render_text(&report).as_bytes()).map_err(stdout_error)?,
        OutputFormat::Json => {
            let json = report::render_json(&report).map_err(|e| CliError::Usage(e.to_string()))?;
            writeln!(out, "{json}").map_err(stdout_error)?;
        }
        OutputFormat::Csv => report::write_csv(&mut *out, &report).map_err(stdout_error)?,
    }
    match report.error_count() {
        0 => Ok(()),
        n => Err(CliError::Measures(n)),
    }
}

pub fn simulate<W: Write>(args: &SimulateArgs, out: &mut W) -> CliResult<()> {
    let mut spec = design::load_design(&args.design)?;
    if let Some(seed) = args.seed {
        spec.design.seed = seed;
    }
    let data = addodds::simulate(&spec.design).map_err(CliError::Simulation)?;
    let roles = ColumnRoles {
        outcome: spec.outcome.clone(),
        risk_factors: spec.names.as_slice().to_vec(),
        covariates: spec.covariates.clone(),
    };
    roles.validate()?;
    let file = std::fs::File::create(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    data::write_csv(std::io::BufWriter::new(file), &data, &roles).map_err(|e| {
        let source = match e.into_kind() {
            csv::ErrorKind::Io(io) => io,
            other => std::io::Error::other(format!("{other:?}")),
        };
        CliError::io(&args.out, source)
    })?;
    writeln!(
        out,
        "wrote {} records ({} cases, {} controls) to {}",
        data.len(),
        data.n1(),
        data.n0(),
        args.out.display()
    )
    .map_err(stdout_error)?;
    if !spec.measures.is_empty() {
        writeln!(out, "true values:").map_err(stdout_error)?;
    }
    for m in &spec.measures {
        let split = match split_for(&spec.names, &m.fixed) {
            Ok(s) => s,
            Err(e) => {
                writeln!(out, "  {} (order {}): invalid: {e}", m.kind, m.order).map_err(stdout_error)?;
                continue;
            }
        };
        let j: Vec<String> = split.j().iter().map(|&f| spec.names.get(f).to_string()).collect();
        let k: Vec<(String, bool)> = split.k().iter().map(|&(f, on)| (spec.names.get(f).to_string(), on)).collect();
        let label = measure_label(m.kind, &j, &k, m.order);
        let value = MeasureSpec::new(split, m.order, m.kind)
            .and_then(|s| addodds::true_measure(&spec.design, &s))
            .map_or_else(|e| format!("undefined: {e}"), |x| format!("{x:.6}"));
        writeln!(out, "  {label}  {value}").map_err(stdout_error)?;
    }
    Ok(())
}

pub fn check<W: Write>(seed: u64, out: &mut W) -> CliResult<()> {
    let outcomes = addodds::checks::run_all(seed);
    let mut failed = 0;
    for o in &outcomes {
        failed += usize::from(!o.passed);
        writeln!(
            out,
            "{}  {:<45} cases {:>7}  worst error {:.3e}  tolerance {:.0e}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.cases,
            o.worst_error,
            o.tolerance
        )
        .map_err(stdout_error)?;
    }
    match failed {
        0 => Ok(()),
        n => Err(CliError::Check(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_arguments() {
        assert_eq!(parse_measure("AP:2").unwrap(), (MeasureKind::Ap, 2));
        assert_eq!(parse_measure("or").unwrap(), (MeasureKind::OrJoint, 1));
        assert!(parse_measure("EOR").is_err());
        assert!(parse_measure("XYZ:1").is_err());
        assert!(parse_measure("SI:two").is_err());
    }

    #[test]
    fn fix_arguments() {
        assert_eq!(parse_fix("smoke=0").unwrap(), ("smoke".to_string(), false));
        assert_eq!(parse_fix("smoke=1").unwrap(), ("smoke".to_string(), true));
        assert!(parse_fix("smoke=2").is_err());
        assert!(parse_fix("smoke").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
