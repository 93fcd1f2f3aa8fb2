//! Analysis configuration and execution: one model fit shared by every
//! requested measure, with per-measure failures kept inside the report.

use crate::data::{load_csv, ColumnRoles};
use crate::error::{CliError, CliResult};
use crate::names::FactorNames;
use addodds::{
    bootstrap_ci, delta_ci, fit, measure, CaseControlDataset, EstimateReport64, FactorSplit, FitOptions64,
    FitResult64, MeasureKind, MeasureSpec,
};
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CiChoice {
    Delta,
    Boot,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

/// Everything `analyze` needs.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub data_path: PathBuf,
    pub roles: ColumnRoles,
    /// Risk factors held fixed (`K`) with their levels; the rest form `J`.
    pub fixed: Vec<(String, bool)>,
    pub measures: Vec<(MeasureKind, usize)>,
    pub alpha: f64,
    pub ci: CiChoice,
    pub n_boot: usize,
    pub seed: u64,
    pub format: OutputFormat,
    /// Fit only the records at the fixed levels, with a model in `J` alone.
    pub subset_fit: bool,
}

impl AnalysisConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.roles.validate()?;
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.ci != CiChoice::Delta && self.n_boot < addodds::inference::MIN_BOOTSTRAP {
            return Err(CliError::Usage(format!(
                "--n-boot must be at least {}, got {}",
                addodds::inference::MIN_BOOTSTRAP,
                self.n_boot
            )));
        }
        if self.measures.is_empty() {
            return Err(CliError::Usage("at least one --measure is required".into()));
        }
        self.split_names().map(|_| ())
    }

    /// `(J names, K names with levels)`, both in risk-factor order.
    fn split_names(&self) -> CliResult<(Vec<String>, Vec<(String, bool)>)> {
        let names = FactorNames::new(self.roles.risk_factors.clone()).map_err(|e| CliError::Usage(e.0))?;
        let fixed = resolve_fixed(&names, &self.fixed).map_err(CliError::Usage)?;
        let j: Vec<String> = (0..names.len())
            .filter(|i| !fixed.iter().any(|(f, _)| f == i))
            .map(|i| names.get(i).to_string())
            .collect();
        if j.is_empty() {
            return Err(CliError::Usage("every risk factor is fixed; J must be nonempty".into()));
        }
        let k = fixed.iter().map(|&(f, on)| (names.get(f).to_string(), on)).collect();
        Ok((j, k))
    }
}

/// Resolves `(name, level)` pairs to factor indices, sorted by index.
pub fn resolve_fixed(names: &FactorNames, fixed: &[(String, bool)]) -> Result<Vec<(usize, bool)>, String> {
    let mut out = Vec::with_capacity(fixed.len());
    for (name, on) in fixed {
        let f = names.index_of(name).map_err(|e| format!("--fix: {e}"))?;
        if out.iter().any(|&(g, _)| g == f) {
            return Err(format!("--fix: factor {name:?} fixed twice"));
        }
        out.push((f, *on));
    }
    out.sort_unstable();
    Ok(out)
}

/// Builds the split for the given fixed factors over all `names`.
pub fn split_for(names: &FactorNames, fixed: &[(String, bool)]) -> Result<FactorSplit, String> {
    let fixed = resolve_fixed(names, fixed)?;
    let j: Vec<usize> = (0..names.len()).filter(|i| !fixed.iter().any(|(f, _)| f == i)).collect();
    FactorSplit::new(names.len(), &j, &fixed).map_err(|e| e.to_string())
}

/// `"AP | J = {dr15, a2neg} | K: smoke=0 | order ≥ 2"`.
pub fn measure_label(kind: MeasureKind, j: &[String], k: &[(String, bool)], order: usize) -> String {
    let k_text = if k.is_empty() {
        "none".to_string()
    } else {
        k.iter().map(|(n, on)| format!("{n}={}", u8::from(*on))).collect::<Vec<_>>().join(", ")
    };
    let j_text = j.join(", ");
    match kind {
        MeasureKind::OrJoint => format!("{kind} | J = {{{j_text}}} | K: {k_text}"),
        _ => format!("{kind} | J = {{{j_text}}} | K: {k_text} | order ≥ {order}"),
    }
}

/// Descriptive name of what a measure of the given order quantifies.
pub fn effect_description(kind: MeasureKind, j_len: usize, order: usize) -> String {
    if kind == MeasureKind::OrJoint {
        return "joint effects".into();
    }
    match order {
        1 if j_len == 1 => "marginal effect".into(),
        1 => "joint effects".into(),
        i if i == j_len => "highest order interaction".into(),
        2 => "2nd & higher order interaction".into(),
        i => format!("{} & higher order interaction", ordinal(i)),
    }
}

fn ordinal(i: usize) -> String {
    let suffix = match (i % 10, i % 100) {
        (1, 11) | (2, 12) | (3, 13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{i}{suffix}")
}

/// One estimated term of the fitted model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermEstimate {
    pub term: String,
    pub estimate: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    /// `"full"` (all risk factors) or `"subset"` (records at the fixed levels only).
    pub strategy: &'static str,
    pub records: usize,
    pub cases: usize,
    pub controls: usize,
    pub iterations: usize,
    pub converged: bool,
    pub loglik: f64,
    pub gradient_norm: f64,
    pub condition_number: f64,
    pub ridge_used: bool,
    /// Log odds ratios in canonical order.
    pub psi: Vec<TermEstimate>,
    /// Intercept; not interpretable under case-control sampling.
    pub intercept: TermEstimate,
    pub covariates: Vec<TermEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureRow {
    pub label: String,
    pub effect: String,
    pub kind: MeasureKind,
    pub order: usize,
    pub j: Vec<String>,
    pub k: Vec<(String, bool)>,
    /// Point estimate when the measure is defined, even if an interval failed.
    pub point: Option<f64>,
    pub estimates: Vec<EstimateReport64>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub confidence: f64,
    pub fit: FitSummary,
    pub measures: Vec<MeasureRow>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn error_count(&self) -> usize {
        self.measures.iter().filter(|m| !m.errors.is_empty()).count()
    }
}

pub const MATCHING_NOTE: &str = "Log odds ratios are consistent under case-control sampling; if controls were \
frequency matched to cases in strata, the matching variables must be included as covariates.";
pub const INTERCEPT_NOTE: &str = "The intercept is not interpretable under case-control sampling.";

/// Loads the data and runs the analysis.
pub fn run_analysis(config: &AnalysisConfig) -> CliResult<Report> {
    config.validate()?;
    let data = load_csv(&config.data_path, &config.roles)?;
    analyze_dataset(config, &data)
}

/// Runs the analysis on an already loaded dataset whose factors follow `config.roles`.
pub fn analyze_dataset(config: &AnalysisConfig, data: &CaseControlDataset<f64>) -> CliResult<Report> {
    config.validate()?;
    let (j_names, k_names) = config.split_names()?;
    let names = FactorNames::new(config.roles.risk_factors.clone()).map_err(|e| CliError::Usage(e.0))?;
    let fixed = resolve_fixed(&names, &config.fixed).map_err(CliError::Usage)?;

    // Model data, factor names of the model, and the split used for every measure.
    let (model_data, model_names, split) = if config.subset_fit {
        let keep: Vec<usize> = (0..names.len()).filter(|i| !fixed.iter().any(|(f, _)| f == i)).collect();
        let restricted = data.restrict(&keep, &fixed).map_err(CliError::Fit)?;
        let model_names = FactorNames::new(j_names.clone()).map_err(|e| CliError::Usage(e.0))?;
        let split = FactorSplit::all(keep.len()).map_err(CliError::Fit)?;
        (restricted, model_names, split)
    } else {
        let split = split_for(&names, &config.fixed).map_err(CliError::Usage)?;
        (data.clone(), names.clone(), split)
    };

    let options = FitOptions64::default();
    let fitted = fit(&model_data, &options).map_err(CliError::Fit)?;
    let summary = summarize(&fitted, &model_names, &config.roles.covariates, config.subset_fit);

    let measures = config
        .measures
        .iter()
        .map(|&(kind, order)| {
            let mut row = MeasureRow {
                label: measure_label(kind, &j_names, &k_names, order),
                effect: effect_description(kind, j_names.len(), order),
                kind,
                order,
                j: j_names.clone(),
                k: k_names.clone(),
                point: None,
                estimates: Vec::new(),
                errors: Vec::new(),
            };
            let spec = match MeasureSpec::new(split.clone(), order, kind) {
                Ok(spec) => spec,
                Err(_) if kind == MeasureKind::Si && order == 1 => {
                    row.errors.push("SI undefined for joint effects".into());
                    return row;
                }
                Err(e) => {
                    row.errors.push(e.to_string());
                    return row;
                }
            };
            match measure(&fitted.params.psi, &spec) {
                Ok(x) => row.point = Some(x),
                Err(e) => {
                    row.errors.push(e.to_string());
                    return row;
                }
            }
            if config.ci != CiChoice::Boot {
                match delta_ci(&fitted, &spec, config.alpha) {
                    Ok(r) => row.estimates.push(r),
                    Err(e) => row.errors.push(format!("delta interval: {e}")),
                }
            }
            if config.ci != CiChoice::Delta {
                match bootstrap_ci(&model_data, &spec, config.alpha, config.n_boot, config.seed, &options) {
                    Ok(r) => row.estimates.push(r),
                    Err(e) => row.errors.push(format!("bootstrap interval: {e}")),
                }
            }
            row
        })
        .collect();

    let mut notes = vec![MATCHING_NOTE.to_string(), INTERCEPT_NOTE.to_string()];
    if fitted.ridge_used {
        notes.push("A small ridge was added to factorize the information matrix.".into());
    }
    Ok(Report { confidence: 1.0 - config.alpha, fit: summary, measures, notes })
}

fn summarize(fitted: &FitResult64, names: &FactorNames, covariates: &[String], subset: bool) -> FitSummary {
    let map = fitted.params.psi.index_map();
    let se_all: Vec<f64> = (0..fitted.covariance.dim()).map(|i| fitted.covariance[(i, i)].max(0.0).sqrt()).collect();
    let m = map.len();
    FitSummary {
        strategy: if subset { "subset" } else { "full" },
        records: fitted.n0 + fitted.n1,
        cases: fitted.n1,
        controls: fitted.n0,
        iterations: fitted.iterations,
        converged: fitted.converged,
        loglik: fitted.loglik,
        gradient_norm: fitted.gradient_norm,
        condition_number: fitted.condition_number,
        ridge_used: fitted.ridge_used,
        psi: map
            .patterns()
            .zip(fitted.params.psi.psi())
            .enumerate()
            .map(|(i, (w, &estimate))| TermEstimate { term: names.term(&w), estimate, se: se_all[1 + i] })
            .collect(),
        intercept: TermEstimate { term: "intercept".into(), estimate: fitted.params.kappa[0], se: se_all[0] },
        covariates: covariates
            .iter()
            .enumerate()
            .map(|(j, name)| TermEstimate {
                term: name.clone(),
                estimate: fitted.params.kappa[1 + j],
                se: se_all[1 + m + j],
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_use_names_and_levels() {
        let j = vec!["dr15".to_string(), "a2neg".to_string()];
        let k = vec![("smoke".to_string(), false)];
        assert_eq!(measure_label(MeasureKind::Ap, &j, &k, 2), "AP | J = {dr15, a2neg} | K: smoke=0 | order ≥ 2");
        assert_eq!(measure_label(MeasureKind::OrJoint, &j, &[], 1), "OR | J = {dr15, a2neg} | K: none");
    }

    #[test]
    fn effect_vocabulary() {
        assert_eq!(effect_description(MeasureKind::Eor, 1, 1), "marginal effect");
        assert_eq!(effect_description(MeasureKind::Eor, 3, 1), "joint effects");
        assert_eq!(effect_description(MeasureKind::Ap, 3, 2), "2nd & higher order interaction");
        assert_eq!(effect_description(MeasureKind::Si, 3, 3), "highest order interaction");
        assert_eq!(effect_description(MeasureKind::Si, 2, 2), "highest order interaction");
        assert_eq!(effect_description(MeasureKind::Eor, 5, 3), "3rd & higher order interaction");
    }

    #[test]
    fn fixing_every_factor_is_rejected() {
        let names = FactorNames::new(vec!["a".into()]).unwrap();
        assert!(split_for(&names, &[("a".into(), true)]).is_err());
        assert!(resolve_fixed(&names, &[("b".into(), true)]).is_err());
    }
}
