//! TOML design files for the `simulate` command.
//!
//! ```toml
//! factors = ["dr15", "a2neg", "smoke"]   # risk-factor names (default x1, x2, ...)
//! covariates = ["age"]                   # one name per confounder (default z1, ...)
//! outcome = "y"                          # outcome column name (default "y")
//! n0 = 2000
//! n1 = 2000
//! seed = 7
//! kappa = [-2.5, 0.03]                   # intercept, then one slope per confounder
//! exposure_probs = [0.4, 0.3, 0.5]
//! exposure_correlation = 0.0             # optional Gaussian-copula equicorrelation
//!
//! [psi]                                  # log odds ratios; omitted terms are 0
//! dr15 = 1.1
//! "dr15*a2neg" = 0.4
//!
//! [[confounder]]
//! kind = "normal"                        # or kind = "discrete", levels = [...], probs = [...]
//! mean = 40.0
//! sd = 10.0
//!
//! [[measure]]                            # true values printed after simulation
//! kind = "AP"
//! order = 2
//! fix = { smoke = 0 }
//! ```

use crate::error::{CliError, CliResult};
use crate::names::{parse_term, FactorNames};
use addodds::{ConfounderModel, MeasureKind, SimDesign, StructuralParams};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesign {
    factors: Option<Vec<String>>,
    covariates: Option<Vec<String>>,
    outcome: Option<String>,
    n0: usize,
    n1: usize,
    #[serde(default)]
    seed: u64,
    kappa: Vec<f64>,
    exposure_probs: Vec<f64>,
    #[serde(default)]
    exposure_correlation: f64,
    #[serde(default)]
    psi: BTreeMap<String, f64>,
    #[serde(default)]
    confounder: Vec<ConfounderModel>,
    #[serde(default)]
    measure: Vec<RawMeasure>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    kind: String,
    #[serde(default = "default_order")]
    order: usize,
    #[serde(default)]
    fix: BTreeMap<String, u8>,
}

fn default_order() -> usize {
    1
}

/// A measure request by factor names.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRequest {
    pub kind: MeasureKind,
    pub order: usize,
    /// `(factor name, level)` pairs forming `K`; the other factors form `J`.
    pub fixed: Vec<(String, bool)>,
}

/// A parsed design: the simulation parameters plus names and requested measures.
#[derive(Debug, Clone)]
pub struct DesignFile {
    pub design: SimDesign<f64>,
    pub names: FactorNames,
    pub outcome: String,
    pub covariates: Vec<String>,
    pub measures: Vec<MeasureRequest>,
}

pub fn load_design(path: &Path) -> CliResult<DesignFile> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_design(&text).map_err(|reason| CliError::Design { path: PathBuf::from(path), reason })
}

pub fn parse_design(text: &str) -> Result<DesignFile, String> {
    let raw: RawDesign = toml::from_str(text).map_err(|e| e.to_string())?;
    let p = raw.exposure_probs.len();
    let factors = raw.factors.unwrap_or_else(|| (1..=p).map(|j| format!("x{j}")).collect());
    if factors.len() != p {
        return Err(format!("{} factor names for {p} exposure probabilities", factors.len()));
    }
    let names = FactorNames::new(factors).map_err(|e| e.to_string())?;
    let q = raw.confounder.len();
    let covariates = raw.covariates.unwrap_or_else(|| (1..=q).map(|j| format!("z{j}")).collect());
    if covariates.len() != q {
        return Err(format!("{} covariate names for {q} confounders", covariates.len()));
    }

    let template = StructuralParams::<f64>::zeros(p).map_err(|e| e.to_string())?;
    let map = template.index_map().clone();
    let mut psi = vec![0.0; map.len()];
    for (term, value) in &raw.psi {
        let pattern = parse_term(&names, term).map_err(|e| format!("[psi] key {term:?}: {e}"))?;
        let index = map.index_of(&pattern).expect("nonzero pattern has an index");
        psi[index] = *value;
    }
    let psi_true = StructuralParams::with_map(map, psi).map_err(|e| e.to_string())?;

    let measures = raw
        .measure
        .into_iter()
        .map(|m| {
            let kind: MeasureKind = m.kind.parse().map_err(|e: addodds::Error| e.to_string())?;
            let fixed = m
                .fix
                .into_iter()
                .map(|(name, level)| match level {
                    0 | 1 => Ok((name, level == 1)),
                    other => Err(format!("[[measure]] fix {name} = {other} is not 0 or 1")),
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(MeasureRequest { kind, order: m.order, fixed })
        })
        .collect::<Result<Vec<_>, String>>()?;

    let design = SimDesign {
        psi_true,
        kappa_true: raw.kappa,
        exposure_probs: raw.exposure_probs,
        exposure_correlation: raw.exposure_correlation,
        confounders: raw.confounder,
        n0: raw.n0,
        n1: raw.n1,
        seed: raw.seed,
    };
    design.validate().map_err(|e| e.to_string())?;
    Ok(DesignFile { design, names, outcome: raw.outcome.unwrap_or_else(|| "y".into()), covariates, measures })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DESIGN: &str = r#"
factors = ["a", "b"]
n0 = 100
n1 = 120
seed = 3
kappa = [-1.0, 0.5]
exposure_probs = [0.3, 0.6]

[psi]
a = 0.7
"b*a" = 0.4

[[confounder]]
kind = "discrete"
levels = [0.0, 1.0]
probs = [0.5, 0.5]

[[measure]]
kind = "AP"
order = 2

[[measure]]
kind = "EOR"
fix = { b = 1 }
"#;

    #[test]
    fn parses_a_full_design() {
        let d = parse_design(DESIGN).unwrap();
        assert_eq!(d.design.psi_true.psi(), &[0.7, 0.0, 0.4]);
        assert_eq!(d.covariates, vec!["z1"]);
        assert_eq!(d.outcome, "y");
        assert_eq!(d.measures.len(), 2);
        assert_eq!(d.measures[1], MeasureRequest { kind: MeasureKind::Eor, order: 1, fixed: vec![("b".into(), true)] });
    }

    #[test]
    fn zero_cases_fail_validation() {
        let err = parse_design(&DESIGN.replace("n1 = 120", "n1 = 0")).unwrap_err();
        assert!(err.contains("n1"), "{err}");
    }

    #[test]
    fn unknown_terms_and_keys_are_rejected() {
        assert!(parse_design(&DESIGN.replace("a = 0.7", "c = 0.7")).is_err());
        assert!(parse_design(&format!("bogus = 1\n{DESIGN}")).is_err());
    }
}
