//! Synthetic case-control data from a known logistic model.
//!
//! Subjects are drawn from a prospective population stream; their outcome is
//! Bernoulli with the model probability. Cases and controls are accepted
//! until the requested counts are reached, then the sample is shuffled.

use crate::error::{Error, Result};
use crate::glmfit::{CaseControlDataset, Record};
use crate::inference::normal_quantile;
use crate::oddsmeasures::{measure, MeasureSpec, StructuralParams};
use crate::scalar::{logistic, Scalar};
use crate::subsetcalc::ExposurePattern;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Distribution of one confounder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConfounderModel {
    Normal { mean: f64, sd: f64 },
    /// Finite support with the given probabilities.
    Discrete { levels: Vec<f64>, probs: Vec<f64> },
}

impl ConfounderModel {
    fn validate(&self, index: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDesign(format!("confounder {index}: {msg}")));
        match self {
            ConfounderModel::Normal { mean, sd } => {
                if !mean.is_finite() || !(sd.is_finite() && *sd >= 0.0) {
                    return bad(format!("normal({mean}, {sd}) is not a valid distribution"));
                }
            }
            ConfounderModel::Discrete { levels, probs } => {
                if levels.is_empty() || levels.len() != probs.len() {
                    return bad("levels and probs must be nonempty and of equal length".into());
                }
                if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || levels.iter().any(|x| !x.is_finite()) {
                    return bad("levels and probs must be finite, probs nonnegative".into());
                }
                if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return bad("probs must sum to 1".into());
                }
            }
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            ConfounderModel::Normal { mean, sd } => {
                let g: f64 = StandardNormal.sample(rng);
                mean + sd * g
            }
            ConfounderModel::Discrete { levels, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (x, p) in levels.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *x;
                    }
                }
                *levels.last().expect("validated nonempty")
            }
        }
    }
}

/// A data-generating design.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDesign<F> {
    pub psi_true: StructuralParams<F>,
    /// `κ0` then one slope per confounder.
    pub kappa_true: Vec<F>,
    /// Marginal exposure probability of each risk factor, in `(0, 1)`.
    pub exposure_probs: Vec<f64>,
    /// Equicorrelation of the Gaussian copula behind the exposures; 0 means independent.
    pub exposure_correlation: f64,
    pub confounders: Vec<ConfounderModel>,
    pub n0: usize,
    pub n1: usize,
    pub seed: u64,
}

/// Simulated sample plus population-stream bookkeeping.
#[derive(Debug, Clone)]
pub struct Simulation<F> {
    pub dataset: CaseControlDataset<F>,
    pub population_draws: usize,
    pub population_cases: usize,
}

const PILOT_DRAWS: usize = 20_000;
const MIN_ACCEPTANCE: f64 = 1e-6;

impl<F: Scalar> SimDesign<F> {
    /// Independent exposures, no confounders.
    pub fn binary(psi_true: StructuralParams<F>, kappa0: F, exposure_probs: Vec<f64>, n0: usize, n1: usize, seed: u64) -> Self {
        Self {
            psi_true,
            kappa_true: vec![kappa0],
            exposure_probs,
            exposure_correlation: 0.0,
            confounders: Vec::new(),
            n0,
            n1,
            seed,
        }
    }

    pub fn factors(&self) -> usize {
        self.psi_true.factors()
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.factors();
        let q = self.confounders.len();
        if self.exposure_probs.len() != p {
            return Err(Error::InvalidDesign(format!(
                "{} exposure probabilities for {p} factors",
                self.exposure_probs.len()
            )));
        }
        if let Some(j) = self.exposure_probs.iter().position(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::InvalidDesign(format!("exposure probability {j} not in (0, 1)")));
        }
        if !(0.0..1.0).contains(&self.exposure_correlation) {
            return Err(Error::InvalidDesign("exposure correlation must lie in [0, 1)".into()));
        }
        if self.kappa_true.len() != q + 1 {
            return Err(Error::InvalidDesign(format!(
                "kappa needs {} entries (intercept + {q} slopes), got {}",
                q + 1,
                self.kappa_true.len()
            )));
        }
        if self.kappa_true.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidDesign("kappa entries must be finite".into()));
        }
        if self.n0 == 0 || self.n1 == 0 {
            return Err(Error::InvalidDesign(format!("need n0, n1 >= 1 (got n0 = {}, n1 = {})", self.n0, self.n1)));
        }
        for (i, c) in self.confounders.iter().enumerate() {
            c.validate(i)?;
        }
        Ok(())
    }
}

struct Sampler<'a, F> {
    design: &'a SimDesign<F>,
    log_or: Vec<F>,
    thresholds: Vec<f64>,
}

impl<'a, F: Scalar> Sampler<'a, F> {
    fn new(design: &'a SimDesign<F>) -> Self {
        Self {
            design,
            log_or: design.psi_true.log_odds_table(),
            thresholds: design.exposure_probs.iter().map(|&p| normal_quantile(p)).collect(),
        }
    }

    fn exposure<R: Rng>(&self, rng: &mut R) -> u32 {
        let rho = self.design.exposure_correlation;
        let mut mask = 0u32;
        if rho == 0.0 {
            for (j, &p) in self.design.exposure_probs.iter().enumerate() {
                if rng.random::<f64>() < p {
                    mask |= 1 << j;
                }
            }
        } else {
            let shared: f64 = StandardNormal.sample(rng);
            for (j, &t) in self.thresholds.iter().enumerate() {
                let own: f64 = StandardNormal.sample(rng);
                if rho.sqrt() * shared + (1.0 - rho).sqrt() * own < t {
                    mask |= 1 << j;
                }
            }
        }
        mask
    }

    /// Draws covariates and returns `(mask, z, θ)`.
    fn subject<R: Rng>(&self, rng: &mut R) -> (u32, Vec<F>, F) {
        let mask = self.exposure(rng);
        let z: Vec<F> = self.design.confounders.iter().map(|c| F::lit(c.draw(rng))).collect();
        let kappa = &self.design.kappa_true;
        let eta = kappa[0] + self.log_or[mask as usize] + z.iter().zip(&kappa[1..]).map(|(&x, &k)| x * k).sum::<F>();
        (mask, z, logistic(eta))
    }
}

/// Simulates a case-control sample; deterministic given the design's seed.
pub fn simulate<F: Scalar>(design: &SimDesign<F>) -> Result<CaseControlDataset<F>> {
    simulate_detailed(design).map(|s| s.dataset)
}

pub fn simulate_detailed<F: Scalar>(design: &SimDesign<F>) -> Result<Simulation<F>> {
    design.validate()?;
    let p = design.factors();
    let sampler = Sampler::new(design);

    // Expected acceptance rates from the mean disease probability.
    let mut pilot = ChaCha8Rng::seed_from_u64(design.seed);
    pilot.set_stream(2);
    let mean_theta = (0..PILOT_DRAWS).map(|_| sampler.subject(&mut pilot).2.as_f64()).sum::<f64>() / PILOT_DRAWS as f64;
    if mean_theta < MIN_ACCEPTANCE {
        return Err(Error::UnreachablePrevalence { class: "cases", rate: mean_theta });
    }
    if 1.0 - mean_theta < MIN_ACCEPTANCE {
        return Err(Error::UnreachablePrevalence { class: "controls", rate: 1.0 - mean_theta });
    }
    let budget = 1_000_000.0 + 50.0 * (design.n1 as f64 / mean_theta + design.n0 as f64 / (1.0 - mean_theta));

    let mut rng = ChaCha8Rng::seed_from_u64(design.seed);
    rng.set_stream(1);
    let mut cases = Vec::with_capacity(design.n1);
    let mut controls = Vec::with_capacity(design.n0);
    let (mut draws, mut population_cases) = (0usize, 0usize);
    while cases.len() < design.n1 || controls.len() < design.n0 {
        if draws as f64 > budget {
            return Err(Error::UnreachablePrevalence { class: "cases", rate: population_cases as f64 / draws as f64 });
        }
        let (mask, z, theta) = sampler.subject(&mut rng);
        let y = rng.random::<f64>() < theta.as_f64();
        draws += 1;
        population_cases += y as usize;
        let pool = if y { (&mut cases, design.n1) } else { (&mut controls, design.n0) };
        if pool.0.len() < pool.1 {
            pool.0.push(Record { v: ExposurePattern::from_mask(mask, p)?, z, y });
        }
    }
    let mut records = controls;
    records.append(&mut cases);
    records.shuffle(&mut rng);
    Ok(Simulation {
        dataset: CaseControlDataset::new(p, design.confounders.len(), records)?,
        population_draws: draws,
        population_cases,
    })
}

/// The measure evaluated at the design's true ψ.
pub fn true_measure<F: Scalar>(design: &SimDesign<F>, spec: &MeasureSpec) -> Result<F> {
    measure(&design.psi_true, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oddsmeasures::{FactorSplit, MeasureKind};

    fn running_design(seed: u64) -> SimDesign<f64> {
        let psi = StructuralParams::new(2, vec![2f64.ln(), 3f64.ln(), 1.5f64.ln()]).unwrap();
        SimDesign::binary(psi, -2.0, vec![0.4, 0.3], 300, 200, seed)
    }

    #[test]
    fn deterministic_given_seed() {
        let a = simulate(&running_design(9)).unwrap();
        let b = simulate(&running_design(9)).unwrap();
        let c = simulate(&running_design(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn exact_class_counts() {
        let d = simulate(&running_design(3)).unwrap();
        assert_eq!((d.n0(), d.n1()), (300, 200));
        // Shuffled: cases are not all at the end.
        assert!(d.records()[..200].iter().any(|r| r.y));
    }

    #[test]
    fn null_population_prevalence_is_half() {
        let psi = StructuralParams::zeros(2).unwrap();
        let design = SimDesign::binary(psi, 0.0, vec![0.5, 0.5], 2000, 2000, 4);
        let s = simulate_detailed(&design).unwrap();
        let n = s.population_draws as f64;
        let phat = s.population_cases as f64 / n;
        assert!((phat - 0.5).abs() <= 3.0 * (0.25 / n).sqrt(), "phat = {phat}");
    }

    #[test]
    fn validation_errors() {
        let mut d = running_design(1);
        d.n1 = 0;
        assert!(matches!(simulate(&d), Err(Error::InvalidDesign(_))));
        let mut d = running_design(1);
        d.exposure_probs[0] = 1.0;
        assert!(matches!(simulate(&d), Err(Error::InvalidDesign(_))));
        let mut d = running_design(1);
        d.kappa_true.push(1.0);
        assert!(matches!(simulate(&d), Err(Error::InvalidDesign(_))));
        let mut d = running_design(1);
        d.kappa_true[0] = -40.0;
        assert!(matches!(simulate(&d), Err(Error::UnreachablePrevalence { class: "cases", .. })));
    }

    #[test]
    fn correlated_exposures_keep_marginals() {
        let psi = StructuralParams::zeros(2).unwrap();
        let mut design = SimDesign::binary(psi, 0.0, vec![0.3, 0.6], 3000, 3000, 8);
        design.exposure_correlation = 0.5;
        let d = simulate(&design).unwrap();
        let n = d.len() as f64;
        let f0 = d.records().iter().filter(|r| r.v.get(0)).count() as f64 / n;
        let f1 = d.records().iter().filter(|r| r.v.get(1)).count() as f64 / n;
        let both = d.records().iter().filter(|r| r.v.get(0) && r.v.get(1)).count() as f64 / n;
        assert!((f0 - 0.3).abs() < 0.03 && (f1 - 0.6).abs() < 0.03);
        assert!(both > f0 * f1 + 0.03, "positive dependence expected");
    }

    #[test]
    fn confounders_are_drawn() {
        let mut design = running_design(5);
        design.confounders = vec![
            ConfounderModel::Normal { mean: 1.0, sd: 0.5 },
            ConfounderModel::Discrete { levels: vec![0.0, 1.0], probs: vec![0.5, 0.5] },
        ];
        design.kappa_true = vec![-2.0, 0.3, -0.4];
        let d = simulate(&design).unwrap();
        assert_eq!(d.confounders(), 2);
        assert!(d.records().iter().all(|r| r.z[1] == 0.0 || r.z[1] == 1.0));
    }

    #[test]
    fn true_measure_examples() {
        let d = running_design(1);
        let split = FactorSplit::all(2).unwrap();
        let ap = true_measure(&d, &MeasureSpec::new(split.clone(), 2, MeasureKind::Ap).unwrap()).unwrap();
        assert!((ap - 5.0 / 9.0).abs() < 1e-12);
        let si = true_measure(&d, &MeasureSpec::new(split.clone(), 2, MeasureKind::Si).unwrap()).unwrap();
        assert!((si - 8.0 / 3.0).abs() < 1e-12);
        let null = SimDesign::binary(StructuralParams::zeros(2).unwrap(), 0.0, vec![0.5, 0.5], 1, 1, 0);
        assert_eq!(true_measure(&null, &MeasureSpec::new(split, 1, MeasureKind::Ap).unwrap()).unwrap(), 0.0);
    }
}
