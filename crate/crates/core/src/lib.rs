//! Additive odds-scale measures of joint effects and interaction among
//! binary risk factors, estimated from case-control data.
//!
//! The pipeline is: fit a logistic model saturated in the risk factors
//! ([`glmfit`]), evaluate excess odds ratio, attributable proportion or
//! synergy index as functions of the fitted log odds ratios
//! ([`oddsmeasures`]), and attach delta-method or bootstrap confidence
//! intervals ([`inference`]).
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below name the double-precision instantiations used by the CLI.

pub mod checks;
pub mod error;
pub mod glmfit;
pub mod inference;
pub mod linalg;
pub mod oddsmeasures;
pub mod scalar;
pub mod simulate;
pub mod subsetcalc;

pub use error::{Error, Result};
pub use glmfit::{
    design_row, fit, fit_from, loglik_and_derivatives, CaseControlDataset, FitOptions, FitResult, FullParams, Record,
};
pub use inference::{
    bootstrap_ci, delta_ci, gradient_abc, gradient_measure, gradients, normal_quantile, transform, CiMethod,
    EstimateReport, GradientVectors, Transform,
};
pub use oddsmeasures::{
    abc, delta_or, measure, odds_ratio, predicted_or, predicted_or_closed, special_case_ueor, ueor, AbcTriple,
    FactorSplit, MeasureKind, MeasureSpec, StructuralParams,
};
pub use scalar::Scalar;
pub use simulate::{simulate, simulate_detailed, true_measure, ConfounderModel, SimDesign, Simulation};
pub use subsetcalc::{
    enumerate_le, incl_excl_sign, indicator_le, pascal_alternating_sum, ExposurePattern, PsiIndexMap,
};

pub type StructuralParams64 = StructuralParams<f64>;
pub type StructuralParams32 = StructuralParams<f32>;
pub type Dataset64 = CaseControlDataset<f64>;
pub type Dataset32 = CaseControlDataset<f32>;
pub type FitResult64 = FitResult<f64>;
pub type FitResult32 = FitResult<f32>;
pub type FitOptions64 = FitOptions<f64>;
pub type EstimateReport64 = EstimateReport<f64>;
pub type SimDesign64 = SimDesign<f64>;
