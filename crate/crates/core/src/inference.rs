//! Confidence intervals for OR / EOR / AP / SI.
//!
//! The delta method propagates the ψ-covariance through the analytic
//! gradient `D = ∂ξ/∂a·A + ∂ξ/∂b·B + ∂ξ/∂c·C` on a range-mapping transform
//! scale. A case/control-stratified percentile bootstrap is provided as an
//! independent check.

use crate::error::{Error, Result};
use crate::glmfit::{fit, CaseControlDataset, FitOptions, FitResult};
use crate::oddsmeasures::{
    abc, lower_patterns, measure, measure_from_abc, prediction_weight, AbcTriple, MeasureKind,
    MeasureSpec, StructuralParams,
};
use crate::scalar::Scalar;
use crate::subsetcalc::full_mask;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Derivatives of `a`, `b`, `c` with respect to ψ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbcGradient<F> {
    pub a: Vec<F>,
    pub b: Vec<F>,
    pub c: Vec<F>,
}

/// `A`, `B`, `C` and the chain-ruled measure gradient `D`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientVectors<F> {
    pub a: Vec<F>,
    pub b: Vec<F>,
    pub c: Vec<F>,
    pub d: Vec<F>,
}

/// Range-mapping transform applied before the normal approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Transform {
    #[serde(rename = "IDENTITY")]
    Identity,
    /// `log((1 + ξ) / (1 - ξ))`, mapping `(-1, 1)` onto the real line.
    #[serde(rename = "ATANH_LIKE")]
    AtanhLike,
    #[serde(rename = "LOG")]
    Log,
}

impl Transform {
    pub fn for_kind(kind: MeasureKind) -> Self {
        match kind {
            MeasureKind::Eor => Transform::Identity,
            MeasureKind::Ap => Transform::AtanhLike,
            MeasureKind::Si | MeasureKind::OrJoint => Transform::Log,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Transform::Identity => "EOR",
            Transform::AtanhLike => "AP",
            Transform::Log => "SI/OR",
        }
    }

    fn in_range<F: Scalar>(self, x: F) -> bool {
        x.is_finite()
            && match self {
                Transform::Identity => true,
                Transform::AtanhLike => x > -F::one() && x < F::one(),
                Transform::Log => x > F::zero(),
            }
    }

    fn check<F: Scalar>(self, x: F) -> Result<()> {
        if self.in_range(x) {
            Ok(())
        } else {
            Err(Error::RangeError { kind: self.name(), value: x.as_f64() })
        }
    }

    pub fn h<F: Scalar>(self, x: F) -> Result<F> {
        self.check(x)?;
        Ok(match self {
            Transform::Identity => x,
            Transform::AtanhLike => ((F::one() + x) / (F::one() - x)).ln(),
            Transform::Log => x.ln(),
        })
    }

    pub fn h_inverse<F: Scalar>(self, y: F) -> F {
        match self {
            Transform::Identity => y,
            Transform::AtanhLike => (y * F::lit(0.5)).tanh(),
            Transform::Log => y.exp(),
        }
    }

    pub fn h_prime<F: Scalar>(self, x: F) -> Result<F> {
        self.check(x)?;
        Ok(match self {
            Transform::Identity => F::one(),
            Transform::AtanhLike => F::lit(2.0) / ((F::one() - x) * (F::one() + x)),
            Transform::Log => F::one() / x,
        })
    }
}

/// The transform triple `(h, h⁻¹, h')` used for a measure kind.
pub fn transform(kind: MeasureKind) -> Transform {
    Transform::for_kind(kind)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CiMethod {
    #[serde(rename = "DELTA")]
    Delta,
    #[serde(rename = "BOOTSTRAP_PERCENTILE")]
    BootstrapPercentile,
}

/// Point estimate and confidence interval for one measure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport<F> {
    pub kind: MeasureKind,
    pub point: F,
    pub transform: Transform,
    /// Standard error of `h(ξ̂)`.
    pub se_transformed: F,
    pub ci_low: F,
    pub ci_high: F,
    pub alpha: F,
    pub method: CiMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates_dropped: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Two-sided critical value `z_{1-α/2}`.
pub fn normal_quantile(prob: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(prob)
}

fn indicator_scaled<F: Scalar>(params: &StructuralParams<F>, u: u32, scale: F, out: &mut [F]) {
    let map = params.index_map();
    for (i, x) in out.iter_mut().enumerate() {
        if map.mask_at(i) & !u == 0 {
            *x = *x + scale;
        }
    }
}

/// `A = a·1_{<=(1,vK)}`, `B` from the closed-form prediction weights, `C = c·1_{<=(0,vK)}`.
pub fn gradient_abc<F: Scalar>(params: &StructuralParams<F>, spec: &MeasureSpec) -> Result<AbcGradient<F>> {
    let t = abc(params, spec)?;
    let split = &spec.split;
    let len = params.psi().len();
    let ones = full_mask(split.j_len());

    let mut a = vec![F::zero(); len];
    indicator_scaled(params, split.embed(ones), t.a, &mut a);
    let mut c = vec![F::zero(); len];
    indicator_scaled(params, split.embed(0), t.c, &mut c);

    let mut b = vec![F::zero(); len];
    let order = spec.order - 1;
    let n = split.j_len();
    if order == n {
        b.copy_from_slice(&a);
    } else {
        for w in lower_patterns(ones, order) {
            let u = split.embed(w);
            let weight = prediction_weight::<F>(n, w.count_ones() as usize, order);
            indicator_scaled(params, u, params.odds_ratio_mask(u) * weight, &mut b);
        }
    }
    Ok(AbcGradient { a, b, c })
}

/// `(∂ξ/∂a, ∂ξ/∂b, ∂ξ/∂c)`. At an AP tie `a = b` the `max = a` branch is used.
pub fn measure_partials<F: Scalar>(kind: MeasureKind, t: AbcTriple<F>) -> Result<(F, F, F)> {
    let AbcTriple { a, b, c } = t;
    let zero = F::zero();
    Ok(match kind {
        MeasureKind::Eor => (F::one() / c, -F::one() / c, -(a - b) / (c * c)),
        MeasureKind::Ap if a >= b => (b / (a * a), -F::one() / a, zero),
        MeasureKind::Ap => (F::one() / b, -a / (b * b), zero),
        MeasureKind::Si => {
            measure_from_abc(kind, t)?;
            let d = b - c;
            (F::one() / d, -(a - c) / (d * d), (a - b) / (d * d))
        }
        MeasureKind::OrJoint => (F::one() / c, zero, -a / (c * c)),
    })
}

/// `D = dξ/dψ` by the chain rule.
pub fn gradient_measure<F: Scalar>(params: &StructuralParams<F>, spec: &MeasureSpec) -> Result<Vec<F>> {
    Ok(gradients(params, spec)?.d)
}

pub fn gradients<F: Scalar>(params: &StructuralParams<F>, spec: &MeasureSpec) -> Result<GradientVectors<F>> {
    let g = gradient_abc(params, spec)?;
    let (da, db, dc) = measure_partials(spec.kind, abc(params, spec)?)?;
    let d = g
        .a
        .iter()
        .zip(&g.b)
        .zip(&g.c)
        .map(|((&x, &y), &z)| da * x + db * y + dc * z)
        .collect();
    Ok(GradientVectors { a: g.a, b: g.b, c: g.c, d })
}

fn check_alpha<F: Scalar>(alpha: F) -> Result<()> {
    if alpha > F::zero() && alpha < F::one() {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha.as_f64()))
    }
}

fn ap_tie_note<F: Scalar>(spec: &MeasureSpec, t: AbcTriple<F>) -> Option<String> {
    (spec.kind == MeasureKind::Ap && (t.a - t.b).abs() < F::lit(1e-9) * t.a.max(t.b))
        .then(|| "AP at a tie a = b: gradient taken on the max = a branch".to_string())
}

/// Delta-method interval on the transformed scale, mapped back.
pub fn delta_ci<F: Scalar>(fit: &FitResult<F>, spec: &MeasureSpec, alpha: F) -> Result<EstimateReport<F>> {
    check_alpha(alpha)?;
    if !fit.converged {
        return Err(Error::NoConvergence { iterations: fit.iterations, gradient_norm: fit.gradient_norm.as_f64() });
    }
    let params = &fit.params.psi;
    let t = abc(params, spec)?;
    let point = measure_from_abc(spec.kind, t)?;
    let d = gradient_measure(params, spec)?;
    let variance = fit.sigma_psi.quadratic_form(&d, &d);
    if variance < F::lit(-1e-10) {
        return Err(Error::NegativeVariance(variance.as_f64()));
    }
    let sigma = variance.max(F::zero()).sqrt();
    let tr = transform(spec.kind);
    let centre = tr.h(point)?;
    let se = tr.h_prime(point)? * sigma;
    let z = F::lit(normal_quantile(1.0 - alpha.as_f64() / 2.0));
    Ok(EstimateReport {
        kind: spec.kind,
        point,
        transform: tr,
        se_transformed: se,
        ci_low: tr.h_inverse(centre - z * se),
        ci_high: tr.h_inverse(centre + z * se),
        alpha,
        method: CiMethod::Delta,
        replicates_used: None,
        replicates_dropped: None,
        notes: ap_tie_note(spec, t).into_iter().collect(),
    })
}

/// Minimum number of bootstrap replicates accepted.
pub const MIN_BOOTSTRAP: usize = 200;

/// Generator for bootstrap replicate `r`: one independent substream per replicate.
pub fn replicate_rng(seed: u64, replicate: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate as u64 + 1);
    rng
}

/// Percentile bootstrap with resampling inside cases and inside controls.
///
/// Replicates whose refit fails or whose measure is undefined are dropped;
/// more than 10% dropped is an error. Results are identical for a given
/// seed whatever the thread count.
pub fn bootstrap_ci<F: Scalar>(
    data: &CaseControlDataset<F>,
    spec: &MeasureSpec,
    alpha: F,
    n_boot: usize,
    seed: u64,
    options: &FitOptions<F>,
) -> Result<EstimateReport<F>> {
    check_alpha(alpha)?;
    if n_boot < MIN_BOOTSTRAP {
        return Err(Error::TooFewReplicates { min: MIN_BOOTSTRAP, got: n_boot });
    }
    let full = fit(data, options)?;
    let point = measure(&full.params.psi, spec)?;
    let t = abc(&full.params.psi, spec)?;

    let records = data.records();
    let cases: Vec<usize> = (0..records.len()).filter(|&i| records[i].y).collect();
    let controls: Vec<usize> = (0..records.len()).filter(|&i| !records[i].y).collect();

    let values: Vec<Option<F>> = (0..n_boot)
        .into_par_iter()
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let mut resampled = Vec::with_capacity(records.len());
            for pool in [&cases, &controls] {
                for _ in 0..pool.len() {
                    resampled.push(records[pool[rng.random_range(0..pool.len())]].clone());
                }
            }
            let boot = CaseControlDataset::new(data.factors(), data.confounders(), resampled).ok()?;
            let f = fit(&boot, options).ok()?;
            measure(&f.params.psi, spec).ok().filter(|x| x.is_finite())
        })
        .collect();

    let mut kept: Vec<F> = values.into_iter().flatten().collect();
    let dropped = n_boot - kept.len();
    if dropped * 10 > n_boot {
        return Err(Error::TooManyFailedReplicates { failed: dropped, total: n_boot });
    }
    kept.sort_by(|a, b| a.partial_cmp(b).expect("finite replicate values"));
    let tr = transform(spec.kind);
    let transformed: Vec<F> = kept.iter().filter_map(|&x| tr.h(x).ok()).collect();
    let se = sample_sd(&transformed);
    let half = alpha.as_f64() / 2.0;
    Ok(EstimateReport {
        kind: spec.kind,
        point,
        transform: tr,
        se_transformed: se,
        ci_low: quantile_sorted(&kept, half),
        ci_high: quantile_sorted(&kept, 1.0 - half),
        alpha,
        method: CiMethod::BootstrapPercentile,
        replicates_used: Some(kept.len()),
        replicates_dropped: Some(dropped),
        notes: ap_tie_note(spec, t).into_iter().collect(),
    })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted<F: Scalar>(sorted: &[F], prob: f64) -> F {
    assert!(!sorted.is_empty(), "quantile of empty sample");
    let h = (sorted.len() - 1) as f64 * prob.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = F::lit(h - lo as f64);
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn sample_sd<F: Scalar>(xs: &[F]) -> F {
    if xs.len() < 2 {
        return F::nan();
    }
    let n = F::from_count(xs.len());
    let mean = xs.iter().copied().sum::<F>() / n;
    let ss: F = xs.iter().map(|&x| (x - mean) * (x - mean)).sum();
    (ss / (n - F::one())).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SquareMatrix;
    use crate::oddsmeasures::FactorSplit;
    use approx::assert_relative_eq;

    fn running() -> StructuralParams<f64> {
        StructuralParams::new(2, vec![2f64.ln(), 3f64.ln(), 1.5f64.ln()]).unwrap()
    }

    fn spec(p: usize, order: usize, kind: MeasureKind) -> MeasureSpec {
        MeasureSpec::new(FactorSplit::all(p).unwrap(), order, kind).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn gradient_examples() {
        let zero = StructuralParams::<f64>::zeros(2).unwrap();
        let g = gradient_abc(&zero, &spec(2, 2, MeasureKind::Eor)).unwrap();
        close(&g.a, &[1.0, 1.0, 1.0]);
        close(&g.c, &[0.0, 0.0, 0.0]);
        close(&g.b, &[1.0, 1.0, 0.0]);
        close(&gradient_measure(&zero, &spec(2, 2, MeasureKind::Eor)).unwrap(), &[0.0, 0.0, 1.0]);

        let ps = running();
        let g = gradients(&ps, &spec(2, 2, MeasureKind::Eor)).unwrap();
        close(&g.b, &[2.0, 3.0, 0.0]);
        close(&g.d, &[7.0, 6.0, 9.0]);
        close(&gradient_measure(&ps, &spec(2, 2, MeasureKind::OrJoint)).unwrap(), &[9.0, 9.0, 9.0]);
    }

    #[test]
    fn gradient_with_fixed_factor_has_nonzero_c() {
        let ps = running();
        let split = FactorSplit::new(2, &[0], &[(1, true)]).unwrap();
        let s = MeasureSpec::new(split, 1, MeasureKind::Eor).unwrap();
        let g = gradient_abc(&ps, &s).unwrap();
        // c = OR_(0,1) = 3, and only ψ_(0,1) lies below (0,1).
        close(&g.c, &[0.0, 3.0, 0.0]);
        close(&g.a, &[9.0, 9.0, 9.0]);
        close(&g.b, &g.c);
    }

    #[test]
    fn transform_examples() {
        let ap = transform(MeasureKind::Ap);
        assert_eq!(ap.h(0.0).unwrap(), 0.0);
        assert_relative_eq!(ap.h(0.5).unwrap(), 3f64.ln(), max_relative = 1e-15);
        assert_eq!(transform(MeasureKind::Si).h(1.0).unwrap(), 0.0);
        assert!(matches!(ap.h(1.0), Err(Error::RangeError { .. })));
        assert!(matches!(ap.h(-1.0), Err(Error::RangeError { .. })));
        assert!(transform(MeasureKind::Si).h(0.0).is_err());
        assert_eq!(transform(MeasureKind::Eor), Transform::Identity);
        assert_eq!(transform(MeasureKind::OrJoint), Transform::Log);
        for &x in &[-0.999f64, -0.3, 0.0, 0.42, 0.999] {
            assert!((ap.h_inverse(ap.h(x).unwrap()) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn z_quantile() {
        assert!((normal_quantile(0.975) - 1.959963984540054).abs() < 1e-9);
        assert!((normal_quantile(0.995) - 2.5758293035489004).abs() < 1e-9);
        assert!((normal_quantile(0.5)).abs() < 1e-12);
    }

    fn fake_fit(psi: StructuralParams<f64>, sigma: SquareMatrix<f64>) -> FitResult<f64> {
        let m = psi.psi().len();
        FitResult {
            params: crate::glmfit::FullParams { psi, kappa: vec![0.0] },
            sigma_psi: sigma,
            covariance: SquareMatrix::identity(m + 1),
            loglik: -1.0,
            iterations: 1,
            converged: true,
            gradient_norm: 0.0,
            condition_number: 1.0,
            ridge_used: false,
            n0: 10,
            n1: 10,
        }
    }

    #[test]
    fn zero_covariance_collapses_interval() {
        let f = fake_fit(running(), SquareMatrix::zeros(3));
        let r = delta_ci(&f, &spec(2, 2, MeasureKind::Ap), 0.05).unwrap();
        assert_eq!(r.se_transformed, 0.0);
        assert_relative_eq!(r.ci_low, r.point, max_relative = 1e-14);
        assert_relative_eq!(r.ci_high, r.point, max_relative = 1e-14);
    }

    #[test]
    fn si_interval_is_exponentiated_log_interval() {
        let mut sigma = SquareMatrix::identity(3);
        sigma[(2, 2)] = 0.04;
        let f = fake_fit(running(), sigma.clone());
        let s = spec(2, 2, MeasureKind::Si);
        let r = delta_ci(&f, &s, 0.05).unwrap();
        let d = gradient_measure(&f.params.psi, &s).unwrap();
        let sd = sigma.quadratic_form(&d, &d).sqrt();
        let z = normal_quantile(0.975);
        let log_se = (1.0 / r.point) * sd;
        assert_eq!(r.ci_low, (r.point.ln() - z * log_se).exp());
        assert_eq!(r.ci_high, (r.point.ln() + z * log_se).exp());
        assert!(r.ci_low > 0.0 && r.ci_low <= r.point && r.point <= r.ci_high);
    }

    #[test]
    fn negative_variance_and_alpha_are_rejected() {
        let mut sigma = SquareMatrix::zeros(3);
        sigma[(2, 2)] = -1.0;
        let f = fake_fit(running(), sigma);
        assert!(matches!(delta_ci(&f, &spec(2, 2, MeasureKind::Eor), 0.05), Err(Error::NegativeVariance(_))));
        let f = fake_fit(running(), SquareMatrix::zeros(3));
        assert!(matches!(delta_ci(&f, &spec(2, 2, MeasureKind::Eor), 1.5), Err(Error::InvalidAlpha(_))));
    }

    #[test]
    fn ap_tie_uses_first_branch_and_notes_it() {
        let zero = StructuralParams::<f64>::zeros(2).unwrap();
        let s = spec(2, 2, MeasureKind::Ap);
        let (da, db, dc) = measure_partials(MeasureKind::Ap, abc(&zero, &s).unwrap()).unwrap();
        assert_eq!((da, db, dc), (1.0, -1.0, 0.0));
        let f = fake_fit(zero, SquareMatrix::identity(3));
        let r = delta_ci(&f, &s, 0.05).unwrap();
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn quantiles() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 3.0);
        assert_eq!(quantile_sorted(&xs, 0.125), 1.5);
        assert_eq!(quantile_sorted(&xs, 1.0), 5.0);
    }

    #[test]
    fn substreams_differ() {
        let a: u64 = replicate_rng(1, 0).random();
        let b: u64 = replicate_rng(1, 1).random();
        let c: u64 = replicate_rng(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
