//! Unconditional logistic regression for case-control data.
//!
//! The linear predictor is saturated in the `p` binary risk factors and
//! linear in the `q` confounders:
//!
//! ```text
//! logit θ = κ0 + Σ_{0 < w <= v} ψ_w + Σ_j κ_j z_j
//! ```
//!
//! Parameters are laid out as `[κ0, ψ (canonical order), κ1..κq]`, which is
//! also the column order of [`design_row`].
//!
//! Records with identical covariate rows are collapsed into weighted cells
//! before fitting. This is exact for the binomial likelihood and makes
//! purely binary designs cost `O(2^p)` per Newton step regardless of `n`.

use crate::error::{Error, Result};
use crate::linalg::{condition_number, Cholesky, SquareMatrix};
use crate::oddsmeasures::StructuralParams;
use crate::scalar::{compensated_sum, logistic, softplus, Scalar};
use crate::subsetcalc::{ExposurePattern, PsiIndexMap};
use indexmap::IndexMap;
use std::sync::Arc;

/// One subject: exposure pattern, confounder values, outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Record<F> {
    pub v: ExposurePattern,
    pub z: Vec<F>,
    pub y: bool,
}

/// A retrospective sample of cases (`y = 1`) and controls (`y = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct CaseControlDataset<F> {
    p: usize,
    q: usize,
    records: Vec<Record<F>>,
}

impl<F: Scalar> CaseControlDataset<F> {
    pub fn new(p: usize, q: usize, records: Vec<Record<F>>) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if r.v.len() != p {
                return Err(Error::InvalidDataset(format!(
                    "record {i}: exposure pattern has length {}, expected {p}",
                    r.v.len()
                )));
            }
            if r.z.len() != q {
                return Err(Error::InvalidDataset(format!(
                    "record {i}: {} confounder values, expected {q}",
                    r.z.len()
                )));
            }
            if let Some(j) = r.z.iter().position(|x| !x.is_finite()) {
                return Err(Error::InvalidDataset(format!("record {i}: confounder {j} is not finite")));
            }
        }
        Ok(Self { p, q, records })
    }

    #[inline]
    pub fn factors(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn confounders(&self) -> usize {
        self.q
    }

    pub fn records(&self) -> &[Record<F>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of cases.
    pub fn n1(&self) -> usize {
        self.records.iter().filter(|r| r.y).count()
    }

    /// Number of controls.
    pub fn n0(&self) -> usize {
        self.len() - self.n1()
    }

    /// Keeps the records whose fixed factors sit at the given levels and
    /// projects their exposure patterns onto `keep` (in the given order).
    pub fn restrict(&self, keep: &[usize], fixed: &[(usize, bool)]) -> Result<Self> {
        let records = self
            .records
            .iter()
            .filter(|r| fixed.iter().all(|&(f, on)| r.v.get(f) == on))
            .map(|r| {
                let mask = keep
                    .iter()
                    .enumerate()
                    .fold(0u32, |m, (t, &f)| if r.v.get(f) { m | 1 << t } else { m });
                Ok(Record { v: ExposurePattern::from_mask(mask, keep.len())?, z: r.z.clone(), y: r.y })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(keep.len(), self.q, records)
    }
}

/// Structural plus nuisance parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FullParams<F> {
    pub psi: StructuralParams<F>,
    /// `κ0` (intercept) first, then one slope per confounder.
    pub kappa: Vec<F>,
}

impl<F: Scalar> FullParams<F> {
    pub fn zeros(p: usize, q: usize) -> Result<Self> {
        Ok(Self { psi: StructuralParams::zeros(p)?, kappa: vec![F::zero(); q + 1] })
    }

    /// Flattened as `[κ0, ψ..., κ1..κq]`.
    pub fn to_vector(&self) -> Vec<F> {
        let mut out = Vec::with_capacity(self.psi.psi().len() + self.kappa.len());
        out.push(self.kappa[0]);
        out.extend_from_slice(self.psi.psi());
        out.extend_from_slice(&self.kappa[1..]);
        out
    }

    pub fn from_vector(map: Arc<PsiIndexMap>, q: usize, x: &[F]) -> Result<Self> {
        let m = map.len();
        if x.len() != m + q + 1 {
            return Err(Error::LengthMismatch { expected: m + q + 1, got: x.len() });
        }
        let psi = StructuralParams::with_map(map, x[1..=m].to_vec())?;
        let mut kappa = vec![x[0]];
        kappa.extend_from_slice(&x[m + 1..]);
        Ok(Self { psi, kappa })
    }
}

/// Row of the design matrix: `[1, 1{w <= v} for each w, z...]`.
pub fn design_row<F: Scalar>(map: &PsiIndexMap, v: &ExposurePattern, z: &[F]) -> Result<Vec<F>> {
    let ind = map.indicator_le(v)?;
    let mut row = Vec::with_capacity(1 + ind.len() + z.len());
    row.push(F::one());
    row.extend(ind.into_iter().map(|b| if b == 1 { F::one() } else { F::zero() }));
    row.extend_from_slice(z);
    Ok(row)
}

/// Newton–Raphson settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions<F> {
    pub max_iter: usize,
    /// Converged when `max|score| <= score_tol * (1 + |loglik|)`.
    pub score_tol: F,
    /// Or when the accepted step's max-norm is at most this.
    pub param_tol: F,
    /// Separation is declared when any coefficient exceeds this magnitude.
    pub coef_bound: F,
    /// Separation is declared when the information's condition number exceeds this.
    pub condition_cap: F,
    pub max_halvings: usize,
}

impl<F: Scalar> Default for FitOptions<F> {
    fn default() -> Self {
        let eps = F::epsilon();
        Self {
            max_iter: 100,
            score_tol: F::lit(1e-8).max(eps * F::lit(1000.0)),
            param_tol: F::lit(1e-10).max(eps * F::lit(10.0)),
            coef_bound: F::lit(15.0),
            condition_cap: F::lit(1e12).min(F::one() / (eps * F::lit(10.0))),
            max_halvings: 40,
        }
    }
}

/// Maximum-likelihood estimates and their asymptotic covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<F> {
    pub params: FullParams<F>,
    /// ψ-block of the inverse of the full observed information.
    pub sigma_psi: SquareMatrix<F>,
    /// Full inverse information, in parameter-vector order.
    pub covariance: SquareMatrix<F>,
    pub loglik: F,
    pub iterations: usize,
    pub converged: bool,
    /// Max-norm of the score at the returned estimate.
    pub gradient_norm: F,
    pub condition_number: F,
    /// A ridge had to be added to factorize the information at some point.
    pub ridge_used: bool,
    pub n0: usize,
    pub n1: usize,
}

impl<F: Scalar> FitResult<F> {
    /// Standard errors of the ψ estimates.
    pub fn psi_standard_errors(&self) -> Vec<F> {
        (0..self.sigma_psi.dim()).map(|i| self.sigma_psi[(i, i)].max(F::zero()).sqrt()).collect()
    }
}

/// Collapsed design: unique covariate rows with case and total counts.
#[derive(Debug, Clone)]
pub(crate) struct CellDesign<F> {
    rows: Vec<Vec<F>>,
    cases: Vec<F>,
    totals: Vec<F>,
    dim: usize,
}

impl<F: Scalar> CellDesign<F> {
    pub(crate) fn new(map: &PsiIndexMap, data: &CaseControlDataset<F>) -> Result<Self> {
        if map.factors() != data.factors() {
            return Err(Error::LengthMismatch { expected: map.factors(), got: data.factors() });
        }
        let mut cells: IndexMap<(u32, Vec<u64>), (usize, usize, usize)> = IndexMap::new();
        for (i, r) in data.records.iter().enumerate() {
            let key = (r.v.mask(), r.z.iter().map(|x| x.as_f64().to_bits()).collect());
            let e = cells.entry(key).or_insert((i, 0, 0));
            e.1 += r.y as usize;
            e.2 += 1;
        }
        let mut rows = Vec::with_capacity(cells.len());
        let mut cases = Vec::with_capacity(cells.len());
        let mut totals = Vec::with_capacity(cells.len());
        for (_, (first, c, t)) in cells {
            let r = &data.records[first];
            rows.push(design_row(map, &r.v, &r.z)?);
            cases.push(F::from_count(c));
            totals.push(F::from_count(t));
        }
        Ok(Self { rows, cases, totals, dim: 1 + map.len() + data.confounders() })
    }

    fn eta(&self, row: &[F], beta: &[F]) -> F {
        row.iter().zip(beta).map(|(&x, &b)| x * b).sum()
    }

    pub(crate) fn loglik(&self, beta: &[F]) -> F {
        compensated_sum(self.rows.iter().zip(&self.cases).zip(&self.totals).map(|((row, &y), &m)| {
            let eta = self.eta(row, beta);
            y * eta - m * softplus(eta)
        }))
    }

    pub(crate) fn evaluate(&self, beta: &[F]) -> (F, Vec<F>, SquareMatrix<F>) {
        let d = self.dim;
        let mut ll = Vec::with_capacity(self.rows.len());
        let mut score = vec![F::zero(); d];
        let mut info = SquareMatrix::zeros(d);
        for ((row, &y), &m) in self.rows.iter().zip(&self.cases).zip(&self.totals) {
            let eta = self.eta(row, beta);
            let theta = logistic(eta);
            ll.push(y * eta - m * softplus(eta));
            let resid = y - m * theta;
            for (s, &x) in score.iter_mut().zip(row) {
                *s = *s + x * resid;
            }
            info.add_outer(row, m * theta * (F::one() - theta));
        }
        info.symmetrize_from_lower();
        (compensated_sum(ll), score, info)
    }

    /// Rejects constant or linearly dependent columns.
    fn check_columns(&self, names: &dyn Fn(usize) -> String) -> Result<()> {
        for col in 1..self.dim {
            let first = self.rows[0][col];
            if self.rows.iter().all(|r| r[col] == first) {
                return Err(Error::SingularDesign(format!("column {} is constant", names(col))));
            }
        }
        let mut gram = SquareMatrix::zeros(self.dim);
        for (row, &m) in self.rows.iter().zip(&self.totals) {
            gram.add_outer(row, m);
        }
        gram.symmetrize_from_lower();
        let scale: Vec<F> = (0..self.dim).map(|i| gram[(i, i)].sqrt()).collect();
        for i in 0..self.dim {
            for j in 0..self.dim {
                gram[(i, j)] = gram[(i, j)] / (scale[i] * scale[j]);
            }
        }
        let threshold = F::epsilon().sqrt() * F::lit(1e-2);
        match Cholesky::new(&gram) {
            Some(ch) if ch.min_pivot() > threshold => Ok(()),
            _ => Err(Error::SingularDesign("design columns are collinear".into())),
        }
    }
}

/// Log-likelihood, score `X^T (y - θ)` and information `X^T W X` at `params`.
pub fn loglik_and_derivatives<F: Scalar>(
    params: &FullParams<F>,
    data: &CaseControlDataset<F>,
) -> Result<(F, Vec<F>, SquareMatrix<F>)> {
    if params.kappa.len() != data.confounders() + 1 {
        return Err(Error::LengthMismatch {
            expected: data.confounders() + 1,
            got: params.kappa.len(),
        });
    }
    let design = CellDesign::new(params.psi.index_map(), data)?;
    Ok(design.evaluate(&params.to_vector()))
}

/// Fits the model from the zero starting point.
pub fn fit<F: Scalar>(data: &CaseControlDataset<F>, options: &FitOptions<F>) -> Result<FitResult<F>> {
    fit_from(data, options, None)
}

/// Fits the model from an optional starting point.
pub fn fit_from<F: Scalar>(
    data: &CaseControlDataset<F>,
    options: &FitOptions<F>,
    start: Option<&FullParams<F>>,
) -> Result<FitResult<F>> {
    let (p, q) = (data.factors(), data.confounders());
    let map = Arc::new(PsiIndexMap::new(p)?);
    let m = map.len();
    let dim = 1 + m + q;
    let (n0, n1) = (data.n0(), data.n1());
    if n1 == 0 {
        return Err(Error::EmptyClass("cases"));
    }
    if n0 == 0 {
        return Err(Error::EmptyClass("controls"));
    }
    if data.len() < dim + 1 {
        return Err(Error::InsufficientData { n: data.len(), needed: dim + 1, params: dim });
    }
    let design = CellDesign::new(&map, data)?;
    let column_name = |c: usize| {
        if c == 0 {
            "intercept".to_string()
        } else if c <= m {
            format!("psi{}", map.pattern(c - 1))
        } else {
            format!("z{}", c - m)
        }
    };
    design.check_columns(&column_name)?;

    let mut beta = match start {
        Some(s) => s.to_vector(),
        None => vec![F::zero(); dim],
    };
    if beta.len() != dim {
        return Err(Error::LengthMismatch { expected: dim, got: beta.len() });
    }
    let mut ridge_used = false;
    let (mut ll, mut score, mut info) = design.evaluate(&beta);
    let mut iterations = 0;
    let mut converged = false;
    let max_norm = |v: &[F]| v.iter().fold(F::zero(), |a, x| a.max(x.abs()));

    while iterations < options.max_iter {
        if max_norm(&score) <= options.score_tol * (F::one() + ll.abs()) {
            converged = true;
            break;
        }
        iterations += 1;
        let step = solve_with_ridge(&info, &score, &mut ridge_used)
            .ok_or_else(|| Error::SingularDesign("information matrix is not positive definite".into()))?;
        // Below this predicted gain the log-likelihood comparison is rounding noise.
        let predicted_gain: F = step.iter().zip(&score).map(|(&a, &b)| a * b).sum::<F>() * F::lit(0.5);
        let noise_floor = F::epsilon() * F::lit(64.0) * (F::one() + ll.abs());
        let mut t = F::one();
        let mut accepted = None;
        for _ in 0..=options.max_halvings {
            let cand: Vec<F> = beta.iter().zip(&step).map(|(&b, &s)| b + t * s).collect();
            let ll_c = design.loglik(&cand);
            if ll_c >= ll || (t == F::one() && predicted_gain <= noise_floor && ll_c.is_finite()) {
                accepted = Some(cand);
                break;
            }
            t = t * F::lit(0.5);
        }
        let Some(cand) = accepted else {
            break;
        };
        if let Some(i) = cand.iter().position(|x| x.abs() > options.coef_bound) {
            return Err(Error::SeparationSuspected(format!(
                "coefficient {} reached {:.3} (bound {})",
                column_name(i),
                cand[i].as_f64(),
                options.coef_bound
            )));
        }
        let change = step.iter().fold(F::zero(), |a, s| a.max((t * *s).abs()));
        beta = cand;
        (ll, score, info) = design.evaluate(&beta);
        if change <= options.param_tol {
            converged = max_norm(&score) <= options.score_tol * (F::one() + ll.abs());
            break;
        }
    }
    let gradient_norm = max_norm(&score);
    if !converged {
        return Err(Error::NoConvergence { iterations, gradient_norm: gradient_norm.as_f64() });
    }

    let cond = condition_number(&info);
    if !(cond <= options.condition_cap) {
        return Err(Error::SeparationSuspected(format!(
            "information condition number {:.3e} exceeds {:.1e}",
            cond.as_f64(),
            options.condition_cap.as_f64()
        )));
    }
    let covariance = invert_with_ridge(&info, &mut ridge_used)
        .ok_or_else(|| Error::SingularDesign("information matrix is not invertible".into()))?;
    let sigma_psi = covariance.block(1..1 + m);
    Ok(FitResult {
        params: FullParams::from_vector(map, q, &beta)?,
        sigma_psi,
        covariance,
        loglik: ll,
        iterations,
        converged,
        gradient_norm,
        condition_number: cond,
        ridge_used,
        n0,
        n1,
    })
}

fn ridged<F: Scalar>(a: &SquareMatrix<F>) -> SquareMatrix<F> {
    let n = a.dim();
    let ridge = F::lit(1e-10) * a.trace() / F::from_count(n);
    let mut r = a.clone();
    for i in 0..n {
        r[(i, i)] = r[(i, i)] + ridge;
    }
    r
}

fn factorize<F: Scalar>(a: &SquareMatrix<F>, ridge_used: &mut bool) -> Option<Cholesky<F>> {
    Cholesky::new(a).or_else(|| {
        *ridge_used = true;
        Cholesky::new(&ridged(a))
    })
}

fn solve_with_ridge<F: Scalar>(a: &SquareMatrix<F>, b: &[F], ridge_used: &mut bool) -> Option<Vec<F>> {
    factorize(a, ridge_used).map(|ch| ch.solve(b))
}

fn invert_with_ridge<F: Scalar>(a: &SquareMatrix<F>, ridge_used: &mut bool) -> Option<SquareMatrix<F>> {
    factorize(a, ridge_used).map(|ch| ch.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_eigenvalues;

    fn pat(bits: &[u8]) -> ExposurePattern {
        ExposurePattern::new(bits).unwrap()
    }

    /// Deterministic small dataset with all four cells of two factors and one covariate.
    fn toy(n_per: usize) -> CaseControlDataset<f64> {
        let mut recs = Vec::new();
        let mut k = 0u64;
        for (bits, rate) in [([0u8, 0u8], 0.3), ([1, 0], 0.5), ([0, 1], 0.55), ([1, 1], 0.75)] {
            for i in 0..n_per {
                k = k.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let z = ((k >> 33) % 1000) as f64 / 500.0 - 1.0;
                let y = (i as f64 / n_per as f64) < rate + 0.1 * z;
                recs.push(Record { v: pat(&bits), z: vec![z], y });
            }
        }
        CaseControlDataset::new(2, 1, recs).unwrap()
    }

    #[test]
    fn design_row_examples() {
        let map2 = PsiIndexMap::new(2).unwrap();
        assert_eq!(design_row(&map2, &pat(&[1, 1]), &[0.5]).unwrap(), vec![1.0, 1.0, 1.0, 1.0, 0.5]);
        assert_eq!(design_row::<f64>(&map2, &pat(&[1, 0]), &[]).unwrap(), vec![1.0, 1.0, 0.0, 0.0]);
        let map1 = PsiIndexMap::new(1).unwrap();
        assert_eq!(design_row(&map1, &pat(&[0]), &[2.0, 3.0]).unwrap(), vec![1.0, 0.0, 2.0, 3.0]);
    }

    #[test]
    fn null_model_loglik() {
        let data = toy(50);
        let params = FullParams::zeros(2, 1).unwrap();
        let (ll, _, info) = loglik_and_derivatives(&params, &data).unwrap();
        assert!((ll + data.len() as f64 * 2f64.ln()).abs() < 1e-9);
        // θ = 1/2 everywhere: the intercept entry of X^T W X is n/4.
        assert!((info[(0, 0)] - data.len() as f64 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn information_is_symmetric_psd() {
        let data = toy(40);
        let map = Arc::new(PsiIndexMap::new(2).unwrap());
        let params = FullParams::from_vector(map, 1, &[0.2, -0.3, 0.5, 0.1, -0.7]).unwrap();
        let (_, _, info) = loglik_and_derivatives(&params, &data).unwrap();
        assert!(info.is_symmetric(0.0));
        let mut state = 7u64;
        for _ in 0..20 {
            let x: Vec<f64> = (0..5)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
                })
                .collect();
            assert!(info.quadratic_form(&x, &x) >= 0.0);
        }
    }

    #[test]
    fn fit_converges_and_score_vanishes() {
        let data = toy(200);
        let fit = fit(&data, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(fit.gradient_norm <= 1e-8 * (1.0 + fit.loglik.abs()));
        let (ll0, _, _) = loglik_and_derivatives(&FullParams::zeros(2, 1).unwrap(), &data).unwrap();
        assert!(fit.loglik >= ll0);
        assert!(fit.sigma_psi.is_symmetric(1e-12));
        let ev = symmetric_eigenvalues(&fit.sigma_psi);
        assert!(ev[0] >= -1e-8 * fit.sigma_psi.trace());
        assert_eq!((fit.n0 + fit.n1), data.len());
    }

    #[test]
    fn sigma_is_block_of_full_inverse_not_inverse_of_block() {
        let data = toy(200);
        let fit = fit(&data, &FitOptions::default()).unwrap();
        let (_, _, info) = loglik_and_derivatives(&fit.params, &data).unwrap();
        let inv_block = Cholesky::new(&info.block(1..4)).unwrap().inverse();
        let diff = (0..3).map(|i| (inv_block[(i, i)] - fit.sigma_psi[(i, i)]).abs()).fold(0.0, f64::max);
        assert!(diff > 1e-6, "with a confounder present the two must differ");
        assert_eq!(fit.sigma_psi, fit.covariance.block(1..4));
    }

    #[test]
    fn complete_separation_is_flagged() {
        let recs: Vec<_> = (0..40)
            .map(|i| {
                let y = i % 2 == 0;
                Record { v: pat(&[y as u8]), z: vec![], y }
            })
            .collect();
        let data = CaseControlDataset::<f64>::new(1, 0, recs).unwrap();
        assert!(matches!(fit(&data, &FitOptions::default()), Err(Error::SeparationSuspected(_))));
    }

    #[test]
    fn constant_and_collinear_columns_are_rejected() {
        // No subject has both factors: the interaction column is all zero.
        let recs: Vec<_> = (0..40)
            .map(|i| Record { v: pat(&[(i % 3 == 1) as u8, (i % 3 == 2) as u8]), z: vec![], y: i % 2 == 0 })
            .collect();
        let data = CaseControlDataset::<f64>::new(2, 0, recs).unwrap();
        assert!(matches!(fit(&data, &FitOptions::default()), Err(Error::SingularDesign(_))));

        let recs: Vec<_> = (0..40)
            .map(|i| {
                let v = (i % 4 == 0) as u8;
                Record { v: pat(&[v]), z: vec![2.0 * v as f64 + 1.0], y: i % 3 == 0 }
            })
            .collect();
        let data = CaseControlDataset::<f64>::new(1, 1, recs).unwrap();
        assert!(matches!(fit(&data, &FitOptions::default()), Err(Error::SingularDesign(_))));
    }

    #[test]
    fn precondition_errors() {
        let recs: Vec<_> = (0..10).map(|i| Record { v: pat(&[(i % 2) as u8]), z: vec![], y: true }).collect();
        let data = CaseControlDataset::<f64>::new(1, 0, recs).unwrap();
        assert_eq!(fit(&data, &FitOptions::default()).unwrap_err(), Error::EmptyClass("controls"));
        let recs = vec![
            Record { v: pat(&[1]), z: vec![], y: true },
            Record { v: pat(&[0]), z: vec![], y: false },
        ];
        let data = CaseControlDataset::<f64>::new(1, 0, recs).unwrap();
        assert!(matches!(fit(&data, &FitOptions::default()), Err(Error::InsufficientData { .. })));
        let bad = CaseControlDataset::<f64>::new(1, 1, vec![Record { v: pat(&[1]), z: vec![f64::NAN], y: true }]);
        assert!(bad.is_err());
    }

    #[test]
    fn max_iter_zero_reports_no_convergence() {
        let data = toy(50);
        let opts = FitOptions { max_iter: 0, ..FitOptions::default() };
        assert!(matches!(fit(&data, &opts), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn restrict_projects_and_filters() {
        let data = toy(10);
        let sub = data.restrict(&[0], &[(1, true)]).unwrap();
        assert_eq!(sub.factors(), 1);
        assert_eq!(sub.len(), 20);
    }

    #[test]
    fn single_precision_fit() {
        let d64 = toy(200);
        let recs: Vec<Record<f32>> = d64
            .records()
            .iter()
            .map(|r| Record { v: r.v, z: r.z.iter().map(|&x| x as f32).collect(), y: r.y })
            .collect();
        let d32 = CaseControlDataset::new(2, 1, recs).unwrap();
        let f32fit = fit(&d32, &FitOptions::default()).unwrap();
        let f64fit = fit(&d64, &FitOptions::default()).unwrap();
        for (a, b) in f32fit.params.psi.psi().iter().zip(f64fit.params.psi.psi()) {
            assert!((*a as f64 - b).abs() < 1e-3);
        }
    }
}
