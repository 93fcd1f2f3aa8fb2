//! Odds ratios, additive increments, truncated predictions and the
//! EOR / AP / SI measures, all computed from the structural parameters.
//!
//! Everything here is a function of `psi` alone. Patterns over the factors
//! in `J` are "local": bit `t` refers to the `t`-th factor of `J` in
//! ascending factor order. [`FactorSplit::embed`] lifts them to full-length
//! patterns with the `K` factors held at their fixed levels.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::subsetcalc::{
    binomial, full_mask, parity_sign, submasks, submasks_canonical, zeta_transform,
    ExposurePattern, PsiIndexMap,
};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// The `2^p - 1` log-odds-ratio parameters, indexed by [`PsiIndexMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct StructuralParams<F> {
    map: Arc<PsiIndexMap>,
    psi: Vec<F>,
}

impl<F: Scalar> StructuralParams<F> {
    pub fn new(p: usize, psi: Vec<F>) -> Result<Self> {
        Self::with_map(Arc::new(PsiIndexMap::new(p)?), psi)
    }

    pub fn with_map(map: Arc<PsiIndexMap>, psi: Vec<F>) -> Result<Self> {
        if psi.len() != map.len() {
            return Err(Error::LengthMismatch { expected: map.len(), got: psi.len() });
        }
        if let Some(i) = psi.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteParameter(i));
        }
        Ok(Self { map, psi })
    }

    pub fn zeros(p: usize) -> Result<Self> {
        let map = PsiIndexMap::new(p)?;
        let psi = vec![F::zero(); map.len()];
        Ok(Self { map: Arc::new(map), psi })
    }

    #[inline]
    pub fn factors(&self) -> usize {
        self.map.factors()
    }

    #[inline]
    pub fn psi(&self) -> &[F] {
        &self.psi
    }

    #[inline]
    pub fn index_map(&self) -> &Arc<PsiIndexMap> {
        &self.map
    }

    /// `psi_w` for a nonzero pattern `w`.
    pub fn get(&self, w: &ExposurePattern) -> Option<F> {
        self.map.index_of(w).map(|i| self.psi[i])
    }

    /// Returns a copy with one coordinate replaced.
    pub fn with_coordinate(&self, index: usize, value: F) -> Self {
        let mut psi = self.psi.clone();
        psi[index] = value;
        Self { map: Arc::clone(&self.map), psi }
    }

    /// `log OR_v` for every mask `v` in `0..2^p`, by a subset-sum transform.
    pub fn log_odds_table(&self) -> Vec<F> {
        let mut table = vec![F::zero(); 1 << self.factors()];
        for (i, &x) in self.psi.iter().enumerate() {
            table[self.map.mask_at(i) as usize] = x;
        }
        zeta_transform(&mut table);
        table
    }

    pub(crate) fn odds_ratio_mask(&self, v: u32) -> F {
        let mut terms = Vec::with_capacity(1 << v.count_ones());
        for w in submasks(v).filter(|&w| w != 0) {
            terms.push(self.psi[self.map.index_of_mask(w)]);
        }
        crate::scalar::compensated_sum(terms).exp()
    }
}

/// Partition of the factors into the studied set `J` and the fixed set `K`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorSplit {
    p: usize,
    j: Vec<usize>,
    k: Vec<(usize, bool)>,
    #[serde(skip)]
    k_on: u32,
}

impl FactorSplit {
    /// `j` lists the studied factors (0-based); `fixed` pins every other factor to a level.
    pub fn new(p: usize, j: &[usize], fixed: &[(usize, bool)]) -> Result<Self> {
        if p == 0 || p > crate::subsetcalc::MAX_FACTORS {
            return Err(Error::TooManyFactors(p));
        }
        if j.is_empty() {
            return Err(Error::InvalidSplit("J must be nonempty".into()));
        }
        let mut seen = vec![false; p];
        for &f in j.iter().chain(fixed.iter().map(|(f, _)| f)) {
            if f >= p {
                return Err(Error::InvalidSplit(format!("factor index {f} out of range 0..{p}")));
            }
            if std::mem::replace(&mut seen[f], true) {
                return Err(Error::InvalidSplit(format!("factor {f} appears twice in J and K")));
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidSplit(format!("factor {missing} is in neither J nor K")));
        }
        let mut j = j.to_vec();
        j.sort_unstable();
        let mut k = fixed.to_vec();
        k.sort_unstable();
        let k_on = k.iter().filter(|(_, on)| *on).fold(0u32, |m, (f, _)| m | 1 << f);
        Ok(Self { p, j, k, k_on })
    }

    /// `J` = all factors, `K` empty.
    pub fn all(p: usize) -> Result<Self> {
        Self::new(p, &(0..p).collect::<Vec<_>>(), &[])
    }

    #[inline]
    pub fn factors(&self) -> usize {
        self.p
    }

    pub fn j(&self) -> &[usize] {
        &self.j
    }

    pub fn k(&self) -> &[(usize, bool)] {
        &self.k
    }

    #[inline]
    pub fn j_len(&self) -> usize {
        self.j.len()
    }

    /// Full-length mask of `(w_J, v_K)` for a local mask `w_J` over `J`.
    pub fn embed(&self, local: u32) -> u32 {
        let mut mask = self.k_on;
        for (t, &f) in self.j.iter().enumerate() {
            if local >> t & 1 == 1 {
                mask |= 1 << f;
            }
        }
        mask
    }

    pub fn embed_pattern(&self, local: &ExposurePattern) -> Result<ExposurePattern> {
        self.check_local(local)?;
        ExposurePattern::from_mask(self.embed(local.mask()), self.p)
    }

    fn check_local(&self, local: &ExposurePattern) -> Result<()> {
        if local.len() != self.j.len() {
            return Err(Error::LengthMismatch { expected: self.j.len(), got: local.len() });
        }
        Ok(())
    }

    fn check_params<F: Scalar>(&self, params: &StructuralParams<F>) -> Result<()> {
        if params.factors() != self.p {
            return Err(Error::LengthMismatch { expected: self.p, got: params.factors() });
        }
        Ok(())
    }
}

/// Which function of `(a, b, c)` to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum MeasureKind {
    /// Adjusted joint odds ratio `a / c`.
    #[serde(rename = "OR")]
    OrJoint,
    #[serde(rename = "EOR")]
    Eor,
    #[serde(rename = "AP")]
    Ap,
    #[serde(rename = "SI")]
    Si,
}

impl MeasureKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::OrJoint => "OR",
            MeasureKind::Eor => "EOR",
            MeasureKind::Ap => "AP",
            MeasureKind::Si => "SI",
        }
    }

    /// Smallest admissible order for the kind; the largest is always `|J|`.
    fn min_order(self) -> usize {
        match self {
            MeasureKind::Si => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "OR" | "OR_JOINT" => Ok(MeasureKind::OrJoint),
            "EOR" => Ok(MeasureKind::Eor),
            "AP" => Ok(MeasureKind::Ap),
            "SI" => Ok(MeasureKind::Si),
            other => Err(Error::InvalidSplit(format!("unknown measure kind {other:?}"))),
        }
    }
}

/// A fully specified measure: the split, the order `i` and the kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MeasureSpec {
    pub split: FactorSplit,
    pub order: usize,
    pub kind: MeasureKind,
}

impl MeasureSpec {
    /// Validates the kind-specific order bounds. The order of an `OR` measure
    /// only affects `b`, which the joint odds ratio does not use; it is still
    /// required to lie in `1..=|J|`.
    pub fn new(split: FactorSplit, order: usize, kind: MeasureKind) -> Result<Self> {
        let (lo, hi) = (kind.min_order(), split.j_len());
        if order < lo || order > hi {
            return Err(Error::OrderInvalid { kind: kind.name(), order, lo, hi });
        }
        Ok(Self { split, order, kind })
    }
}

/// `a = OR_(1,vK)`, `b = OR_(1,vK),i-1`, `c = OR_(0,vK)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbcTriple<F> {
    pub a: F,
    pub b: F,
    pub c: F,
}

/// `OR_v = exp(sum_{0 < w <= v} psi_w)`; exactly 1 at `v = 0`.
pub fn odds_ratio<F: Scalar>(params: &StructuralParams<F>, v: &ExposurePattern) -> Result<F> {
    if v.len() != params.factors() {
        return Err(Error::LengthMismatch { expected: params.factors(), got: v.len() });
    }
    Ok(params.odds_ratio_mask(v.mask()))
}

/// Additive increment: `sum_{0 <= w <= vJ} (-1)^{|vJ - w|} OR_(w, vK)`.
pub fn delta_or<F: Scalar>(
    params: &StructuralParams<F>,
    split: &FactorSplit,
    v_j: &ExposurePattern,
) -> Result<F> {
    split.check_params(params)?;
    split.check_local(v_j)?;
    Ok(delta_mask(params, split, v_j.mask()))
}

fn delta_mask<F: Scalar>(params: &StructuralParams<F>, split: &FactorSplit, v: u32) -> F {
    let card = v.count_ones();
    let terms = submasks(v).map(|w| {
        let or = params.odds_ratio_mask(split.embed(w));
        if (card - w.count_ones()) % 2 == 0 {
            or
        } else {
            -or
        }
    });
    crate::scalar::compensated_sum(terms)
}

/// Prediction of `OR_(vJ, vK)` from increments of order at most `i`.
///
/// This is the reference path: the increments are summed directly.
pub fn predicted_or<F: Scalar>(
    params: &StructuralParams<F>,
    split: &FactorSplit,
    v_j: &ExposurePattern,
    order: usize,
) -> Result<F> {
    split.check_params(params)?;
    split.check_local(v_j)?;
    check_prediction_order(v_j, order)?;
    let terms = submasks(v_j.mask())
        .filter(|w| w.count_ones() as usize <= order)
        .map(|w| delta_mask(params, split, w));
    Ok(crate::scalar::compensated_sum(terms))
}

/// Closed-form prediction: a binomially weighted sum of the lower-order odds ratios.
pub fn predicted_or_closed<F: Scalar>(
    params: &StructuralParams<F>,
    split: &FactorSplit,
    v_j: &ExposurePattern,
    order: usize,
) -> Result<F> {
    split.check_params(params)?;
    split.check_local(v_j)?;
    check_prediction_order(v_j, order)?;
    Ok(predicted_closed_mask(params, split, v_j.mask(), order))
}

fn predicted_closed_mask<F: Scalar>(
    params: &StructuralParams<F>,
    split: &FactorSplit,
    v: u32,
    order: usize,
) -> F {
    let n = v.count_ones() as usize;
    if order == n {
        return params.odds_ratio_mask(split.embed(v));
    }
    let terms = submasks(v).filter_map(|w| {
        let card = w.count_ones() as usize;
        (card <= order).then(|| {
            params.odds_ratio_mask(split.embed(w)) * prediction_weight::<F>(n, card, order)
        })
    });
    crate::scalar::compensated_sum(terms)
}

/// `(-1)^{i-|w|} C(|v|-1-|w|, i-|w|)` for `|w| <= i < |v|`.
pub(crate) fn prediction_weight<F: Scalar>(n: usize, card: usize, order: usize) -> F {
    let m = order - card;
    let coef = F::from_u64(binomial(n - 1 - card, m)).expect("binomial fits in scalar");
    if parity_sign(m) > 0 {
        coef
    } else {
        -coef
    }
}

fn check_prediction_order(v_j: &ExposurePattern, order: usize) -> Result<()> {
    let hi = v_j.cardinality();
    if order > hi {
        return Err(Error::OrderInvalid { kind: "prediction", order, lo: 0, hi });
    }
    Ok(())
}

fn check_ueor_order(split: &FactorSplit, order: usize) -> Result<()> {
    let hi = split.j_len();
    if order < 1 || order > hi {
        return Err(Error::OrderInvalid { kind: "UEOR", order, lo: 1, hi });
    }
    Ok(())
}

/// Unadjusted excess odds ratio `OR_(1,vK) - OR_(1,vK),i-1`.
pub fn ueor<F: Scalar>(params: &StructuralParams<F>, split: &FactorSplit, order: usize) -> Result<F> {
    split.check_params(params)?;
    check_ueor_order(split, order)?;
    let ones = full_mask(split.j_len());
    let a = params.odds_ratio_mask(split.embed(ones));
    Ok(a - predicted_closed_mask(params, split, ones, order - 1))
}

/// The `(a, b, c)` triple every measure is a function of.
pub fn abc<F: Scalar>(params: &StructuralParams<F>, spec: &MeasureSpec) -> Result<AbcTriple<F>> {
    let split = &spec.split;
    split.check_params(params)?;
    check_ueor_order(split, spec.order)?;
    let ones = full_mask(split.j_len());
    Ok(AbcTriple {
        a: params.odds_ratio_mask(split.embed(ones)),
        b: predicted_closed_mask(params, split, ones, spec.order - 1),
        c: params.odds_ratio_mask(split.embed(0)),
    })
}

/// Evaluates a measure kind at a given `(a, b, c)`.
pub fn measure_from_abc<F: Scalar>(kind: MeasureKind, t: AbcTriple<F>) -> Result<F> {
    let AbcTriple { a, b, c } = t;
    Ok(match kind {
        MeasureKind::OrJoint => a / c,
        MeasureKind::Eor => (a - b) / c,
        MeasureKind::Ap => (a - b) / a.max(b),
        MeasureKind::Si => {
            if !(a > c && b > c) {
                return Err(Error::SiUndefined);
            }
            (a - c) / (b - c)
        }
    })
}

/// Plug-in value of the measure described by `spec`.
pub fn measure<F: Scalar>(params: &StructuralParams<F>, spec: &MeasureSpec) -> Result<F> {
    measure_from_abc(spec.kind, abc(params, spec)?)
}

/// Hand-expanded UEOR formulas for `|J| <= 3`; an oracle for [`ueor`].
pub fn special_case_ueor<F: Scalar>(
    params: &StructuralParams<F>,
    split: &FactorSplit,
    order: usize,
) -> Result<F> {
    split.check_params(params)?;
    check_ueor_order(split, order)?;
    let or = |bits: &[u8]| {
        let local = bits.iter().enumerate().fold(0u32, |m, (t, &b)| m | (b as u32) << t);
        params.odds_ratio_mask(split.embed(local))
    };
    let two = F::lit(2.0);
    let value = match (split.j_len(), order) {
        (1, 1) => or(&[1]) - or(&[0]),
        (2, 1) => or(&[1, 1]) - or(&[0, 0]),
        (2, 2) => or(&[1, 1]) - or(&[1, 0]) - or(&[0, 1]) + or(&[0, 0]),
        (3, 1) => or(&[1, 1, 1]) - or(&[0, 0, 0]),
        (3, 2) => {
            or(&[1, 1, 1]) - or(&[1, 0, 0]) - or(&[0, 1, 0]) - or(&[0, 0, 1]) + two * or(&[0, 0, 0])
        }
        (3, 3) => {
            or(&[1, 1, 1]) - or(&[1, 1, 0]) - or(&[1, 0, 1]) - or(&[0, 1, 1])
                + or(&[1, 0, 0])
                + or(&[0, 1, 0])
                + or(&[0, 0, 1])
                - or(&[0, 0, 0])
        }
        (j, _) => {
            return Err(Error::InvalidSplit(format!("hand formulas cover |J| <= 3, got {j}")));
        }
    };
    Ok(value)
}

/// Local patterns `w <= vJ` with `|w| <= order`, in canonical order.
pub(crate) fn lower_patterns(v: u32, order: usize) -> impl Iterator<Item = u32> {
    submasks_canonical(v).into_iter().filter(move |w| w.count_ones() as usize <= order)
}
