//! Self-test suites for the algebraic identities the estimators rely on.
//!
//! Each suite draws random structural parameters from a fixed seed and
//! reports the worst discrepancy it saw. The CLI `check` subcommand prints
//! these outcomes.

use crate::inference::gradients;
use crate::oddsmeasures::{
    abc, delta_or, measure, odds_ratio, predicted_or, predicted_or_closed, special_case_ueor, ueor,
    FactorSplit, MeasureKind, MeasureSpec, StructuralParams,
};
use crate::subsetcalc::{full_mask, pascal_alternating_sum, submasks, ExposurePattern};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub worst_error: f64,
    pub tolerance: f64,
}

pub fn random_params<R: Rng>(rng: &mut R, p: usize, bound: f64) -> StructuralParams<f64> {
    let psi = (0..(1usize << p) - 1).map(|_| rng.random_range(-bound..bound)).collect();
    StructuralParams::new(p, psi).expect("valid random parameters")
}

/// Every `(J, vK)` split of `p` factors.
pub fn all_splits(p: usize) -> Vec<FactorSplit> {
    let mut out = Vec::new();
    for j_mask in 1..=full_mask(p) {
        let j: Vec<usize> = (0..p).filter(|&f| j_mask >> f & 1 == 1).collect();
        let k: Vec<usize> = (0..p).filter(|&f| j_mask >> f & 1 == 0).collect();
        for levels in 0..1u32 << k.len() {
            let fixed: Vec<(usize, bool)> = k.iter().enumerate().map(|(t, &f)| (f, levels >> t & 1 == 1)).collect();
            out.push(FactorSplit::new(p, &j, &fixed).expect("valid split"));
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

struct Tally {
    cases: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self { cases: 0, worst: 0.0 }
    }

    fn push(&mut self, err: f64) {
        self.cases += 1;
        if !(err <= self.worst) {
            self.worst = err;
        }
    }

    fn finish(self, name: &'static str, tolerance: f64) -> CheckOutcome {
        CheckOutcome { name, passed: self.worst <= tolerance, cases: self.cases, worst_error: self.worst, tolerance }
    }
}

/// Total magnitude of the odds ratios entering the increments below `v`:
/// `sum_{w <= v} sum_{u <= w} OR_(u, vK)`, i.e. each `OR_(u, vK)` weighted by
/// the `2^{|v| - |u|}` increments it appears in.
///
/// Increments are alternating sums, so rounding error in any identity built
/// from them scales with this mass rather than with the (possibly much
/// smaller) odds ratio on the other side. Relative errors in the identity
/// suites are measured against `max(|target|, term_mass)`.
pub fn term_mass(params: &StructuralParams<f64>, split: &FactorSplit, v: u32) -> f64 {
    let n = v.count_ones();
    submasks(v).map(|u| params.odds_ratio_mask(split.embed(u)) * f64::from(1u32 << (n - u.count_ones()))).sum()
}

fn scaled_error(value: f64, target: f64, mass: f64) -> f64 {
    (value - target).abs() / target.abs().max(mass)
}

/// Worst errors of one identity suite, both scaled by the term mass and
/// relative to the target alone (reported for information).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityErrors {
    pub outcome: CheckOutcome,
    pub worst_unscaled: f64,
}

/// Increments over the sublattice below `vJ` add up to `OR_(vJ, vK)`.
pub fn check_additive_expansion(seed: u64, draws: usize, max_p: usize) -> CheckOutcome {
    additive_expansion_errors(seed, draws, max_p).outcome
}

pub fn additive_expansion_errors(seed: u64, draws: usize, max_p: usize) -> IdentityErrors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let mut unscaled = Tally::new();
    for p in 1..=max_p {
        let splits = all_splits(p);
        for _ in 0..draws {
            let params = random_params(&mut rng, p, 2.0);
            for split in &splits {
                let n = split.j_len();
                for v in 0..=full_mask(n) {
                    let sum: f64 = submasks(v)
                        .map(|w| {
                            let w = ExposurePattern::from_mask(w, n).unwrap();
                            delta_or(&params, split, &w).unwrap()
                        })
                        .sum();
                    let full = split.embed_pattern(&ExposurePattern::from_mask(v, n).unwrap()).unwrap();
                    let or = odds_ratio(&params, &full).unwrap();
                    tally.push(scaled_error(sum, or, term_mass(&params, split, v)));
                    unscaled.push(rel(sum, or));
                }
            }
        }
    }
    IdentityErrors { outcome: tally.finish("additive odds-ratio expansion", 1e-12), worst_unscaled: unscaled.worst }
}

/// Increment-sum prediction equals the binomial closed form (and the OR at full order).
pub fn check_prediction_closed_form(seed: u64, draws: usize, max_p: usize) -> CheckOutcome {
    prediction_closed_form_errors(seed, draws, max_p).outcome
}

pub fn prediction_closed_form_errors(seed: u64, draws: usize, max_p: usize) -> IdentityErrors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let mut unscaled = Tally::new();
    for p in 1..=max_p {
        let splits = all_splits(p);
        for _ in 0..draws {
            let params = random_params(&mut rng, p, 2.0);
            for split in &splits {
                let n = split.j_len();
                for v in 0..=full_mask(n) {
                    let vp = ExposurePattern::from_mask(v, n).unwrap();
                    let mass = term_mass(&params, split, v);
                    for i in 0..=vp.cardinality() {
                        let reference = predicted_or(&params, split, &vp, i).unwrap();
                        let closed = predicted_or_closed(&params, split, &vp, i).unwrap();
                        tally.push(scaled_error(closed, reference, mass));
                        unscaled.push(rel(closed, reference));
                    }
                    let top = predicted_or(&params, split, &vp, vp.cardinality()).unwrap();
                    let or = odds_ratio(&params, &split.embed_pattern(&vp).unwrap()).unwrap();
                    tally.push(scaled_error(top, or, mass));
                    unscaled.push(rel(top, or));
                }
            }
        }
    }
    IdentityErrors { outcome: tally.finish("prediction closed form", 1e-12), worst_unscaled: unscaled.worst }
}

pub fn check_pascal(max_n: usize) -> CheckOutcome {
    let mut tally = Tally::new();
    for n in 1..=max_n {
        for m in 0..n {
            let (l, r) = pascal_alternating_sum(n, m).unwrap();
            tally.push((l - r).abs() as f64);
        }
    }
    tally.finish("alternating binomial identity", 0.0)
}

/// General UEOR against the hand-expanded formulas for |J| <= 3.
pub fn check_special_cases(seed: u64, draws: usize) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    for _ in 0..draws {
        let p = rng.random_range(1..=4usize);
        let params = random_params(&mut rng, p, 2.0);
        for split in all_splits(p).into_iter().filter(|s| s.j_len() <= 3) {
            for i in 1..=split.j_len() {
                let general = ueor(&params, &split, i).unwrap();
                let hand = special_case_ueor(&params, &split, i).unwrap();
                tally.push((general - hand).abs() / general.abs().max(lattice_mass(&params, &split)));
            }
        }
    }
    tally.finish("hand-expanded UEOR formulas", 1e-12)
}

/// `sum_{w <= 1_J} OR_(w, vK)`: the scale of the rounding error in any
/// signed combination of those odds ratios.
pub fn lattice_mass(params: &StructuralParams<f64>, split: &FactorSplit) -> f64 {
    submasks(full_mask(split.j_len())).map(|w| params.odds_ratio_mask(split.embed(w))).sum()
}

/// Analytic A, B, C, D against central finite differences.
pub fn check_gradients(seed: u64, points: usize, step: f64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let kinds = [MeasureKind::OrJoint, MeasureKind::Eor, MeasureKind::Ap, MeasureKind::Si];
    let mut done = 0;
    while done < points {
        let p = rng.random_range(1..=4usize);
        let params = random_params(&mut rng, p, 1.0);
        let splits = all_splits(p);
        let split = splits[rng.random_range(0..splits.len())].clone();
        let kind = kinds[rng.random_range(0..kinds.len())];
        let lo = if kind == MeasureKind::Si { 2 } else { 1 };
        if split.j_len() < lo {
            continue;
        }
        let order = rng.random_range(lo..=split.j_len());
        let spec = MeasureSpec::new(split, order, kind).unwrap();
        let Ok(g) = gradients(&params, &spec) else { continue };
        let t = abc(&params, &spec).unwrap();
        if kind == MeasureKind::Ap && (t.a - t.b).abs() < 1e-6 * t.a.max(t.b) {
            continue;
        }
        let mut fd = [vec![], vec![], vec![], vec![]];
        let mut ok = true;
        for idx in 0..params.psi().len() {
            let x = params.psi()[idx];
            let plus = params.with_coordinate(idx, x + step);
            let minus = params.with_coordinate(idx, x - step);
            let (tp, tm) = (abc(&plus, &spec).unwrap(), abc(&minus, &spec).unwrap());
            fd[0].push((tp.a - tm.a) / (2.0 * step));
            fd[1].push((tp.b - tm.b) / (2.0 * step));
            fd[2].push((tp.c - tm.c) / (2.0 * step));
            match (measure(&plus, &spec), measure(&minus, &spec)) {
                (Ok(mp), Ok(mm)) => fd[3].push((mp - mm) / (2.0 * step)),
                _ => ok = false,
            }
        }
        if !ok {
            continue;
        }
        for (analytic, numeric) in [&g.a, &g.b, &g.c, &g.d].into_iter().zip(&fd) {
            tally.push(vector_rel_error(analytic, numeric));
        }
        done += 1;
    }
    tally.finish("analytic gradients vs finite differences", 1e-6)
}

/// `max |x - y| / max(max |x|, 1e-300)`; zero when both vectors vanish.
pub fn vector_rel_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = analytic.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = analytic.iter().zip(numeric).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// AP stays inside [-1, 1] over every split and order.
///
/// `AP = (a - b) / max(a, b)` with `a, c > 0`, but the predicted odds ratio
/// `b` is an alternating sum and can be negative (protective factors). Then
/// `max(a, b) = a` and `AP = 1 - b / a > 1`, so this suite can report
/// violations; [`check_ap_bound_split`] separates the two regimes.
pub fn check_ap_bound(seed: u64, draws: usize) -> CheckOutcome {
    let (all, _) = check_ap_bound_split(seed, draws);
    all
}

/// Runs the AP bound over the same draws twice: once over every case and
/// once restricted to cases with a nonnegative predicted odds ratio `b`.
pub fn check_ap_bound_split(seed: u64, draws: usize) -> (CheckOutcome, CheckOutcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all = Tally::new();
    let mut nonneg = Tally::new();
    for _ in 0..draws {
        let p = rng.random_range(1..=4usize);
        let params = random_params(&mut rng, p, 2.0);
        for split in all_splits(p) {
            for i in 1..=split.j_len() {
                let spec = MeasureSpec::new(split.clone(), i, MeasureKind::Ap).unwrap();
                let ap = measure(&params, &spec).unwrap();
                let excess = (ap.abs() - 1.0).max(0.0);
                all.push(excess);
                if abc(&params, &spec).unwrap().b >= 0.0 {
                    nonneg.push(excess);
                }
            }
        }
    }
    (all.finish("AP within [-1, 1]", 0.0), nonneg.finish("AP within [-1, 1] when predicted OR >= 0", 0.0))
}

/// All suites at the sizes used by the CLI.
pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    vec![
        check_additive_expansion(seed, 20, 5),
        check_prediction_closed_form(seed.wrapping_add(1), 20, 5),
        check_pascal(12),
        check_special_cases(seed.wrapping_add(2), 100),
        check_gradients(seed.wrapping_add(3), 100, 1e-5),
        check_ap_bound_split(seed.wrapping_add(4), 500).1,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_enumeration_counts() {
        // sum over nonempty J of 2^{|K|} = 3^p - 2^p
        for p in 1..=4 {
            assert_eq!(all_splits(p).len(), 3usize.pow(p as u32) - 2usize.pow(p as u32));
        }
    }

    #[test]
    fn quick_suites_pass() {
        for outcome in [
            check_additive_expansion(1, 3, 3),
            check_prediction_closed_form(2, 3, 3),
            check_pascal(8),
            check_special_cases(3, 10),
            check_gradients(4, 10, 1e-5),
            check_ap_bound_split(5, 20).1,
        ] {
            assert!(outcome.passed, "{outcome:?}");
            assert!(outcome.cases > 0);
        }
    }

    #[test]
    fn ap_exceeds_one_only_through_negative_prediction() {
        let (all, nonneg) = check_ap_bound_split(6, 50);
        assert!(nonneg.passed, "{nonneg:?}");
        assert!(all.cases > nonneg.cases);
        assert!(!all.passed, "protective draws should push AP above 1: {all:?}");
    }
}
