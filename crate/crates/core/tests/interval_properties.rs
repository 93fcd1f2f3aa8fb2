//! Ordering, range and transform properties of delta-method intervals.

use addodds::linalg::SquareMatrix;
use addodds::{
    delta_ci, gradient_abc, gradient_measure, FactorSplit, FitResult, FullParams, MeasureKind, MeasureSpec,
    StructuralParams, Transform,
};
use proptest::prelude::*;

/// A converged fit carrying the given ψ and ψ-covariance.
fn synthetic_fit(psi: StructuralParams<f64>, sigma: SquareMatrix<f64>) -> FitResult<f64> {
    let dim = psi.psi().len() + 1;
    FitResult {
        params: FullParams { psi, kappa: vec![0.0] },
        sigma_psi: sigma,
        covariance: SquareMatrix::identity(dim),
        loglik: -1.0,
        iterations: 1,
        converged: true,
        gradient_norm: 0.0,
        condition_number: 1.0,
        ridge_used: false,
        n0: 100,
        n1: 100,
    }
}

/// `L L^T / m` for a random lower-triangular `L`: always PSD.
fn psd(entries: &[f64], m: usize) -> SquareMatrix<f64> {
    let mut l = SquareMatrix::zeros(m);
    let mut k = 0;
    for i in 0..m {
        for j in 0..=i {
            l[(i, j)] = entries[k];
            k += 1;
        }
    }
    let mut s = SquareMatrix::zeros(m);
    for i in 0..m {
        for j in 0..m {
            s[(i, j)] = (0..m).map(|t| l[(i, t)] * l[(j, t)]).sum::<f64>() / m as f64;
        }
    }
    s
}

fn kinds() -> impl Strategy<Value = MeasureKind> {
    prop_oneof![Just(MeasureKind::OrJoint), Just(MeasureKind::Eor), Just(MeasureKind::Ap), Just(MeasureKind::Si)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn intervals_are_ordered_and_in_range(
        psi in proptest::collection::vec(-1.5f64..1.5, 7),
        l in proptest::collection::vec(-0.3f64..0.3, 28),
        kind in kinds(),
        order in 1usize..=3,
        alpha in 0.01f64..0.5,
    ) {
        let Ok(spec) = MeasureSpec::new(FactorSplit::all(3).unwrap(), order, kind) else { return Ok(()) };
        let params = StructuralParams::new(3, psi).unwrap();
        let Ok(r) = delta_ci(&synthetic_fit(params, psd(&l, 7)), &spec, alpha) else { return Ok(()) };
        prop_assert!(r.se_transformed >= 0.0);
        prop_assert!(r.ci_low <= r.point && r.point <= r.ci_high, "{:?}", r);
        match kind {
            MeasureKind::Ap => prop_assert!(-1.0 <= r.ci_low && r.ci_high <= 1.0),
            MeasureKind::Si | MeasureKind::OrJoint => prop_assert!(r.ci_low > 0.0),
            MeasureKind::Eor => {}
        }
    }

    #[test]
    fn transforms_round_trip(x in -0.999f64..0.999, y in 1e-3f64..1e3) {
        let ap = Transform::for_kind(MeasureKind::Ap);
        prop_assert!((ap.h_inverse(ap.h(x).unwrap()) - x).abs() <= 1e-12);
        for t in [Transform::for_kind(MeasureKind::Si), Transform::for_kind(MeasureKind::OrJoint)] {
            prop_assert!((t.h_inverse(t.h(y).unwrap()) - y).abs() <= 1e-12 * y);
        }
        let id = Transform::for_kind(MeasureKind::Eor);
        prop_assert_eq!(id.h_inverse(id.h(x * y).unwrap()), x * y);
    }

    #[test]
    fn a_and_c_gradients_are_nonnegative(
        psi in proptest::collection::vec(-2.0f64..2.0, 7),
        fixed_level in any::<bool>(),
        order in 1usize..=2,
    ) {
        let split = FactorSplit::new(3, &[0, 2], &[(1, fixed_level)]).unwrap();
        let spec = MeasureSpec::new(split, order, MeasureKind::Eor).unwrap();
        let params = StructuralParams::new(3, psi).unwrap();
        let g = gradient_abc(&params, &spec).unwrap();
        prop_assert!(g.a.iter().chain(&g.c).all(|&x| x >= 0.0));
        prop_assert!(gradient_measure(&params, &spec).unwrap().iter().all(|x| x.is_finite()));
    }
}
