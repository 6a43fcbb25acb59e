mod common;

use common::*;
use haraux_core::bounds::{bound_pairing, fy_bound_dispatch, Method};
use haraux_core::functions::{ScalarLegendre, SeparableFunction};
use haraux_core::gauges::{kt_gauge_bound, theta_bound, InclusionInstance, KtInstance};
use haraux_core::operators::{Matrix, MonotoneOperator};
use haraux_core::oracle::{
    default_box, haraux_lower_approx, refine, sample_graph, verify_bound_sampled, Verdict,
};
use haraux_core::par::Exec;
use haraux_core::solvers::SolveConfig;
use haraux_core::DualPair;
use proptest::prelude::*;

fn grad_op(p: ScalarLegendre) -> MonotoneOperator {
    MonotoneOperator::gradient(SeparableFunction::uniform(p, 1)).unwrap()
}

fn diag_affine(m: &[f64], b: &[f64]) -> MonotoneOperator {
    MonotoneOperator::affine(Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(m)), v(b)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn refinement_never_lowers_the_approximation(p in part(), n in 3usize..300, s in (0.0..=1.0f64, 0.0..=1.0f64)) {
        let a = grad_op(p);
        let pair = DualPair::scalar(lerp_into(p.dom(), s.0), lerp_into(p.conj_dom(), s.1)).unwrap();
        let bx = default_box(&a);
        let coarse = haraux_lower_approx(&sample_graph(&a, &bx, n, Exec::Parallel).unwrap(), &pair, Exec::Parallel).unwrap();
        let fine = haraux_lower_approx(&sample_graph(&a, &bx, refine(n), Exec::Parallel).unwrap(), &pair, Exec::Parallel).unwrap();
        prop_assert!(fine >= coarse);
    }

    #[test]
    fn sampled_approximation_below_fenchel_young(p in part(), s in (0.0..=1.0f64, 0.0..=1.0f64)) {
        let phi = SeparableFunction::uniform(p, 1);
        let a = grad_op(p);
        let pair = DualPair::scalar(lerp_into(p.dom(), s.0), lerp_into(p.conj_dom(), s.1)).unwrap();
        let approx = haraux_lower_approx(&sample_graph(&a, &default_box(&a), 4097, Exec::Parallel).unwrap(), &pair, Exec::Parallel).unwrap();
        let exact = phi.fenchel_young(&pair).unwrap().value();
        prop_assert!(approx <= exact + 1e-9, "{approx} > {exact}");
    }

    #[test]
    fn identity_approximation_error_is_quadratic_in_the_step(x in -4.0..4.0f64, u in -4.0..4.0f64, n in 5usize..2000) {
        let a = MonotoneOperator::identity(1);
        let bx = [(-10.0, 10.0)];
        let h = 20.0 / (n - 1) as f64;
        let approx = haraux_lower_approx(&sample_graph(&a, &bx, n, Exec::Sequential).unwrap(), &DualPair::scalar(x, u).unwrap(), Exec::Sequential).unwrap();
        let exact = (x - u).powi(2) / 4.0;
        prop_assert!(approx <= exact + 1e-12);
        prop_assert!(exact - approx <= h * h / 4.0 + 1e-12);
    }

    #[test]
    fn sampled_oracle_confirms_burg_bounds(x in 0.2..3.0f64, u in -3.0..-0.3f64, gamma in gamma()) {
        let phi = SeparableFunction::uniform(ScalarLegendre::BURG, 1);
        let a = MonotoneOperator::gradient(phi.clone()).unwrap();
        let pair = DualPair::scalar(x, u).unwrap();
        for m in [Method::Pairing, Method::BurgClosed, Method::LegendreSelf, Method::CarlierHaraux] {
            let r = fy_bound_dispatch(&phi, None, &pair, gamma, m, &SolveConfig::default()).unwrap();
            let rep = verify_bound_sampled(&r, &a, &pair, 1e-6, None, None, Exec::Parallel).unwrap();
            prop_assert_eq!(rep.verdict, Verdict::Consistent, "{} {:?}", m, rep.history);
        }
    }
}

/// Affine KT system with a prescribed solution `(x̄, ȳ)`.
fn kt_with_solution(a: &[f64], b: &[f64], l: &Matrix, xb: &[f64], yb: &[f64], gamma: f64) -> KtInstance {
    let lt_y = l.transpose() * nalgebra::DVector::from_column_slice(yb);
    let lx = l * nalgebra::DVector::from_column_slice(xb);
    let c_off: Vec<f64> = (0..a.len()).map(|i| -lt_y[i] - a[i] * xb[i]).collect();
    let d_off: Vec<f64> = (0..b.len()).map(|i| lx[i] - b[i] * yb[i]).collect();
    KtInstance::hilbert(diag_affine(a, &c_off), diag_affine(b, &d_off), l.clone(), gamma).unwrap()
}

fn kt_case() -> impl Strategy<Value = (KtInstance, Vec<f64>, Vec<f64>)> {
    (1usize..=2, 1usize..=2)
        .prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(0.5..2.0f64, n),
                prop::collection::vec(0.5..2.0f64, m),
                prop::collection::vec(-2.0..2.0f64, n * m),
                prop::collection::vec(-3.0..3.0f64, n),
                prop::collection::vec(-3.0..3.0f64, m),
                0.1..10.0f64,
            )
        })
        .prop_map(|(a, b, l, xb, yb, gamma)| {
            let l = Matrix::from_row_slice(b.len(), a.len(), &l);
            (kt_with_solution(&a, &b, &l, &xb, &yb, gamma), xb, yb)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn kt_gauge_vanishes_only_at_the_solution((inst, xb, yb) in kt_case(), which in 0usize..2) {
        let cfg = SolveConfig::default();
        let at = kt_gauge_bound(&inst, &v(&xb), &v(&yb), &cfg).unwrap();
        prop_assert!(at.value <= 1e-9, "{}", at.value);
        let (mut x, mut y) = (xb.clone(), yb.clone());
        if which == 0 { x[0] += 0.1 } else { y[0] += 0.1 }
        let off = kt_gauge_bound(&inst, &v(&x), &v(&y), &cfg).unwrap();
        prop_assert!(off.value >= 1e-6, "{}", off.value);
    }

    #[test]
    fn kt_gauge_matches_product_space_gauge((inst, xb, yb) in kt_case(), dx in -1.0..1.0f64, dy in -1.0..1.0f64) {
        let cfg = SolveConfig::default();
        let x: Vec<f64> = xb.iter().map(|t| t + dx).collect();
        let y: Vec<f64> = yb.iter().map(|t| t - dy).collect();
        let kt = kt_gauge_bound(&inst, &v(&x), &v(&y), &cfg).unwrap();
        let theta = theta_bound(&inst.as_inclusion().unwrap(), &v(&x).concat(&v(&y)), &cfg).unwrap();
        prop_assert!((kt.value - theta.value).abs() <= 1e-10 * (1.0 + kt.value), "{} vs {}", kt.value, theta.value);
    }

    #[test]
    fn theta_below_sampled_haraux(x in 0.2..3.0f64, u in -3.0..-0.3f64, beta in 0.0..2.0f64, gamma in gamma()) {
        let a = MonotoneOperator::gradient(SeparableFunction::uniform(ScalarLegendre::BURG, 1)).unwrap();
        let b = diag_affine(&[beta], &[-u - beta * x]);
        let inst = InclusionInstance::hilbert(a.clone(), b, gamma).unwrap();
        let r = theta_bound(&inst, &v(&[x]), &SolveConfig::default()).unwrap();
        let pair = DualPair::scalar(x, u).unwrap();
        let direct = bound_pairing(&MonotoneOperator::identity(1), &a, &pair, gamma, &SolveConfig::default()).unwrap();
        prop_assert!((r.value - direct.value).abs() <= 1e-10 * (1.0 + r.value));
        let rep = verify_bound_sampled(&r, &a, &pair, 1e-6, None, None, Exec::Parallel).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::Consistent);
    }
}
