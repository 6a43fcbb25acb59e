mod common;

use common::*;
use haraux_core::functions::{ScalarLegendre, SeparableFunction};
use haraux_core::operators::{monotonicity_probe, Matrix, MonotoneOperator};
use haraux_core::{pairing, DualPair, XReal};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pairing_symmetric_and_bilinear(
        a in prop::collection::vec(-10.0..10.0f64, 3),
        b in prop::collection::vec(-10.0..10.0f64, 3),
        c in prop::collection::vec(-10.0..10.0f64, 3),
        s in -3.0..3.0f64,
    ) {
        let (a, b, c) = (v(&a), v(&b), v(&c));
        let ab = pairing(&a, &b).unwrap();
        prop_assert_eq!(ab, pairing(&b, &a).unwrap());
        let lhs = pairing(&a.axpy(s, &c).unwrap(), &b).unwrap();
        let rhs = ab + s * pairing(&c, &b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs()) + 100.0 * s.abs()));
    }

    #[test]
    fn xreal_addition_laws(
        vals in prop::collection::vec(prop_oneof![(-1e3..1e3f64).prop_map(Some), Just(None)], 3),
    ) {
        // integers keep finite sums exact so associativity is bitwise
        let x: Vec<XReal> = vals
            .iter()
            .map(|o| o.map_or(XReal::INFINITY, |t| XReal::finite(t.round()).unwrap()))
            .collect();
        let l = x[0].try_add(x[1]).unwrap().try_add(x[2]).unwrap();
        let r = x[0].try_add(x[1].try_add(x[2]).unwrap()).unwrap();
        prop_assert_eq!(l, r);
        prop_assert_eq!(x[0].try_add(x[1]).unwrap(), x[1].try_add(x[0]).unwrap());
        prop_assert!(XReal::INFINITY >= x[0]);
    }

    #[test]
    fn gradient_matches_central_difference(p in part(), s in 0.0..=1.0f64) {
        let t = lerp_into(p.dom(), s);
        let h = 1e-6;
        let fd = (p.value(t + h).value() - p.value(t - h).value()) / (2.0 * h);
        prop_assert!((fd - p.deriv(t).unwrap()).abs() <= 1e-5, "{} at {}: {} vs {}", p, t, fd, p.deriv(t).unwrap());
    }

    #[test]
    fn fenchel_young_nonnegative_and_zero_on_graph((f, pair) in function_and_pair()) {
        let l = f.fenchel_young(&pair).unwrap().value();
        prop_assert!(l >= -1e-12, "{}: {}", f.name(), l);
        let on_graph = DualPair::new(pair.x().clone(), f.gradient(pair.x()).unwrap()).unwrap();
        let l0 = f.fenchel_young(&on_graph).unwrap().value();
        prop_assert!(l0.abs() <= 1e-10, "{}: {}", f.name(), l0);
    }

    #[test]
    fn bregman_nonnegative_and_zero_on_diagonal((f, pair) in function_and_pair(), s in 0.0..=1.0f64) {
        let x = pair.x();
        prop_assert_eq!(f.bregman(x, x).unwrap().value(), 0.0);
        let y = x.try_map(|i, _| Ok(lerp_into(f.part(i).dom(), s))).unwrap();
        prop_assert!(f.bregman(x, &y).unwrap().value() >= -1e-12);
    }

    #[test]
    fn inverse_derivative_inverts(p in part(), s in 0.0..=1.0f64) {
        let t = lerp_into(p.dom(), s);
        let back = p.deriv_inv(p.deriv(t).unwrap()).unwrap();
        prop_assert!((back - t).abs() <= 1e-10 * (1.0 + t.abs()), "{}: {} vs {}", p, back, t);
    }

    #[test]
    fn rotation_operator_is_a_rotation(a in -10.0..10.0f64, b in -10.0..10.0f64) {
        let j = MonotoneOperator::joca16(1.0, ScalarLegendre::QUADRATIC).unwrap();
        let r = j.apply(&v(&[a, b])).unwrap();
        prop_assert!((r[0] + b).abs() <= 1e-14 && (r[1] - a).abs() <= 1e-14);
    }

    #[test]
    fn skew_map_is_skew(
        entries in prop::collection::vec(-5.0..5.0f64, 6),
        z in prop::collection::vec(-5.0..5.0f64, 5),
    ) {
        let s = MonotoneOperator::skew(Matrix::from_row_slice(2, 3, &entries)).unwrap();
        let z = v(&z);
        prop_assert!(pairing(&z, &s.apply(&z).unwrap()).unwrap().abs() <= 1e-12);
    }
}

#[test]
fn catalog_operators_are_monotone() {
    let mut ops: Vec<MonotoneOperator> = Vec::new();
    for p in catalog() {
        let f = SeparableFunction::uniform(p, 2);
        ops.push(MonotoneOperator::gradient(f.clone()).unwrap());
        ops.push(MonotoneOperator::inverse_gradient(f).unwrap());
    }
    ops.push(MonotoneOperator::joca16(1.0, ScalarLegendre::QUADRATIC).unwrap());
    ops.push(MonotoneOperator::joca16(2.0, ScalarLegendre::quad_plus(ScalarLegendre::QUADRATIC).unwrap()).unwrap());
    ops.push(MonotoneOperator::skew(Matrix::from_row_slice(1, 1, &[3.0])).unwrap());
    for op in ops {
        let bounds: Vec<(f64, f64)> = op.domain_box().iter().map(|d| (lerp_into(*d, 0.0), lerp_into(*d, 1.0))).collect();
        let r = monotonicity_probe(&op, &bounds, 2000, None, 0x4841_5241).unwrap();
        assert!(r.min_pairing >= -1e-9, "{}: {}", op.name(), r.min_pairing);
    }
}
