#![allow(dead_code)]

use haraux_core::functions::{Interval, ScalarLegendre, SeparableFunction};
use haraux_core::{DualPair, VecN};
use proptest::prelude::*;

pub fn catalog() -> Vec<ScalarLegendre> {
    let bases = [
        ScalarLegendre::QUADRATIC,
        ScalarLegendre::BURG,
        ScalarLegendre::BOLTZMANN_SHANNON,
        ScalarLegendre::FERMI_DIRAC,
    ];
    let mut all = bases.to_vec();
    all.extend(bases.iter().map(|b| ScalarLegendre::quad_plus(*b).unwrap()));
    all
}

/// Maps `s ∈ [0, 1]` into a compact piece of an open interval.
pub fn lerp_into(d: Interval, s: f64) -> f64 {
    let lo = if d.lo.is_finite() { d.lo + if d.hi.is_finite() { 0.01 } else { 0.05 } } else { -5.0 };
    let hi = if d.hi.is_finite() { d.hi - if d.lo.is_finite() { 0.01 } else { 0.05 } } else { 5.0 };
    let (lo, hi) = match (d.lo.is_finite(), d.hi.is_finite()) {
        (true, false) => (lo, lo + 5.0),
        (false, true) => (hi - 5.0, hi),
        _ => (lo, hi),
    };
    lo + s * (hi - lo)
}

pub fn v(c: &[f64]) -> VecN {
    VecN::from_slice(c).unwrap()
}

pub fn part() -> impl Strategy<Value = ScalarLegendre> {
    prop::sample::select(catalog())
}

/// A separable catalog function of dimension 1 or 2 with an interior point
/// and an interior dual point.
pub fn function_and_pair() -> impl Strategy<Value = (SeparableFunction, DualPair)> {
    (1usize..=2)
        .prop_flat_map(|n| (prop::collection::vec(part(), n), prop::collection::vec((0.0..=1.0f64, 0.0..=1.0f64), n)))
        .prop_map(|(parts, s)| {
            let x: Vec<f64> = parts.iter().zip(&s).map(|(p, (a, _))| lerp_into(p.dom(), *a)).collect();
            let u: Vec<f64> = parts.iter().zip(&s).map(|(p, (_, b))| lerp_into(p.conj_dom(), *b)).collect();
            (SeparableFunction::new(parts).unwrap(), DualPair::new(v(&x), v(&u)).unwrap())
        })
}

pub fn gamma() -> impl Strategy<Value = f64> {
    prop_oneof![prop::sample::select(vec![0.1, 0.5, 1.0, 2.0, 10.0]), 0.05..20.0f64]
}
