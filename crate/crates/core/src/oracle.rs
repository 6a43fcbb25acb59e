//! Brute-force lower approximation of `H_A` from a sampled graph.
//!
//! A finite sample only ever gives a lower approximation of the supremum, so
//! every comparison here is one-sided and carries an explicit slack. The
//! oracle cannot certify `H_A = +∞`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds::BoundResult;
use crate::error::{check_dim, Error, Result};
use crate::operators::MonotoneOperator;
use crate::par::{self, Exec};
use crate::space::{DualPair, VecN, XReal};

pub const DEFAULT_SEED: u64 = 0x4841_5241;

/// Distance kept from open domain ends by the default box.
pub const BOX_MARGIN: f64 = 1e-6;

/// Half-width of the default box.
pub const BOX_RADIUS: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct GraphSample {
    /// `(y, A y)` pairs.
    pub points: Vec<(VecN, VecN)>,
    pub source: String,
    pub bounds: Vec<(f64, f64)>,
    /// Grid points per coordinate; `None` for random samples.
    pub n_per_dim: Option<usize>,
}

impl GraphSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `[lo, hi]` for every coordinate: the domain cut to `[−10, 10]`, kept
/// `1e-6` away from finite open ends.
pub fn default_box(a: &MonotoneOperator) -> Vec<(f64, f64)> {
    a.domain_box()
        .iter()
        .map(|d| {
            let lo = if d.lo > -BOX_RADIUS { d.lo + BOX_MARGIN } else { -BOX_RADIUS };
            let hi = if d.hi < BOX_RADIUS { d.hi - BOX_MARGIN } else { BOX_RADIUS };
            (lo, hi)
        })
        .collect()
}

pub fn default_n_per_dim(dim: usize) -> usize {
    match dim {
        1 => 4096,
        2 => 257,
        _ => 33,
    }
}

/// Largest grid the escalation will build.
pub fn max_n_per_dim(dim: usize) -> usize {
    match dim {
        1 => (1 << 16) + 1,
        2 => 1025,
        _ => 129,
    }
}

/// Halves the grid step: `n ↦ 2n − 1`, so the refined grid contains the old one.
pub fn refine(n: usize) -> usize {
    2 * n - 1
}

fn check_box(a: &MonotoneOperator, bounds: &[(f64, f64)]) -> Result<()> {
    check_dim(a.dim(), bounds.len())?;
    for (d, &(lo, hi)) in a.domain_box().iter().zip(bounds) {
        if !(lo <= hi) || !d.contains(lo) || !d.contains(hi) {
            return Err(Error::Domain(format!("sample box [{lo}, {hi}] not strictly inside the domain of {}", a.name())));
        }
    }
    Ok(())
}

/// Uniform tensor grid with `n_per_dim` points per coordinate, first coordinate slowest.
pub fn sample_graph(a: &MonotoneOperator, bounds: &[(f64, f64)], n_per_dim: usize, exec: Exec) -> Result<GraphSample> {
    if n_per_dim < 2 {
        return Err(Error::Domain(format!("n_per_dim must be at least 2, got {n_per_dim}")));
    }
    check_box(a, bounds)?;
    let dim = bounds.len();
    let total = u32::try_from(dim)
        .ok()
        .and_then(|d| n_per_dim.checked_pow(d))
        .filter(|&t| t <= 1 << 26)
        .ok_or_else(|| Error::Domain(format!("grid of {n_per_dim}^{dim} points is too large")))?;
    let steps: Vec<f64> = bounds.iter().map(|&(lo, hi)| (hi - lo) / (n_per_dim - 1) as f64).collect();
    let points = par::try_map_range(exec, total, |k| {
        let mut rem = k;
        let mut y = vec![0.0; dim];
        for c in (0..dim).rev() {
            let idx = rem % n_per_dim;
            rem /= n_per_dim;
            y[c] = bounds[c].0 + idx as f64 * steps[c];
        }
        let y = VecN::new(y)?;
        let ys = a.apply(&y)?;
        Ok((y, ys))
    })?;
    Ok(GraphSample { points, source: a.name(), bounds: bounds.to_vec(), n_per_dim: Some(n_per_dim) })
}

/// `count` uniform random points in the box; weaker evidence than a grid.
pub fn sample_graph_random(
    a: &MonotoneOperator,
    bounds: &[(f64, f64)],
    count: usize,
    seed: u64,
    exec: Exec,
) -> Result<GraphSample> {
    check_box(a, bounds)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<Vec<f64>> = (0..count)
        .map(|_| bounds.iter().map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) }).collect())
        .collect();
    let points = par::try_map_range(exec, count, |k| {
        let y = VecN::new(raw[k].clone())?;
        let ys = a.apply(&y)?;
        Ok((y, ys))
    })?;
    Ok(GraphSample { points, source: a.name(), bounds: bounds.to_vec(), n_per_dim: None })
}

/// `max ⟨x − y, y* − u*⟩` over the sample.
pub fn haraux_lower_approx(s: &GraphSample, p: &DualPair, exec: Exec) -> Result<f64> {
    let first = s.points.first().ok_or_else(|| Error::Domain("empty graph sample".into()))?;
    check_dim(first.0.dim(), p.dim())?;
    let (x, u) = (p.x().as_slice(), p.u_star().as_slice());
    let best = par::max_range(exec, s.points.len(), |k| {
        let (y, ys) = &s.points[k];
        y.iter().zip(ys.iter()).zip(x.iter().zip(u)).map(|((yi, ysi), (xi, ui))| (xi - yi) * (ysi - ui)).sum()
    });
    best.ok_or_else(|| Error::NonFinite("every sampled pairing was NaN".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `bound ≤ exact + slack`.
    Pass,
    /// `bound > exact + slack`, or still above the sampled value after escalation.
    Fail,
    /// `bound ≤ sampled value + slack`.
    Consistent,
    /// `bound > sampled value + slack` at the current resolution; the sample may be too coarse.
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Consistent => "consistent",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_ok(self) -> bool {
        matches!(self, Verdict::Pass | Verdict::Consistent)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub verdict: Verdict,
    pub bound: f64,
    /// Exact value or the last sampled lower approximation.
    pub reference: f64,
    pub slack: f64,
    /// `reference + slack − bound`; negative when the check is violated.
    pub margin: f64,
    /// Grid sizes tried, with the sampled value at each.
    pub history: Vec<(usize, f64)>,
    pub note: String,
}

/// Compares against an exact value.
pub fn verify_bound_exact(bound: &BoundResult, exact: XReal, slack: f64) -> VerifyReport {
    let (reference, margin, verdict, note) = match exact.as_finite() {
        Some(e) => {
            let m = e + slack - bound.value;
            (e, m, if m >= 0.0 { Verdict::Pass } else { Verdict::Fail }, String::new())
        }
        None => (f64::INFINITY, f64::INFINITY, Verdict::Pass, "exact value is +inf".to_string()),
    };
    VerifyReport { verdict, bound: bound.value, reference, slack, margin, history: Vec::new(), note }
}

/// One comparison against a sampled lower approximation, without escalation.
pub fn compare_with_sample(bound: f64, approx: f64, slack: f64) -> Verdict {
    if bound <= approx + slack {
        Verdict::Consistent
    } else {
        Verdict::Inconclusive
    }
}

/// Compares against the sampled approximation of `H_A(x, u*)`, refining the
/// grid up to [`max_n_per_dim`] while the result is inconclusive.
pub fn verify_bound_sampled(
    bound: &BoundResult,
    a: &MonotoneOperator,
    p: &DualPair,
    slack: f64,
    bounds: Option<&[(f64, f64)]>,
    n_per_dim: Option<usize>,
    exec: Exec,
) -> Result<VerifyReport> {
    let owned;
    let bounds = match bounds {
        Some(b) => b,
        None => {
            owned = default_box(a);
            &owned
        }
    };
    let cap = max_n_per_dim(a.dim());
    let mut n = n_per_dim.unwrap_or_else(|| default_n_per_dim(a.dim()));
    let mut history = Vec::new();
    loop {
        let approx = haraux_lower_approx(&sample_graph(a, bounds, n, exec)?, p, exec)?;
        history.push((n, approx));
        let verdict = compare_with_sample(bound.value, approx, slack);
        let next = refine(n);
        if verdict == Verdict::Consistent || next > cap {
            let verdict = if verdict == Verdict::Consistent { verdict } else { Verdict::Fail };
            return Ok(VerifyReport {
                verdict,
                bound: bound.value,
                reference: approx,
                slack,
                margin: approx + slack - bound.value,
                history,
                note: "sampled lower approximation; +inf cannot be certified".into(),
            });
        }
        n = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{ScalarLegendre, SeparableFunction};

    fn v(c: &[f64]) -> VecN {
        VecN::from_slice(c).unwrap()
    }

    #[test]
    fn identity_grid() {
        let id = MonotoneOperator::identity(1);
        let s = sample_graph(&id, &[(-1.0, 1.0)], 3, Exec::Sequential).unwrap();
        let pts: Vec<(f64, f64)> = s.points.iter().map(|(y, ys)| (y[0], ys[0])).collect();
        assert_eq!(pts, vec![(-1.0, -1.0), (0.0, 0.0), (1.0, 1.0)]);
    }

    #[test]
    fn burg_grid() {
        let g = MonotoneOperator::gradient(SeparableFunction::uniform(ScalarLegendre::BURG, 1)).unwrap();
        let s = sample_graph(&g, &[(1.0, 2.0)], 2, Exec::Parallel).unwrap();
        assert_eq!(s.points, vec![(v(&[1.0]), v(&[-1.0])), (v(&[2.0]), v(&[-0.5]))]);
        assert!(sample_graph(&g, &[(0.0, 2.0)], 2, Exec::Parallel).is_err());
    }

    #[test]
    fn grid_cardinality() {
        let id = MonotoneOperator::identity(2);
        let s = sample_graph(&id, &[(-1.0, 1.0), (0.0, 3.0)], 7, Exec::Parallel).unwrap();
        assert_eq!(s.len(), 49);
    }

    #[test]
    fn quadratic_sup_is_quarter_square() {
        // sup_y (1 − y) y = 1/4 at y = 1/2
        let id = MonotoneOperator::identity(1);
        let s = sample_graph(&id, &[(-3.0, 3.0)], 4097, Exec::Parallel).unwrap();
        let p = DualPair::scalar(1.0, 0.0).unwrap();
        let approx = haraux_lower_approx(&s, &p, Exec::Parallel).unwrap();
        assert!((approx - 0.25).abs() < 1e-6);
    }

    #[test]
    fn refinement_is_a_superset() {
        let id = MonotoneOperator::identity(1);
        let coarse = sample_graph(&id, &[(-10.0, 10.0)], 65, Exec::Sequential).unwrap();
        let fine = sample_graph(&id, &[(-10.0, 10.0)], refine(65), Exec::Sequential).unwrap();
        for (k, pt) in coarse.points.iter().enumerate() {
            assert_eq!(pt, &fine.points[2 * k]);
        }
    }

    #[test]
    fn empty_sample_is_an_error() {
        let s = GraphSample { points: vec![], source: "none".into(), bounds: vec![], n_per_dim: None };
        assert!(haraux_lower_approx(&s, &DualPair::scalar(0.0, 0.0).unwrap(), Exec::Parallel).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let g = MonotoneOperator::gradient(SeparableFunction::uniform(ScalarLegendre::FERMI_DIRAC, 1)).unwrap();
        let b = default_box(&g);
        let p = DualPair::scalar(0.3, 2.0).unwrap();
        let a = haraux_lower_approx(&sample_graph(&g, &b, 4096, Exec::Sequential).unwrap(), &p, Exec::Sequential);
        let c = haraux_lower_approx(&sample_graph(&g, &b, 4096, Exec::Parallel).unwrap(), &p, Exec::Parallel);
        assert_eq!(a, c);
    }

    #[test]
    fn random_sample_is_reproducible() {
        let id = MonotoneOperator::identity(4);
        let b = vec![(-1.0, 1.0); 4];
        let s1 = sample_graph_random(&id, &b, 100, DEFAULT_SEED, Exec::Parallel).unwrap();
        let s2 = sample_graph_random(&id, &b, 100, DEFAULT_SEED, Exec::Sequential).unwrap();
        assert_eq!(s1, s2);
    }
}
