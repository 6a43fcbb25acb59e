//! Bracketed root finding for strictly increasing scalar maps.
//!
//! Every resolvent in the catalog reduces, coordinate by coordinate, to
//! `g(t) = target` with `g` strictly increasing on an open interval, so a sign
//! change bracket always exists once the target is in the range of `g`.

use super::SolveConfig;
use crate::error::{Error, Result};
use crate::functions::Interval;

/// Relative shrink applied to open domain ends before evaluating there. An
/// end at zero is replaced by the smallest positive normal number, so roots
/// of barrier-type maps far below `1e-13` stay reachable.
pub const DOMAIN_SHRINK: f64 = 1e-13;

/// Points closer than this (relative) to a finite domain end get flagged.
pub const NEAR_BOUNDARY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalarRoot {
    pub t: f64,
    /// `|g(t) − target|`
    pub residual: f64,
    pub near_boundary: bool,
    pub evaluations: usize,
}

fn shrunk(dom: Interval) -> (f64, f64) {
    let margin = |e: f64| (DOMAIN_SHRINK * e.abs()).max(f64::MIN_POSITIVE);
    let lo = if dom.lo.is_finite() { dom.lo + margin(dom.lo) } else { dom.lo };
    let hi = if dom.hi.is_finite() { dom.hi - margin(dom.hi) } else { dom.hi };
    (lo, hi)
}

pub fn is_near_boundary(t: f64, dom: Interval) -> bool {
    (dom.lo.is_finite() && t - dom.lo <= NEAR_BOUNDARY * dom.lo.abs().max(1.0))
        || (dom.hi.is_finite() && dom.hi - t <= NEAR_BOUNDARY * dom.hi.abs().max(1.0))
}

/// Solves `g(t) = target` for `g` strictly increasing on the open interval `dom`.
///
/// Expands from `start` by `cfg.bracket_expand` until the residual changes
/// sign (approaching finite ends geometrically), then runs a bisection/Newton
/// hybrid. `dg` is the derivative of `g`, when known.
pub fn solve_increasing<G, D>(
    g: G,
    dg: Option<D>,
    dom: Interval,
    start: f64,
    target: f64,
    cfg: &SolveConfig,
) -> Result<ScalarRoot>
where
    G: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !target.is_finite() {
        return Err(Error::NonFinite(format!("root-finding target {target}")));
    }
    let (lo, hi) = shrunk(dom);
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty search interval ({}, {})", dom.lo, dom.hi)));
    }
    let tol = cfg.atol * (1.0 + target.abs());
    let mut evals = 0usize;
    let mut r = |t: f64| {
        evals += 1;
        g(t) - target
    };

    let t0 = start.clamp(lo, hi);
    let r0 = r(t0);
    if r0.is_nan() {
        return Err(Error::Domain(format!("map undefined at start point {t0}")));
    }
    if r0.abs() <= tol {
        return Ok(ScalarRoot { t: t0, residual: r0.abs(), near_boundary: is_near_boundary(t0, dom), evaluations: evals });
    }

    // (a, ra) below the root, (b, rb) above it.
    let (mut a, mut ra, mut b, mut rb);
    let expand = cfg.bracket_expand;
    let mut step = t0.abs().max(1.0);
    if r0 < 0.0 {
        a = t0;
        ra = r0;
        let mut k = 0;
        loop {
            k += 1;
            let t = if hi.is_finite() { hi - (hi - t0) / expand.powi(k) } else { t0 + step };
            let t = if k > 4000 || (hi.is_finite() && (t >= hi || hi - t <= f64::EPSILON * hi.abs())) { hi } else { t };
            if !t.is_finite() {
                return Err(Error::NoSolution(format!("target {target} above the range of the map")));
            }
            let rt = r(t);
            if rt >= 0.0 {
                b = t;
                rb = rt;
                break;
            }
            if t == hi {
                return Err(Error::NoSolution(format!(
                    "target {target} not attained inside the open domain ({}, {})",
                    dom.lo, dom.hi
                )));
            }
            a = t;
            ra = rt;
            step *= expand;
        }
    } else {
        b = t0;
        rb = r0;
        let mut k = 0;
        loop {
            k += 1;
            let t = if lo.is_finite() { lo + (t0 - lo) / expand.powi(k) } else { t0 - step };
            let t = if k > 4000 || (lo.is_finite() && (t <= lo || t - lo <= f64::EPSILON * lo.abs())) { lo } else { t };
            if !t.is_finite() {
                return Err(Error::NoSolution(format!("target {target} below the range of the map")));
            }
            let rt = r(t);
            if rt <= 0.0 {
                a = t;
                ra = rt;
                break;
            }
            if t == lo {
                return Err(Error::NoSolution(format!(
                    "target {target} not attained inside the open domain ({}, {})",
                    dom.lo, dom.hi
                )));
            }
            b = t;
            rb = rt;
            step *= expand;
        }
    }

    let best = |a: f64, ra: f64, b: f64, rb: f64| if ra.abs() <= rb.abs() { (a, ra) } else { (b, rb) };
    let (mut t, mut rt) = best(a, ra, b, rb);
    let mut last_abs = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        if rt.abs() <= tol {
            return Ok(ScalarRoot { t, residual: rt.abs(), near_boundary: is_near_boundary(t, dom), evaluations: evals });
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // bracket collapsed to adjacent floats: best representable root
            let (t, rt) = best(a, ra, b, rb);
            return Ok(ScalarRoot { t, residual: rt.abs(), near_boundary: is_near_boundary(t, dom), evaluations: evals });
        }
        let newton = dg.as_ref().and_then(|d| {
            let slope = d(t);
            let cand = t - rt / slope;
            (slope > 0.0 && slope.is_finite() && cand > a && cand < b).then_some(cand)
        });
        // fall back to bisection when Newton is unavailable or stalled
        let cand = match newton {
            Some(c) if rt.abs() < 0.5 * last_abs => c,
            _ => mid,
        };
        last_abs = rt.abs();
        let rc = r(cand);
        if rc.is_nan() {
            return Err(Error::Domain(format!("map undefined at {cand}")));
        }
        if rc < 0.0 {
            a = cand;
            ra = rc;
        } else {
            b = cand;
            rb = rc;
        }
        t = cand;
        rt = rc;
    }
    if rt.abs() <= tol {
        return Ok(ScalarRoot { t, residual: rt.abs(), near_boundary: is_near_boundary(t, dom), evaluations: evals });
    }
    Err(Error::NoConvergence { iterations: cfg.max_iter, residual: rt.abs() })
}
