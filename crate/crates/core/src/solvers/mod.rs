//! Resolvent-type solves `W z + γ A z = rhs`.
//!
//! Separable pairs are solved coordinate by coordinate (closed forms first,
//! bracketed root finding otherwise). Block-diagonal pairs are split. The
//! rotation-type operator has a closed form for matching kernels; anything
//! else goes through damped Newton with an LU solve.

pub mod lambert;
pub mod scalar;

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::functions::{Base, Interval, ScalarLegendre, SeparableFunction};
use crate::operators::{Matrix, MonotoneOperator, ScalarOp};
use crate::par::{self, Exec};
use crate::space::VecN;

use scalar::{is_near_boundary, solve_increasing};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveConfig {
    pub atol: f64,
    pub max_iter: usize,
    pub bracket_expand: f64,
    /// Use catalog closed forms where available; `false` forces the numeric path.
    pub prefer_closed_form: bool,
    /// Policy for coordinatewise solves.
    pub exec: Exec,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { atol: 1e-12, max_iter: 200, bracket_expand: 2.0, prefer_closed_form: true, exec: Exec::Parallel }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(Error::Domain(format!("atol must be positive, got {}", self.atol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Domain("max_iter must be at least 1".into()));
        }
        if !(self.bracket_expand > 1.0 && self.bracket_expand.is_finite()) {
            return Err(Error::Domain(format!("bracket_expand must exceed 1, got {}", self.bracket_expand)));
        }
        Ok(())
    }

    pub fn numeric_only(self) -> Self {
        SolveConfig { prefer_closed_form: false, ..self }
    }

    pub fn sequential(self) -> Self {
        SolveConfig { exec: Exec::Sequential, ..self }
    }
}

/// `W z + γ A z = rhs`.
#[derive(Clone, Copy, Debug)]
pub struct ResolventProblem<'a> {
    pub w: &'a MonotoneOperator,
    pub a: &'a MonotoneOperator,
    pub gamma: f64,
    pub rhs: &'a VecN,
}

impl<'a> ResolventProblem<'a> {
    pub fn new(w: &'a MonotoneOperator, a: &'a MonotoneOperator, gamma: f64, rhs: &'a VecN) -> Result<Self> {
        check_gamma(gamma)?;
        check_dim(w.dim(), a.dim())?;
        check_dim(w.dim(), rhs.dim())?;
        Ok(ResolventProblem { w, a, gamma, rhs })
    }

    /// `‖W z + γ A z − rhs‖_∞`.
    pub fn residual(&self, z: &VecN) -> Result<f64> {
        let lhs = self.w.apply(z)?.axpy(self.gamma, &self.a.apply(z)?)?;
        Ok(lhs.sub(self.rhs)?.norm_inf())
    }

    /// The tolerance the residual contract promises.
    pub fn tolerance(&self, cfg: &SolveConfig) -> f64 {
        cfg.atol * (1.0 + self.rhs.norm_inf())
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("gamma must be a positive real, got {gamma}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub z: VecN,
    /// Post-hoc `‖W z + γ A z − rhs‖_∞`.
    pub residual: f64,
    /// Some coordinate of `z` lies within the boundary tolerance of a finite domain end.
    pub near_boundary: bool,
    /// Name of the closed form used, if every coordinate came from one.
    pub closed_form: Option<&'static str>,
}

pub fn solve_resolvent(p: &ResolventProblem<'_>, cfg: &SolveConfig) -> Result<Solution> {
    cfg.validate()?;
    check_gamma(p.gamma)?;
    check_dim(p.w.dim(), p.a.dim())?;
    check_dim(p.w.dim(), p.rhs.dim())?;
    let (z, closed_form) = solve_inner(p.w, p.a, p.gamma, p.rhs, cfg)?;
    let residual = p.residual(&z)?;
    let near_boundary = p
        .w
        .domain_box()
        .iter()
        .zip(p.a.domain_box())
        .zip(z.iter())
        .any(|((dw, da), &t)| is_near_boundary(t, dw.intersect(&da)));
    Ok(Solution { z, residual, near_boundary, closed_form })
}

fn solve_inner(
    w: &MonotoneOperator,
    a: &MonotoneOperator,
    gamma: f64,
    rhs: &VecN,
    cfg: &SolveConfig,
) -> Result<(VecN, Option<&'static str>)> {
    if w.is_separable() && a.is_separable() {
        return solve_separable(w, a, gamma, rhs, cfg);
    }
    if let MonotoneOperator::Product(a1, a2) = a {
        if let Some((w1, w2)) = split_operator(w, a1.dim()) {
            let (r1, r2) = rhs.split(a1.dim())?;
            let (z1, c1) = solve_inner(&w1, a1, gamma, &r1, cfg)?;
            let (z2, c2) = solve_inner(&w2, a2, gamma, &r2, cfg)?;
            let closed = if c1.is_some() && c2.is_some() { c1 } else { None };
            return Ok((z1.concat(&z2), closed));
        }
    }
    if cfg.prefer_closed_form {
        if let Some(z) = joca16_closed(w, a, gamma, rhs)? {
            return Ok((z, Some("joca16")));
        }
        if let Some(z) = affine_closed(w, a, gamma, rhs)? {
            return Ok((z, Some("linear")));
        }
    }
    Ok((newton(w, a, gamma, rhs, None, cfg)?, None))
}

/// Splits an operator into blocks acting on the first `k` and remaining coordinates.
fn split_operator(op: &MonotoneOperator, k: usize) -> Option<(MonotoneOperator, MonotoneOperator)> {
    if k == 0 || k >= op.dim() {
        return None;
    }
    let split_fn = |f: &SeparableFunction| {
        let (p1, p2) = f.parts().split_at(k);
        Some((SeparableFunction::new(p1.to_vec()).ok()?, SeparableFunction::new(p2.to_vec()).ok()?))
    };
    match op {
        MonotoneOperator::Product(a, b) if a.dim() == k => Some(((**a).clone(), (**b).clone())),
        MonotoneOperator::Gradient(f) => split_fn(f).map(|(f1, f2)| (MonotoneOperator::Gradient(f1), MonotoneOperator::Gradient(f2))),
        MonotoneOperator::Subdifferential(f) => {
            split_fn(f).map(|(f1, f2)| (MonotoneOperator::Subdifferential(f1), MonotoneOperator::Subdifferential(f2)))
        }
        MonotoneOperator::InverseGradient(f) => {
            split_fn(f).map(|(f1, f2)| (MonotoneOperator::InverseGradient(f1), MonotoneOperator::InverseGradient(f2)))
        }
        MonotoneOperator::Affine { m, b } => {
            let n = m.nrows();
            let coupled = m.view((0, k), (k, n - k)).iter().any(|&v| v != 0.0)
                || m.view((k, 0), (n - k, k)).iter().any(|&v| v != 0.0);
            if coupled {
                return None;
            }
            let (b1, b2) = b.split(k).ok()?;
            Some((
                MonotoneOperator::Affine { m: m.view((0, 0), (k, k)).into_owned(), b: b1 },
                MonotoneOperator::Affine { m: m.view((k, k), (n - k, n - k)).into_owned(), b: b2 },
            ))
        }
        _ => None,
    }
}

fn solve_separable(
    w: &MonotoneOperator,
    a: &MonotoneOperator,
    gamma: f64,
    rhs: &VecN,
    cfg: &SolveConfig,
) -> Result<(VecN, Option<&'static str>)> {
    let n = rhs.dim();
    let coords = par::try_map_range(cfg.exec, n, |i| {
        let wi = w.coordinate_map(i).expect("separable kernel");
        let ai = a.coordinate_map(i).expect("separable operator");
        solve_coordinate(wi, ai, gamma, rhs[i], cfg).map_err(|e| e.context(&format!("coordinate {i}")))
    })?;
    let closed = coords.first().and_then(|c| c.1).filter(|name| coords.iter().all(|c| c.1 == Some(*name)));
    let closed = closed.or_else(|| coords.iter().all(|c| c.1.is_some()).then_some("mixed"));
    Ok((VecN::new(coords.into_iter().map(|c| c.0).collect())?, closed))
}

/// Closed form for one coordinate of `w(t) + γ a(t) = s`, if the catalog has one.
pub fn closed_form_coordinate(wi: ScalarOp, ai: ScalarOp, gamma: f64, s: f64) -> Option<(f64, &'static str)> {
    const ID: ScalarOp = ScalarOp::Deriv(ScalarLegendre::QUADRATIC);
    match (wi, ai) {
        (ScalarOp::Linear { slope: ws, offset: wb }, ScalarOp::Linear { slope: as_, offset: ab }) => {
            Some(((s - wb - gamma * ab) / (ws + gamma * as_), "linear"))
        }
        (w, ScalarOp::Linear { slope, offset }) if w == ID => Some(((s - gamma * offset) / (1.0 + gamma * slope), "linear")),
        (ScalarOp::Linear { slope, offset }, a) if a == ID => Some(((s - offset) / (slope + gamma), "linear")),
        (w, ScalarOp::Deriv(phi)) if w == ID && phi.has_closed_prox() => {
            let name = match (phi.is_quad_plus(), phi.base()) {
                (false, Base::Burg) => "burg_prox",
                (false, Base::BoltzmannShannon) => "lambert_prox",
                _ => "prox",
            };
            phi.prox(gamma, s, &SolveConfig::default()).ok().map(|t| (t, name))
        }
        // quad_plus inverses without a closed prox are themselves numeric solves
        (ScalarOp::Deriv(f), ScalarOp::Deriv(phi)) if f == phi && f.is_legendre() && f.has_closed_prox() => {
            let name = if f == ScalarLegendre::BURG { "burg_closed" } else { "legendre_self" };
            f.deriv_inv(s / (1.0 + gamma)).ok().map(|t| (t, name))
        }
        (ScalarOp::Deriv(f), ScalarOp::Deriv(phi))
            if f == ScalarLegendre::FERMI_DIRAC && phi == ScalarLegendre::BOLTZMANN_SHANNON && gamma == 1.0 =>
        {
            Some((fermi_dirac_zeta(s), "fermi_dirac_closed"))
        }
        _ => None,
    }
}

/// Root of `ln(ζ/(1−ζ)) + ln ζ = s`, i.e. `ζ²/(1−ζ) = a` with `a = e^s`:
/// `ζ = −a/2 + √(a²/4 + a)`, written as `2/(1 + √(1 + 4/a))` to avoid cancellation.
pub fn fermi_dirac_zeta(s: f64) -> f64 {
    // 4/a = 4e^{−s}
    let q = 4.0 * (-s).exp();
    if q.is_finite() {
        2.0 / (1.0 + (1.0 + q).sqrt())
    } else {
        // a → 0: ζ ≈ √a
        (0.5 * s).exp()
    }
}

fn solve_coordinate(wi: ScalarOp, ai: ScalarOp, gamma: f64, s: f64, cfg: &SolveConfig) -> Result<(f64, Option<&'static str>)> {
    if cfg.prefer_closed_form {
        if let Some((t, name)) = closed_form_coordinate(wi, ai, gamma, s) {
            let dom = wi.dom().intersect(&ai.dom());
            if t.is_finite() && (dom.contains(t) || dom.lo == t || dom.hi == t) {
                return Ok((t, Some(name)));
            }
        }
    }
    let dom = wi.dom().intersect(&ai.dom());
    if dom.is_empty() {
        return Err(Error::Domain("kernel and operator domains do not intersect".into()));
    }
    let start = match wi {
        ScalarOp::Deriv(f) => f.deriv_inv(s / (1.0 + gamma)).ok().filter(|&t| dom.contains(t)),
        _ => None,
    }
    .unwrap_or_else(|| dom.anchor());
    let root = solve_increasing(
        |t| wi.eval(t) + gamma * ai.eval(t),
        Some(|t| wi.slope(t) + gamma * ai.slope(t)),
        dom,
        start,
        s,
        cfg,
    )?;
    Ok((root.t, None))
}

/// `W = ∇(ψ ⊕ ψ)` against the rotation-type operator built from the same `ψ`.
fn joca16_closed(w: &MonotoneOperator, a: &MonotoneOperator, gamma: f64, rhs: &VecN) -> Result<Option<VecN>> {
    let MonotoneOperator::Joca16 { beta, psi } = a else { return Ok(None) };
    let Some(f) = w.potential() else { return Ok(None) };
    if f.uniform_part() != Some(*psi) {
        return Ok(None);
    }
    let (s1, s2) = (rhs[0], rhs[1]);
    // W z + γ A z = ((1−γ)ψ'(z₁) + γβz₁ − γz₂, (1−γ)ψ'(z₂) + γβz₂ + γz₁)
    let d = if gamma == 1.0 {
        *beta
    } else {
        let slope = if *psi == ScalarLegendre::QUADRATIC {
            1.0
        } else if *psi == ScalarLegendre::quad_plus(ScalarLegendre::QUADRATIC)? {
            2.0
        } else {
            return Ok(None);
        };
        slope + gamma * (beta - slope)
    };
    let det = d * d + gamma * gamma;
    Ok(Some(VecN::new(vec![(d * s1 + gamma * s2) / det, (d * s2 - gamma * s1) / det])?))
}

fn affine_closed(w: &MonotoneOperator, a: &MonotoneOperator, gamma: f64, rhs: &VecN) -> Result<Option<VecN>> {
    let linear = |op: &MonotoneOperator| -> Option<(Matrix, DVector<f64>)> {
        match op {
            MonotoneOperator::Affine { m, b } => Some((m.clone(), DVector::from_column_slice(b.as_slice()))),
            MonotoneOperator::SkewPd { .. } => {
                let n = op.dim();
                Some((op.jacobian(&VecN::zeros(n)).ok()?, DVector::zeros(n)))
            }
            _ if op.is_identity() => Some((Matrix::identity(op.dim(), op.dim()), DVector::zeros(op.dim()))),
            _ => None,
        }
    };
    let (Some((mw, bw)), Some((ma, ba))) = (linear(w), linear(a)) else { return Ok(None) };
    let lhs = mw + ma * gamma;
    let r = DVector::from_column_slice(rhs.as_slice()) - bw - ba * gamma;
    match lhs.lu().solve(&r) {
        Some(z) => Ok(Some(VecN::new(z.iter().copied().collect())?)),
        None => Err(Error::NoSolution("singular linear resolvent system".into())),
    }
}

/// Damped Newton on `F(z) = W z + γ A z − rhs`, keeping iterates in the open domain.
pub fn newton(
    w: &MonotoneOperator,
    a: &MonotoneOperator,
    gamma: f64,
    rhs: &VecN,
    start: Option<&VecN>,
    cfg: &SolveConfig,
) -> Result<VecN> {
    let dom: Vec<Interval> = w.domain_box().iter().zip(a.domain_box()).map(|(x, y)| x.intersect(&y)).collect();
    let inside = |z: &VecN| z.iter().zip(&dom).all(|(&t, d)| d.contains(t));
    let mut z = match start {
        Some(s) if inside(s) => s.clone(),
        _ => {
            let guess = w
                .potential()
                .and_then(|f| rhs.scale(1.0 / (1.0 + gamma)).ok().and_then(|v| f.conj_gradient(&v).ok()))
                .filter(|g| inside(g));
            match guess {
                Some(g) => g,
                None => VecN::new(dom.iter().map(|d| d.anchor()).collect())?,
            }
        }
    };
    let tol = cfg.atol * (1.0 + rhs.norm_inf());
    let resid = |z: &VecN| -> Result<VecN> { w.apply(z)?.axpy(gamma, &a.apply(z)?)?.sub(rhs) };
    let mut r = resid(&z)?;
    for _ in 0..cfg.max_iter {
        let rn = r.norm();
        if r.norm_inf() <= tol {
            return Ok(z);
        }
        let jac = w.jacobian(&z)? + a.jacobian(&z)? * gamma;
        let Some(step) = jac.lu().solve(&DVector::from_column_slice(r.as_slice())) else {
            return Err(Error::NoSolution("singular Jacobian in resolvent solve".into()));
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = z.iter().zip(step.iter()).map(|(zi, di)| zi - t * di).collect();
            if let Ok(c) = VecN::new(cand) {
                if inside(&c) {
                    let rc = resid(&c)?;
                    if rc.norm() <= (1.0 - 1e-4 * t) * rn || rc.norm_inf() <= tol {
                        z = c;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            if r.norm_inf() <= 1e3 * tol {
                // stagnated at rounding level
                return Ok(z);
            }
            return Err(Error::NoConvergence { iterations: cfg.max_iter, residual: r.norm_inf() });
        }
    }
    if r.norm_inf() <= tol {
        Ok(z)
    } else {
        Err(Error::NoConvergence { iterations: cfg.max_iter, residual: r.norm_inf() })
    }
}

/// `prox_{γφ}(x) = (Id + γ∂φ)^{-1} x`.
pub fn prox(phi: &SeparableFunction, gamma: f64, x: &VecN, cfg: &SolveConfig) -> Result<VecN> {
    let id = MonotoneOperator::identity(phi.dim());
    let a = MonotoneOperator::subdifferential(phi.clone());
    Ok(solve_resolvent(&ResolventProblem::new(&id, &a, gamma, x)?, cfg)?.z)
}

/// `(∇f + γ∂φ)^{-1} s`.
pub fn bregman_prox(
    f: &SeparableFunction,
    phi: &SeparableFunction,
    gamma: f64,
    s: &VecN,
    cfg: &SolveConfig,
) -> Result<Solution> {
    let w = MonotoneOperator::gradient(f.clone())?;
    let a = MonotoneOperator::subdifferential(phi.clone());
    solve_resolvent(&ResolventProblem::new(&w, &a, gamma, s)?, cfg)
}

/// `(W + γA)^{-1}(W x − γ B x)`.
pub fn warped_resolvent(
    w: &MonotoneOperator,
    a: &MonotoneOperator,
    b: &MonotoneOperator,
    gamma: f64,
    x: &VecN,
    cfg: &SolveConfig,
) -> Result<Solution> {
    check_gamma(gamma)?;
    check_dim(w.dim(), b.dim())?;
    let rhs = w.apply(x)?.axpy(-gamma, &b.apply(x)?)?;
    solve_resolvent(&ResolventProblem::new(w, a, gamma, &rhs)?, cfg)
}
