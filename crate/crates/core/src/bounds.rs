//! Lower bounds on `H_A(x, u*)` and `L_φ(x, u*)`.
//!
//! Every bound solves `W z + γ A z = W x + γ u*` for an auxiliary point `z`
//! and evaluates a nonnegative quantity built from `x − z`. The baselines
//! use `W = Id`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::functions::{Base, ScalarLegendre, SeparableFunction};
use crate::operators::{MonotoneOperator, UniformModulus};
use crate::par::{self, Exec};
use crate::solvers::{check_gamma, solve_resolvent, ResolventProblem, SolveConfig, Solution};
use crate::space::{pairing, DualPair, VecN};

/// Rounding allowance, relative to the size of the terms, below which a
/// negative value is clamped to zero.
pub const CLAMP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Pairing,
    Modulus,
    Strong,
    Bregman,
    LegendreSelf,
    CarlierHaraux,
    CarlierFy,
    BurgClosed,
    FermiDiracClosed,
}

impl Method {
    pub const ALL: [Method; 9] = [
        Method::Pairing,
        Method::Modulus,
        Method::Strong,
        Method::Bregman,
        Method::LegendreSelf,
        Method::CarlierHaraux,
        Method::CarlierFy,
        Method::BurgClosed,
        Method::FermiDiracClosed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Pairing => "pairing",
            Method::Modulus => "modulus",
            Method::Strong => "strong",
            Method::Bregman => "bregman",
            Method::LegendreSelf => "legendre_self",
            Method::CarlierHaraux => "carlier_haraux",
            Method::CarlierFy => "carlier_fy",
            Method::BurgClosed => "burg_closed",
            Method::FermiDiracClosed => "fermi_dirac_closed",
        }
    }

    /// The resolvent-based baselines with `W = Id`.
    pub fn is_baseline(self) -> bool {
        matches!(self, Method::CarlierHaraux | Method::CarlierFy)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown method '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    pub z: VecN,
    pub method: Method,
    pub gamma: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl BoundResult {
    pub fn residual(&self) -> f64 {
        self.diagnostics.get("residual").copied().unwrap_or(0.0)
    }

    pub fn near_boundary(&self) -> bool {
        self.diagnostics.get("near_boundary").is_some_and(|&v| v != 0.0)
    }

    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.get(key).copied()
    }

    /// The matching lower bound on the Fitzpatrick function `F_A = H_A + ⟨·,·⟩`.
    pub fn fitzpatrick_lower(&self, p: &DualPair) -> Result<f64> {
        Ok(self.value + pairing(p.x(), p.u_star())?)
    }
}

struct Draft {
    raw: f64,
    scale: f64,
    z: VecN,
    diagnostics: BTreeMap<String, f64>,
}

impl Draft {
    fn new(raw: f64, scale: f64, z: VecN) -> Self {
        Draft { raw, scale, z, diagnostics: BTreeMap::new() }
    }

    fn with_solution(mut self, sol: &Solution) -> Self {
        self.diagnostics.insert("residual".into(), sol.residual);
        self.diagnostics.insert("near_boundary".into(), f64::from(u8::from(sol.near_boundary)));
        self.diagnostics.insert("closed_form".into(), f64::from(u8::from(sol.closed_form.is_some())));
        self
    }

    fn diag(mut self, key: &str, v: f64) -> Self {
        self.diagnostics.insert(key.into(), v);
        self
    }

    fn finish(mut self, method: Method, gamma: f64) -> Result<BoundResult> {
        if self.raw.is_nan() {
            return Err(Error::NonFinite(format!("{method} bound evaluated to NaN")));
        }
        let value = if self.raw >= 0.0 {
            self.raw
        } else if self.raw >= -CLAMP_TOL * (1.0 + self.scale) {
            self.diagnostics.insert("clamped".into(), self.raw);
            0.0
        } else {
            return Err(Error::Inconsistent(format!(
                "{method} bound is negative ({:e}) beyond rounding for a monotone kernel",
                self.raw
            )));
        };
        Ok(BoundResult { value, z: self.z, method, gamma, diagnostics: self.diagnostics })
    }
}

/// Solves `W z + γ A z = W x + γ u*`; returns the solution and `W x`.
pub fn auxiliary_point(
    w: &MonotoneOperator,
    a: &MonotoneOperator,
    p: &DualPair,
    gamma: f64,
    cfg: &SolveConfig,
) -> Result<(Solution, VecN)> {
    check_gamma(gamma)?;
    if !w.in_domain(p.x()) {
        return Err(Error::Domain(format!("x = {} outside the open domain of the kernel {}", p.x(), w.name())));
    }
    let wx = w.apply(p.x())?;
    let rhs = wx.axpy(gamma, p.u_star())?;
    let sol = solve_resolvent(&ResolventProblem::new(w, a, gamma, &rhs)?, cfg)
        .map_err(|e| e.context("auxiliary point"))?;
    Ok((sol, wx))
}

fn pairing_value(w: &MonotoneOperator, x: &VecN, wx: &VecN, z: &VecN, gamma: f64) -> Result<(f64, f64)> {
    let dx = x.sub(z)?;
    let dw = wx.sub(&w.apply(z)?)?;
    Ok((pairing(&dx, &dw)? / gamma, dx.norm() * dw.norm() / gamma))
}

/// `⟨x − z, Wx − Wz⟩ / γ`.
pub fn bound_pairing(
    w: &MonotoneOperator,
    a: &MonotoneOperator,
    p: &DualPair,
    gamma: f64,
    cfg: &SolveConfig,
) -> Result<BoundResult> {
    let (sol, wx) = auxiliary_point(w, a, p, gamma, cfg)?;
    let (value, scale) = pairing_value(w, p.x(), &wx, &sol.z, gamma)?;
    Draft::new(value, scale, sol.z.clone()).with_solution(&sol).finish(Method::Pairing, gamma)
}

/// `φ(‖x − z‖) / γ` for a declared modulus of `W`; `α‖x − z‖² / γ` when strong.
pub fn bound_modulus(
    w: &MonotoneOperator,
    modulus: &UniformModulus,
    a: &MonotoneOperator,
    p: &DualPair,
    gamma: f64,
    cfg: &SolveConfig,
) -> Result<BoundResult> {
    let (sol, wx) = auxiliary_point(w, a, p, gamma, cfg)?;
    let d = p.x().sub(&sol.z)?.norm();
    let value = modulus.eval(d) / gamma;
    let (pv, _) = pairing_value(w, p.x(), &wx, &sol.z, gamma)?;
    let method = if matches!(modulus, UniformModulus::Strong { .. }) { Method::Strong } else { Method::Modulus };
    Draft::new(value, 0.0, sol.z.clone()).with_solution(&sol).diag("pairing_value", pv).finish(method, gamma)
}

/// `(D_f(x, z) + D_f(z, x)) / γ` with `W = ∇f`.
///
/// The symmetric sum is evaluated as `⟨x − z, ∇f(x) − ∇f(z)⟩`, which equals
/// it exactly and avoids cancellation; the definition-based sum is kept in
/// the diagnostics as `bregman_direct`.
pub fn bound_bregman(
    f: &SeparableFunction,
    a: &MonotoneOperator,
    p: &DualPair,
    gamma: f64,
    cfg: &SolveConfig,
) -> Result<BoundResult> {
    if !f.in_interior(p.x()) {
        return Err(Error::Domain(format!("x = {} outside int dom {}", p.x(), f.name())));
    }
    let w = MonotoneOperator::gradient(f.clone())?;
    let (sol, wx) = auxiliary_point(&w, a, p, gamma, cfg)?;
    if !f.in_interior(&sol.z) {
        return Err(Error::Domain(format!(
            "auxiliary point {} outside int dom {}: the Bregman term is +inf and the bound is unusable",
            sol.z,
            f.name()
        )));
    }
    let (value, scale) = pairing_value(&w, p.x(), &wx, &sol.z, gamma)?;
    let direct = f.bregman(p.x(), &sol.z)?.try_add(f.bregman(&sol.z, p.x())?)?.value() / gamma;
    Draft::new(value, scale, sol.z.clone())
        .with_solution(&sol)
        .diag("bregman_direct", direct)
        .finish(Method::Bregman, gamma)
}

/// `⟨x − z, ∇φ(x) − u*⟩ / (1 + γ)` with `z = ∇φ*((∇φ(x) + γu*)/(1 + γ))`.
pub fn bound_legendre_self(phi: &SeparableFunction, p: &DualPair, gamma: f64, cfg: &SolveConfig) -> Result<BoundResult> {
    check_gamma(gamma)?;
    if !phi.is_legendre() {
        return Err(Error::InvalidOperator(format!("{} is not Legendre", phi.name())));
    }
    if !phi.in_interior(p.x()) {
        return Err(Error::Domain(format!("x = {} outside int dom {}", p.x(), phi.name())));
    }
    if !phi.in_conj_interior(p.u_star()) {
        return Err(Error::Domain(format!("u* = {} outside int dom of the conjugate of {}", p.u_star(), phi.name())));
    }
    let g = phi.gradient(p.x())?;
    let s = g.axpy(gamma, p.u_star())?.scale(1.0 / (1.0 + gamma))?;
    let z = phi.conj_gradient(&s)?;
    let dx = p.x().sub(&z)?;
    let dg = g.sub(p.u_star())?;
    let value = pairing(&dx, &dg)? / (1.0 + gamma);
    let mut draft = Draft::new(value, dx.norm() * dg.norm() / (1.0 + gamma), z);
    // cross-check against the generic resolvent route
    let w = MonotoneOperator::gradient(phi.clone())?;
    let a = MonotoneOperator::subdifferential(phi.clone());
    if let Ok(generic) = bound_pairing(&w, &a, p, gamma, &cfg.numeric_only()) {
        draft = draft.diag("generic_value", generic.value).diag("residual", generic.residual());
    }
    draft.finish(Method::LegendreSelf, gamma)
}

/// The same bound for `φ = ‖·‖²/2 + ψ` written through `ψ` alone:
/// `z = prox_ψ((x + ∇ψ(x) + γu*)/(1 + γ))`, value `⟨x − z, x + ∇ψ(x) − u*⟩/(1 + γ)`.
pub fn bound_composite_self(psi: &SeparableFunction, p: &DualPair, gamma: f64, cfg: &SolveConfig) -> Result<BoundResult> {
    check_gamma(gamma)?;
    let x = p.x();
    let grad = x.add(&psi.gradient(x)?)?;
    let v = grad.axpy(gamma, p.u_star())?.scale(1.0 / (1.0 + gamma))?;
    let z = psi.prox(1.0, &v, cfg)?;
    let dx = x.sub(&z)?;
    let dg = grad.sub(p.u_star())?;
    let value = pairing(&dx, &dg)? / (1.0 + gamma);
    Draft::new(value, dx.norm() * dg.norm() / (1.0 + gamma), z).finish(Method::LegendreSelf, gamma)
}

/// `‖x − J_{γA}(x + γu*)‖² / γ`.
pub fn bound_carlier_haraux(a: &MonotoneOperator, p: &DualPair, gamma: f64, cfg: &SolveConfig) -> Result<BoundResult> {
    let id = MonotoneOperator::identity(a.dim());
    let (sol, _) = auxiliary_point(&id, a, p, gamma, cfg)?;
    let d = p.x().sub(&sol.z)?.norm();
    Draft::new(d * d / gamma, 0.0, sol.z.clone()).with_solution(&sol).finish(Method::CarlierHaraux, gamma)
}

/// `‖x − prox_{γφ}(x + γu*)‖² / γ`.
pub fn bound_carlier_fy(phi: &SeparableFunction, p: &DualPair, gamma: f64, cfg: &SolveConfig) -> Result<BoundResult> {
    let id = MonotoneOperator::identity(phi.dim());
    let a = MonotoneOperator::subdifferential(phi.clone());
    let (sol, _) = auxiliary_point(&id, &a, p, gamma, cfg)?;
    let d = p.x().sub(&sol.z)?.norm();
    Draft::new(d * d / gamma, 0.0, sol.z.clone()).with_solution(&sol).finish(Method::CarlierFy, gamma)
}

/// Burg kernel and Burg `φ`: `z_i = (1+γ)ξ_i/(1 − γξ_iμ*_i)` and value
/// `Σ γ(1 + ξ_iμ*_i)² / ((1+γ)(1 − γξ_iμ*_i))`. The numeric Bregman bound is
/// recorded as `generic_value`.
pub fn bound_burg_closed(p: &DualPair, gamma: f64, cfg: &SolveConfig) -> Result<BoundResult> {
    check_gamma(gamma)?;
    let mut value = 0.0;
    let mut z = Vec::with_capacity(p.dim());
    for (&xi, &mu) in p.x().iter().zip(p.u_star().iter()) {
        let den = 1.0 - gamma * xi * mu;
        if !(xi > 0.0) || !(den > 0.0) {
            return Err(Error::Domain(format!("Burg closed form needs ξ > 0 and 1 − γξμ* > 0, got ξ = {xi}, μ* = {mu}")));
        }
        z.push((1.0 + gamma) * xi / den);
        let t = 1.0 + xi * mu;
        value += gamma * t * t / ((1.0 + gamma) * den);
    }
    let burg = SeparableFunction::uniform(ScalarLegendre::BURG, p.dim());
    let mut draft = Draft::new(value, 0.0, VecN::new(z)?);
    if let Ok(g) = bound_bregman(&burg, &MonotoneOperator::subdifferential(burg.clone()), p, gamma, &cfg.numeric_only()) {
        draft = draft.diag("generic_value", g.value).diag("residual", g.residual());
    }
    draft.finish(Method::BurgClosed, gamma)
}

/// Fermi–Dirac kernel over Boltzmann–Shannon `φ`, using
/// `ζ_i = −a_i/2 + √(a_i²/4 + a_i)` with `a_i = ξ_i e^{γμ*_i}/(1 − ξ_i)` and
/// value `(1/γ) Σ (ξ_i − ζ_i) ln(ξ_i(1 − ζ_i)/(ζ_i(1 − ξ_i)))`.
///
/// That `ζ` solves the resolvent equation only for `γ = 1`, so other steps
/// are rejected; the generic [`bound_bregman`] covers them.
pub fn bound_fermi_dirac_closed(p: &DualPair, gamma: f64, cfg: &SolveConfig) -> Result<BoundResult> {
    check_gamma(gamma)?;
    if gamma != 1.0 {
        return Err(Error::Unsupported(format!("the Fermi–Dirac closed form holds only for gamma = 1, got {gamma}")));
    }
    let logit = |t: f64| t.ln() - (-t).ln_1p();
    let mut value = 0.0;
    let mut z = Vec::with_capacity(p.dim());
    for (&xi, &mu) in p.x().iter().zip(p.u_star().iter()) {
        if !(xi > 0.0 && xi < 1.0) {
            return Err(Error::Domain(format!("Fermi–Dirac closed form needs 0 < ξ < 1, got {xi}")));
        }
        let zeta = fermi_dirac_zeta_paper(xi, mu, gamma);
        value += (xi - zeta) * (logit(xi) - logit(zeta));
        z.push(zeta);
    }
    let fd = SeparableFunction::uniform(ScalarLegendre::FERMI_DIRAC, p.dim());
    let bs = SeparableFunction::uniform(ScalarLegendre::BOLTZMANN_SHANNON, p.dim());
    let mut draft = Draft::new(value / gamma, 0.0, VecN::new(z)?);
    if let Ok(g) = bound_bregman(&fd, &MonotoneOperator::subdifferential(bs), p, gamma, &cfg.numeric_only()) {
        draft = draft.diag("generic_value", g.value).diag("residual", g.residual());
    }
    draft.finish(Method::FermiDiracClosed, gamma)
}

/// `−a/2 + √(a²/4 + a)` with `a = ξ e^{γμ*}/(1 − ξ)`, in a cancellation-free form.
pub fn fermi_dirac_zeta_paper(xi: f64, mu: f64, gamma: f64) -> f64 {
    let a = xi * (gamma * mu).exp() / (1.0 - xi);
    2.0 / (1.0 + (1.0 + 4.0 / a).sqrt())
}

/// Routes a Fenchel–Young bound through the Haraux machinery with `A = ∂φ`.
///
/// `f` is the kernel potential for the pairing, modulus and Bregman methods
/// (defaults to `‖·‖²/2`). The modulus methods use the kernel's declared modulus.
pub fn fy_bound_dispatch(
    phi: &SeparableFunction,
    f: Option<&SeparableFunction>,
    p: &DualPair,
    gamma: f64,
    method: Method,
    cfg: &SolveConfig,
) -> Result<BoundResult> {
    let a = MonotoneOperator::subdifferential(phi.clone());
    let quad = SeparableFunction::quadratic(phi.dim());
    let f = f.unwrap_or(&quad);
    match method {
        Method::Pairing => bound_pairing(&MonotoneOperator::gradient(f.clone())?, &a, p, gamma, cfg),
        Method::Modulus | Method::Strong => {
            let w = MonotoneOperator::gradient(f.clone())?;
            let modulus = w
                .declared_modulus()
                .ok_or_else(|| Error::Unsupported(format!("no global modulus known for {}", w.name())))?;
            let r = bound_modulus(&w, &modulus, &a, p, gamma, cfg)?;
            Ok(BoundResult { method, ..r })
        }
        Method::Bregman => bound_bregman(f, &a, p, gamma, cfg),
        Method::LegendreSelf => bound_legendre_self(phi, p, gamma, cfg),
        Method::CarlierHaraux => bound_carlier_haraux(&a, p, gamma, cfg),
        Method::CarlierFy => bound_carlier_fy(phi, p, gamma, cfg),
        Method::BurgClosed => {
            require_uniform(phi, Base::Burg, "burg_closed")?;
            bound_burg_closed(p, gamma, cfg)
        }
        Method::FermiDiracClosed => {
            require_uniform(phi, Base::BoltzmannShannon, "fermi_dirac_closed")?;
            bound_fermi_dirac_closed(p, gamma, cfg)
        }
    }
}

fn require_uniform(phi: &SeparableFunction, base: Base, method: &str) -> Result<()> {
    match phi.uniform_part() {
        Some(part) if !part.is_quad_plus() && part.base() == base => Ok(()),
        _ => Err(Error::Unsupported(format!("{method} does not apply to {}", phi.name()))),
    }
}

/// One bound per pair, order-preserving.
pub fn batch<F>(exec: Exec, pairs: &[DualPair], f: F) -> Vec<Result<BoundResult>>
where
    F: Fn(&DualPair) -> Result<BoundResult> + Sync + Send,
{
    par::map_slice(exec, pairs, f)
}
