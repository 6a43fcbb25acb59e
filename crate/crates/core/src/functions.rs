//! Closed-form separable Legendre functions.
//!
//! The catalog is small on purpose: `‖·‖²/2`, the negative Burg entropy, the
//! negative Boltzmann–Shannon entropy, the Fermi–Dirac entropy, and
//! `‖·‖²/2 + ψ` for any of those `ψ`. Each scalar record knows its value on
//! the closed hull of its domain, its derivative and the inverse of the
//! derivative, its conjugate and its proximity operator.

use std::fmt;
use std::str::FromStr;

use crate::error::{check_dim, Error, Result};
use crate::solvers::lambert::lambert_w;
use crate::solvers::scalar::solve_increasing;
use crate::solvers::SolveConfig;
use crate::space::{pairing, DualPair, VecN, XReal};

/// Points within this relative distance of a finite nonzero open end count
/// as outside the interior. A zero end is strict.
pub const BOUNDARY_TOL: f64 = 1e-14;

/// An open interval `(lo, hi)` with possibly infinite ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL: Interval = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
    pub const POSITIVE: Interval = Interval { lo: 0.0, hi: f64::INFINITY };
    pub const NEGATIVE: Interval = Interval { lo: f64::NEG_INFINITY, hi: 0.0 };
    pub const UNIT: Interval = Interval { lo: 0.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi)
    }

    /// Strict interior membership with the [`BOUNDARY_TOL`] margin at finite ends.
    pub fn contains(&self, t: f64) -> bool {
        t.is_finite()
            && (self.lo == f64::NEG_INFINITY || t > self.lo + BOUNDARY_TOL * self.lo.abs())
            && (self.hi == f64::INFINITY || t < self.hi - BOUNDARY_TOL * self.hi.abs())
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.max(other.lo), hi: self.hi.min(other.hi) }
    }

    /// A canonical interior point: the midpoint when bounded, else 1 away from the finite end.
    pub fn anchor(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            (true, false) => self.lo + 1.0,
            (false, true) => self.hi - 1.0,
            (false, false) => 0.0,
        }
    }

    /// Clamps into `[lo + margin, hi − margin]`, where `margin` is relative to the end's scale.
    pub fn clamp_inside(&self, t: f64, margin: f64) -> f64 {
        let lo = if self.lo.is_finite() { self.lo + margin * self.lo.abs().max(1.0) } else { f64::MIN };
        let hi = if self.hi.is_finite() { self.hi - margin * self.hi.abs().max(1.0) } else { f64::MAX };
        t.clamp(lo, hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Base {
    /// `t²/2` on ℝ.
    Quadratic,
    /// `−ln t` on `(0, ∞)`.
    Burg,
    /// `t ln t − t` on `[0, ∞)`, zero at the origin.
    BoltzmannShannon,
    /// `t ln t + (1 − t) ln(1 − t)` on `[0, 1]`, zero at both ends.
    FermiDirac,
    /// The zero function. Not Legendre; only meaningful as the `ψ` of a
    /// Moreau envelope or as `quad_plus:zero`.
    Zero,
}

impl Base {
    fn name(self) -> &'static str {
        match self {
            Base::Quadratic => "quadratic",
            Base::Burg => "burg",
            Base::BoltzmannShannon => "boltzmann_shannon",
            Base::FermiDirac => "fermi_dirac",
            Base::Zero => "zero",
        }
    }

    fn dom(self) -> Interval {
        match self {
            Base::Quadratic | Base::Zero => Interval::REAL,
            Base::Burg | Base::BoltzmannShannon => Interval::POSITIVE,
            Base::FermiDirac => Interval::UNIT,
        }
    }

    fn value(self, t: f64) -> f64 {
        match self {
            Base::Quadratic => 0.5 * t * t,
            Base::Zero => 0.0,
            Base::Burg => {
                if t > 0.0 {
                    -t.ln()
                } else {
                    f64::INFINITY
                }
            }
            Base::BoltzmannShannon => {
                if t > 0.0 {
                    t * t.ln() - t
                } else if t == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Base::FermiDirac => {
                if (0.0..=1.0).contains(&t) {
                    xlnx(t) + xlnx(1.0 - t)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn deriv(self, t: f64) -> f64 {
        match self {
            Base::Quadratic => t,
            Base::Zero => 0.0,
            Base::Burg => -1.0 / t,
            Base::BoltzmannShannon => t.ln(),
            Base::FermiDirac => t.ln() - (-t).ln_1p(),
        }
    }

    fn second_deriv(self, t: f64) -> f64 {
        match self {
            Base::Quadratic => 1.0,
            Base::Zero => 0.0,
            Base::Burg => 1.0 / (t * t),
            Base::BoltzmannShannon => 1.0 / t,
            Base::FermiDirac => 1.0 / (t * (1.0 - t)),
        }
    }

    fn conj_dom(self) -> Interval {
        match self {
            Base::Burg => Interval::NEGATIVE,
            // conjugate of 0 is the indicator of {0}: empty interior
            Base::Zero => Interval::new(0.0, 0.0),
            _ => Interval::REAL,
        }
    }

    fn deriv_inv(self, s: f64) -> f64 {
        match self {
            Base::Quadratic => s,
            Base::Zero => f64::NAN,
            Base::Burg => -1.0 / s,
            Base::BoltzmannShannon => s.exp(),
            Base::FermiDirac => logistic(s),
        }
    }

    fn conj_value(self, s: f64) -> f64 {
        match self {
            Base::Quadratic => 0.5 * s * s,
            Base::Zero => {
                if s == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Base::Burg => {
                if s < 0.0 {
                    -1.0 - (-s).ln()
                } else {
                    f64::INFINITY
                }
            }
            Base::BoltzmannShannon => s.exp(),
            Base::FermiDirac => {
                if s > 0.0 {
                    s + (-s).exp().ln_1p()
                } else {
                    s.exp().ln_1p()
                }
            }
        }
    }

    /// `prox_{γ·base}(v)`, the unique `t` with `t + γ base'(t) = v`.
    fn prox(self, gamma: f64, v: f64, cfg: &SolveConfig) -> Result<f64> {
        match self {
            Base::Quadratic => Ok(v / (1.0 + gamma)),
            Base::Zero => Ok(v),
            Base::Burg => {
                // root of t² − v t − γ = 0, written to avoid cancellation
                let r = (v * v + 4.0 * gamma).sqrt();
                Ok(if v >= 0.0 { 0.5 * (v + r) } else { 2.0 * gamma / (r - v) })
            }
            Base::BoltzmannShannon => {
                let arg = (v / gamma - gamma.ln()).exp();
                if arg.is_finite() && arg > 0.0 {
                    Ok(gamma * lambert_w(arg)?)
                } else {
                    self.prox_numeric(gamma, v, cfg)
                }
            }
            Base::FermiDirac => self.prox_numeric(gamma, v, cfg),
        }
    }

    fn prox_numeric(self, gamma: f64, v: f64, cfg: &SolveConfig) -> Result<f64> {
        let dom = self.dom();
        let start = dom.clamp_inside(v, 1e-3);
        let root = solve_increasing(
            |t| t + gamma * self.deriv(t),
            Some(|t| 1.0 + gamma * self.second_deriv(t)),
            dom,
            start,
            v,
            cfg,
        )?;
        Ok(root.t)
    }

    fn has_closed_prox(self) -> bool {
        !matches!(self, Base::FermiDirac)
    }
}

fn xlnx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

fn logistic(s: f64) -> f64 {
    if s >= 0.0 {
        1.0 / (1.0 + (-s).exp())
    } else {
        let e = s.exp();
        e / (1.0 + e)
    }
}

/// A closed-form scalar Legendre function: one of the [`Base`] entries, or
/// `t²/2 + base(t)` when `quad_plus` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ScalarLegendre {
    base: Base,
    quad_plus: bool,
}

impl ScalarLegendre {
    pub const QUADRATIC: ScalarLegendre = ScalarLegendre { base: Base::Quadratic, quad_plus: false };
    pub const BURG: ScalarLegendre = ScalarLegendre { base: Base::Burg, quad_plus: false };
    pub const BOLTZMANN_SHANNON: ScalarLegendre =
        ScalarLegendre { base: Base::BoltzmannShannon, quad_plus: false };
    pub const FERMI_DIRAC: ScalarLegendre = ScalarLegendre { base: Base::FermiDirac, quad_plus: false };
    pub const ZERO: ScalarLegendre = ScalarLegendre { base: Base::Zero, quad_plus: false };

    pub const fn new(base: Base) -> Self {
        ScalarLegendre { base, quad_plus: false }
    }

    /// `t²/2 + inner(t)`.
    pub fn quad_plus(inner: ScalarLegendre) -> Result<Self> {
        if inner.quad_plus {
            return Err(Error::Unsupported("nested quad_plus".into()));
        }
        Ok(ScalarLegendre { base: inner.base, quad_plus: true })
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn is_quad_plus(&self) -> bool {
        self.quad_plus
    }

    /// The `ψ` of `t²/2 + ψ`, if this is a composite.
    pub fn inner(&self) -> Option<ScalarLegendre> {
        self.quad_plus.then_some(ScalarLegendre::new(self.base))
    }

    pub fn is_legendre(&self) -> bool {
        self.quad_plus || self.base != Base::Zero
    }

    pub fn name(&self) -> String {
        if self.quad_plus {
            format!("quad_plus:{}", self.base.name())
        } else {
            self.base.name().to_string()
        }
    }

    /// Interior of the domain.
    pub fn dom(&self) -> Interval {
        self.base.dom()
    }

    pub fn conj_dom(&self) -> Interval {
        if self.quad_plus {
            Interval::REAL
        } else {
            self.base.conj_dom()
        }
    }

    /// Value on the closed hull of the domain, `+∞` outside.
    pub fn value(&self, t: f64) -> XReal {
        let v = self.base.value(t);
        let v = if self.quad_plus { v + 0.5 * t * t } else { v };
        XReal::new(v).unwrap_or(XReal::INFINITY)
    }

    /// Derivative; defined only on the interior of the domain.
    pub fn deriv(&self, t: f64) -> Result<f64> {
        if !self.dom().contains(t) {
            return Err(Error::Domain(format!("{} derivative at {t} outside the open domain", self.name())));
        }
        Ok(self.deriv_raw(t))
    }

    /// Derivative with no domain check, for callers that already stay inside.
    pub fn deriv_raw(&self, t: f64) -> f64 {
        let d = self.base.deriv(t);
        if self.quad_plus {
            d + t
        } else {
            d
        }
    }

    pub fn second_deriv(&self, t: f64) -> f64 {
        let d = self.base.second_deriv(t);
        if self.quad_plus {
            d + 1.0
        } else {
            d
        }
    }

    /// Inverse of the derivative, i.e. the derivative of the conjugate.
    pub fn deriv_inv(&self, s: f64) -> Result<f64> {
        if !self.conj_dom().contains(s) {
            return Err(Error::Domain(format!(
                "{} inverse derivative at {s} outside the open conjugate domain",
                self.name()
            )));
        }
        let t = if self.quad_plus {
            self.base.prox(1.0, s, &SolveConfig::default())?
        } else {
            self.base.deriv_inv(s)
        };
        if t.is_finite() {
            Ok(t)
        } else {
            Err(Error::NonFinite(format!("{} inverse derivative at {s}", self.name())))
        }
    }

    pub fn conj_value(&self, s: f64) -> Result<XReal> {
        if self.quad_plus {
            // (‖·‖²/2 + ψ)* = ‖·‖²/2 − env ψ
            let env = moreau_envelope_scalar(self.base, s, &SolveConfig::default())?;
            return XReal::new(0.5 * s * s - env);
        }
        XReal::new(self.base.conj_value(s))
    }

    /// `prox_{γ f}(v)`.
    pub fn prox(&self, gamma: f64, v: f64, cfg: &SolveConfig) -> Result<f64> {
        if !(gamma > 0.0) {
            return Err(Error::Domain(format!("prox step must be positive, got {gamma}")));
        }
        if self.quad_plus {
            self.base.prox(gamma / (1.0 + gamma), v / (1.0 + gamma), cfg)
        } else {
            self.base.prox(gamma, v, cfg)
        }
    }

    pub fn has_closed_prox(&self) -> bool {
        self.base.has_closed_prox()
    }
}

fn moreau_envelope_scalar(base: Base, s: f64, cfg: &SolveConfig) -> Result<f64> {
    let p = base.prox(1.0, s, cfg)?;
    Ok(base.value(p) + 0.5 * (s - p) * (s - p))
}

impl fmt::Display for ScalarLegendre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ScalarLegendre {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("quad_plus:") {
            return ScalarLegendre::quad_plus(inner.parse()?);
        }
        let base = match s {
            "quadratic" => Base::Quadratic,
            "burg" => Base::Burg,
            "boltzmann_shannon" => Base::BoltzmannShannon,
            "fermi_dirac" => Base::FermiDirac,
            "zero" => Base::Zero,
            other => return Err(Error::Parse(format!("unknown function '{other}'"))),
        };
        Ok(ScalarLegendre::new(base))
    }
}

/// `x ↦ Σ_i parts[i](x_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableFunction {
    parts: Vec<ScalarLegendre>,
}

impl SeparableFunction {
    pub fn new(parts: Vec<ScalarLegendre>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        Ok(SeparableFunction { parts })
    }

    /// The same scalar function on each of `dim` coordinates.
    pub fn uniform(part: ScalarLegendre, dim: usize) -> Self {
        assert!(dim > 0, "separable function needs at least one coordinate");
        SeparableFunction { parts: vec![part; dim] }
    }

    pub fn quadratic(dim: usize) -> Self {
        Self::uniform(ScalarLegendre::QUADRATIC, dim)
    }

    pub fn dim(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[ScalarLegendre] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> ScalarLegendre {
        self.parts[i]
    }

    /// The common scalar part when all coordinates share one.
    pub fn uniform_part(&self) -> Option<ScalarLegendre> {
        let first = self.parts[0];
        self.parts.iter().all(|p| *p == first).then_some(first)
    }

    pub fn name(&self) -> String {
        match self.uniform_part() {
            Some(p) => p.name(),
            None => self.parts.iter().map(|p| p.name()).collect::<Vec<_>>().join("|"),
        }
    }

    pub fn is_legendre(&self) -> bool {
        self.parts.iter().all(|p| p.is_legendre())
    }

    pub fn in_interior(&self, x: &VecN) -> bool {
        x.dim() == self.dim() && self.parts.iter().zip(x.iter()).all(|(p, &t)| p.dom().contains(t))
    }

    pub fn in_conj_interior(&self, u: &VecN) -> bool {
        u.dim() == self.dim() && self.parts.iter().zip(u.iter()).all(|(p, &s)| p.conj_dom().contains(s))
    }

    pub fn eval(&self, x: &VecN) -> Result<XReal> {
        check_dim(self.dim(), x.dim())?;
        self.parts.iter().zip(x.iter()).try_fold(XReal::ZERO, |acc, (p, &t)| acc.try_add(p.value(t)))
    }

    pub fn conjugate_eval(&self, u_star: &VecN) -> Result<XReal> {
        check_dim(self.dim(), u_star.dim())?;
        self.parts
            .iter()
            .zip(u_star.iter())
            .try_fold(XReal::ZERO, |acc, (p, &s)| acc.try_add(p.conj_value(s)?))
    }

    pub fn gradient(&self, x: &VecN) -> Result<VecN> {
        check_dim(self.dim(), x.dim())?;
        x.try_map(|i, t| self.parts[i].deriv(t))
    }

    /// `∇f*`, the inverse of the gradient.
    pub fn conj_gradient(&self, u_star: &VecN) -> Result<VecN> {
        check_dim(self.dim(), u_star.dim())?;
        u_star.try_map(|i, s| self.parts[i].deriv_inv(s))
    }

    /// Bregman distance `D_f(x, y) = f(x) − f(y) − ⟨x − y, ∇f(y)⟩`, `+∞` when
    /// `y` is not interior.
    pub fn bregman(&self, x: &VecN, y: &VecN) -> Result<XReal> {
        check_dim(self.dim(), x.dim())?;
        check_dim(self.dim(), y.dim())?;
        if !self.in_interior(y) {
            return Ok(XReal::INFINITY);
        }
        let mut acc = XReal::ZERO;
        for (i, p) in self.parts.iter().enumerate() {
            let fx = p.value(x[i]);
            let fy = p.value(y[i]).value();
            let term = fx.add_real(-fy - (x[i] - y[i]) * p.deriv_raw(y[i]))?;
            acc = acc.try_add(term)?;
        }
        Ok(acc)
    }

    /// `L_f(x, u*) = f(x) + f*(u*) − ⟨x, u*⟩`, summed per coordinate.
    pub fn fenchel_young(&self, p: &DualPair) -> Result<XReal> {
        check_dim(self.dim(), p.dim())?;
        let (x, u) = (p.x(), p.u_star());
        let mut acc = XReal::ZERO;
        for (i, part) in self.parts.iter().enumerate() {
            let term = part.value(x[i]).try_add(part.conj_value(u[i])?)?.add_real(-x[i] * u[i])?;
            acc = acc.try_add(term)?;
        }
        Ok(acc)
    }

    /// `prox_{γ f}(x)`, coordinatewise.
    pub fn prox(&self, gamma: f64, x: &VecN, cfg: &SolveConfig) -> Result<VecN> {
        check_dim(self.dim(), x.dim())?;
        x.try_map(|i, v| self.parts[i].prox(gamma, v, cfg))
    }

    /// `min_y f(y) + ‖x − y‖²/2`, attained at `prox_f(x)`.
    pub fn moreau_envelope(&self, x: &VecN, cfg: &SolveConfig) -> Result<f64> {
        let p = self.prox(1.0, x, cfg)?;
        let fp = self.eval(&p)?.as_finite().ok_or_else(|| {
            Error::Domain(format!("prox of {} landed outside the domain at {p}", self.name()))
        })?;
        let d = x.sub(&p)?;
        Ok(fp + 0.5 * pairing(&d, &d)?)
    }

    /// Diagonal of the Hessian at an interior point.
    pub fn hessian_diag(&self, x: &VecN) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.dim())?;
        if !self.in_interior(x) {
            return Err(Error::Domain(format!("{} Hessian at {x} outside the open domain", self.name())));
        }
        Ok(self.parts.iter().zip(x.iter()).map(|(p, &t)| p.second_deriv(t)).collect())
    }
}

/// `φ = ‖·‖²/2 + ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeQuadPlus {
    psi: SeparableFunction,
    lifted: SeparableFunction,
}

impl CompositeQuadPlus {
    pub fn new(psi: SeparableFunction) -> Result<Self> {
        let lifted = SeparableFunction::new(
            psi.parts().iter().map(|p| ScalarLegendre::quad_plus(*p)).collect::<Result<Vec<_>>>()?,
        )?;
        Ok(CompositeQuadPlus { psi, lifted })
    }

    pub fn psi(&self) -> &SeparableFunction {
        &self.psi
    }

    /// `φ` itself as a separable function whose parts are `t²/2 + ψ_i(t)`.
    pub fn as_separable(&self) -> &SeparableFunction {
        &self.lifted
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    pub fn eval(&self, x: &VecN) -> Result<XReal> {
        self.lifted.eval(x)
    }

    pub fn conjugate_eval(&self, u_star: &VecN) -> Result<XReal> {
        self.lifted.conjugate_eval(u_star)
    }

    pub fn fenchel_young(&self, p: &DualPair) -> Result<XReal> {
        self.lifted.fenchel_young(p)
    }

    /// `‖x − u*‖²/2 + ψ(x) − env ψ(u*)`, the closed form through the Moreau envelope.
    pub fn fenchel_young_via_envelope(&self, p: &DualPair, cfg: &SolveConfig) -> Result<XReal> {
        let d = p.x().sub(p.u_star())?;
        let env = self.psi.moreau_envelope(p.u_star(), cfg)?;
        self.psi.eval(p.x())?.add_real(0.5 * pairing(&d, &d)? - env)
    }
}

/// Free-function form of [`SeparableFunction::moreau_envelope`].
pub fn moreau_envelope(psi: &SeparableFunction, x: &VecN, cfg: &SolveConfig) -> Result<f64> {
    psi.moreau_envelope(x, cfg)
}
