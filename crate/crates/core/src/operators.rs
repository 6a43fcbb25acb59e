//! Single-valued monotone operators on `ℝ^N`.
//!
//! Set-valued operators only ever appear through a single-valued selection:
//! the subdifferential of a catalog function is its derivative on the open
//! domain, which is the whole of `dom ∂φ` for every catalog entry.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::functions::{Interval, ScalarLegendre, SeparableFunction};
use crate::par::{self, Exec};
use crate::space::{pairing, VecN};

pub type Matrix = DMatrix<f64>;

/// Tolerance on the smallest eigenvalue of the symmetric part of an affine map.
const PSD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum MonotoneOperator {
    /// `∇f`.
    Gradient(SeparableFunction),
    /// `∂φ`, represented by its derivative selection. Resolvents use the prox oracle.
    Subdifferential(SeparableFunction),
    /// `∇f* = (∇f)^{-1}`.
    InverseGradient(SeparableFunction),
    /// `x ↦ Mx + b` with `M + Mᵀ` positive semidefinite.
    Affine { m: Matrix, b: VecN },
    /// `(ξ₁, ξ₂) ↦ (βξ₁ − ψ'(ξ₁) − ξ₂, ξ₁ + βξ₂ − ψ'(ξ₂))`, maximally monotone
    /// but not a subdifferential.
    Joca16 { beta: f64, psi: ScalarLegendre },
    /// `(x, y*) ↦ (Lᵀy*, −Lx)` on `ℝ^N × ℝ^M` for `L` of shape `M × N`.
    SkewPd { l: Matrix },
    /// Block-diagonal `(x, y) ↦ (A₁x, A₂y)`.
    Product(Box<MonotoneOperator>, Box<MonotoneOperator>),
}

/// One coordinate of a separable operator, as a strictly increasing scalar map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarOp {
    Deriv(ScalarLegendre),
    DerivInv(ScalarLegendre),
    Linear { slope: f64, offset: f64 },
}

impl ScalarOp {
    pub fn dom(&self) -> Interval {
        match self {
            ScalarOp::Deriv(p) => p.dom(),
            ScalarOp::DerivInv(p) => p.conj_dom(),
            ScalarOp::Linear { .. } => Interval::REAL,
        }
    }

    /// Value at an interior point; NaN where undefined.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarOp::Deriv(p) => p.deriv_raw(t),
            ScalarOp::DerivInv(p) => p.deriv_inv(t).unwrap_or(f64::NAN),
            ScalarOp::Linear { slope, offset } => slope * t + offset,
        }
    }

    pub fn slope(&self, t: f64) -> f64 {
        match self {
            ScalarOp::Deriv(p) => p.second_deriv(t),
            ScalarOp::DerivInv(p) => match p.deriv_inv(t) {
                Ok(s) => 1.0 / p.second_deriv(s),
                Err(_) => f64::NAN,
            },
            ScalarOp::Linear { slope, .. } => *slope,
        }
    }
}

impl MonotoneOperator {
    pub fn gradient(f: SeparableFunction) -> Result<Self> {
        if !f.is_legendre() {
            return Err(Error::InvalidOperator(format!("gradient of non-Legendre {}", f.name())));
        }
        Ok(MonotoneOperator::Gradient(f))
    }

    pub fn subdifferential(f: SeparableFunction) -> Self {
        MonotoneOperator::Subdifferential(f)
    }

    pub fn inverse_gradient(f: SeparableFunction) -> Result<Self> {
        if !f.is_legendre() {
            return Err(Error::InvalidOperator(format!("inverse gradient of non-Legendre {}", f.name())));
        }
        Ok(MonotoneOperator::InverseGradient(f))
    }

    pub fn identity(dim: usize) -> Self {
        MonotoneOperator::Gradient(SeparableFunction::quadratic(dim))
    }

    /// `x ↦ b`.
    pub fn constant(b: VecN) -> Self {
        let n = b.dim();
        MonotoneOperator::Affine { m: Matrix::zeros(n, n), b }
    }

    pub fn affine(m: Matrix, b: VecN) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidOperator(format!("affine map needs a square matrix, got {}x{}", m.nrows(), m.ncols())));
        }
        check_dim(m.nrows(), b.dim())?;
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("affine matrix entry".into()));
        }
        let sym = (&m + m.transpose()) * 0.5;
        let min_eig = sym.symmetric_eigenvalues().min();
        let scale = m.norm().max(1.0);
        if min_eig < -PSD_TOL * scale {
            return Err(Error::InvalidOperator(format!(
                "symmetric part of the affine map is not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(MonotoneOperator::Affine { m, b })
    }

    /// The non-subdifferential example on `ℝ²`; `ψ` must be defined on all of
    /// `ℝ` with a `β`-Lipschitz derivative.
    pub fn joca16(beta: f64, psi: ScalarLegendre) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidOperator(format!("joca16 needs beta > 0, got {beta}")));
        }
        if psi.dom() != Interval::REAL || !psi.is_legendre() {
            return Err(Error::InvalidOperator(format!("joca16 needs a Legendre psi on all of R, got {psi}")));
        }
        let grid: Vec<f64> = (0..=400).map(|k| -10.0 + 0.05 * k as f64).collect();
        for w in grid.windows(2) {
            let (s, t) = (w[0], w[1]);
            let lhs = (psi.deriv_raw(s) - psi.deriv_raw(t)).abs();
            if lhs > (beta + 1e-8) * (s - t).abs() {
                return Err(Error::InvalidOperator(format!("derivative of {psi} is not {beta}-Lipschitz near {s}")));
            }
        }
        Ok(MonotoneOperator::Joca16 { beta, psi })
    }

    pub fn skew(l: Matrix) -> Result<Self> {
        if l.nrows() == 0 || l.ncols() == 0 {
            return Err(Error::InvalidOperator("empty coupling matrix".into()));
        }
        if l.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coupling matrix entry".into()));
        }
        Ok(MonotoneOperator::SkewPd { l })
    }

    pub fn product(a: MonotoneOperator, b: MonotoneOperator) -> Self {
        MonotoneOperator::Product(Box::new(a), Box::new(b))
    }

    pub fn dim(&self) -> usize {
        match self {
            MonotoneOperator::Gradient(f)
            | MonotoneOperator::Subdifferential(f)
            | MonotoneOperator::InverseGradient(f) => f.dim(),
            MonotoneOperator::Affine { b, .. } => b.dim(),
            MonotoneOperator::Joca16 { .. } => 2,
            MonotoneOperator::SkewPd { l } => l.nrows() + l.ncols(),
            MonotoneOperator::Product(a, b) => a.dim() + b.dim(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            MonotoneOperator::Gradient(f) => format!("grad:{}", f.name()),
            MonotoneOperator::Subdifferential(f) => format!("subdiff:{}", f.name()),
            MonotoneOperator::InverseGradient(f) => format!("inv_grad:{}", f.name()),
            MonotoneOperator::Affine { .. } => format!("affine[{}]", self.dim()),
            MonotoneOperator::Joca16 { beta, psi } => format!("joca16:{beta},{psi}"),
            MonotoneOperator::SkewPd { l } => format!("skew[{}x{}]", l.nrows(), l.ncols()),
            MonotoneOperator::Product(a, b) => format!("({})x({})", a.name(), b.name()),
        }
    }

    /// Open domain, one interval per coordinate.
    pub fn domain_box(&self) -> Vec<Interval> {
        match self {
            MonotoneOperator::Gradient(f) | MonotoneOperator::Subdifferential(f) => {
                f.parts().iter().map(|p| p.dom()).collect()
            }
            MonotoneOperator::InverseGradient(f) => f.parts().iter().map(|p| p.conj_dom()).collect(),
            MonotoneOperator::Product(a, b) => {
                let mut d = a.domain_box();
                d.extend(b.domain_box());
                d
            }
            _ => vec![Interval::REAL; self.dim()],
        }
    }

    pub fn in_domain(&self, x: &VecN) -> bool {
        x.dim() == self.dim() && self.domain_box().iter().zip(x.iter()).all(|(d, &t)| d.contains(t))
    }

    /// The value (or, for a subdifferential, the selection) at `x`.
    pub fn apply(&self, x: &VecN) -> Result<VecN> {
        check_dim(self.dim(), x.dim())?;
        match self {
            MonotoneOperator::Gradient(f) | MonotoneOperator::Subdifferential(f) => f.gradient(x),
            MonotoneOperator::InverseGradient(f) => f.conj_gradient(x),
            MonotoneOperator::Affine { m, b } => {
                let mx = m * DVector::from_column_slice(x.as_slice());
                VecN::new(mx.iter().zip(b.iter()).map(|(a, c)| a + c).collect())
            }
            MonotoneOperator::Joca16 { beta, psi } => {
                let (x1, x2) = (x[0], x[1]);
                VecN::new(vec![
                    beta * x1 - psi.deriv_raw(x1) - x2,
                    x1 + beta * x2 - psi.deriv_raw(x2),
                ])
            }
            MonotoneOperator::SkewPd { l } => {
                let n = l.ncols();
                let xs = DVector::from_column_slice(&x.as_slice()[..n]);
                let ys = DVector::from_column_slice(&x.as_slice()[n..]);
                let top = l.transpose() * ys;
                let bottom = -(l * xs);
                VecN::new(top.iter().chain(bottom.iter()).copied().collect())
            }
            MonotoneOperator::Product(a, b) => {
                let (x1, x2) = x.split(a.dim())?;
                Ok(a.apply(&x1)?.concat(&b.apply(&x2)?))
            }
        }
    }

    /// Jacobian at an interior point.
    pub fn jacobian(&self, x: &VecN) -> Result<Matrix> {
        check_dim(self.dim(), x.dim())?;
        match self {
            MonotoneOperator::Gradient(f) | MonotoneOperator::Subdifferential(f) => {
                Ok(Matrix::from_diagonal(&DVector::from_vec(f.hessian_diag(x)?)))
            }
            MonotoneOperator::InverseGradient(f) => {
                let y = f.conj_gradient(x)?;
                let d = f.hessian_diag(&y)?;
                Ok(Matrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|h| 1.0 / h))))
            }
            MonotoneOperator::Affine { m, .. } => Ok(m.clone()),
            MonotoneOperator::Joca16 { beta, psi } => Ok(Matrix::from_row_slice(
                2,
                2,
                &[beta - psi.second_deriv(x[0]), -1.0, 1.0, beta - psi.second_deriv(x[1])],
            )),
            MonotoneOperator::SkewPd { l } => {
                let (m, n) = l.shape();
                let mut j = Matrix::zeros(n + m, n + m);
                j.view_mut((0, n), (n, m)).copy_from(&l.transpose());
                j.view_mut((n, 0), (m, n)).copy_from(&(-l));
                Ok(j)
            }
            MonotoneOperator::Product(a, b) => {
                let (x1, x2) = x.split(a.dim())?;
                let (ja, jb) = (a.jacobian(&x1)?, b.jacobian(&x2)?);
                let (na, nb) = (a.dim(), b.dim());
                let mut j = Matrix::zeros(na + nb, na + nb);
                j.view_mut((0, 0), (na, na)).copy_from(&ja);
                j.view_mut((na, na), (nb, nb)).copy_from(&jb);
                Ok(j)
            }
        }
    }

    /// The `i`-th coordinate map when the operator acts coordinatewise.
    pub fn coordinate_map(&self, i: usize) -> Option<ScalarOp> {
        match self {
            MonotoneOperator::Gradient(f) | MonotoneOperator::Subdifferential(f) => Some(ScalarOp::Deriv(f.part(i))),
            MonotoneOperator::InverseGradient(f) => Some(ScalarOp::DerivInv(f.part(i))),
            MonotoneOperator::Affine { m, b } if self.is_separable() => {
                Some(ScalarOp::Linear { slope: m[(i, i)], offset: b[i] })
            }
            _ => None,
        }
    }

    pub fn is_separable(&self) -> bool {
        match self {
            MonotoneOperator::Gradient(_)
            | MonotoneOperator::Subdifferential(_)
            | MonotoneOperator::InverseGradient(_) => true,
            MonotoneOperator::Affine { m, .. } => {
                (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == 0.0))
            }
            _ => false,
        }
    }

    /// The catalog function `f` when the operator is `∇f` or `∂f`.
    pub fn potential(&self) -> Option<&SeparableFunction> {
        match self {
            MonotoneOperator::Gradient(f) | MonotoneOperator::Subdifferential(f) => Some(f),
            _ => None,
        }
    }

    /// True for `∇(‖·‖²/2)`.
    pub fn is_identity(&self) -> bool {
        matches!(self.potential(), Some(f) if f.uniform_part() == Some(ScalarLegendre::QUADRATIC))
    }

    /// `(∇f)^{-1} = ∇f*` computed analytically through the inverse derivative.
    pub fn invert_gradient(&self) -> Result<MonotoneOperator> {
        match self {
            MonotoneOperator::Gradient(f) | MonotoneOperator::Subdifferential(f) => {
                MonotoneOperator::inverse_gradient(f.clone())
            }
            MonotoneOperator::InverseGradient(f) => MonotoneOperator::gradient(f.clone()),
            other => Err(Error::Unsupported(format!("inverting {}", other.name()))),
        }
    }

    /// A uniform-monotonicity modulus that holds on the whole domain, when one is known.
    pub fn declared_modulus(&self) -> Option<UniformModulus> {
        match self {
            MonotoneOperator::Gradient(f) | MonotoneOperator::Subdifferential(f) => {
                let alpha = f
                    .parts()
                    .iter()
                    .map(|p| match (p.is_quad_plus(), p.base()) {
                        (true, _) => Some(1.0),
                        (false, crate::functions::Base::Quadratic) => Some(1.0),
                        // 1/(t(1−t)) ≥ 4 on (0, 1)
                        (false, crate::functions::Base::FermiDirac) => Some(4.0),
                        _ => None,
                    })
                    .try_fold(f64::INFINITY, |acc, a| a.map(|a| acc.min(a)))?;
                Some(UniformModulus::Strong { alpha })
            }
            _ => None,
        }
    }
}

impl fmt::Display for MonotoneOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// An increasing `φ: [0, ∞) → [0, ∞)` with `φ(0) = 0`, used in
/// `⟨x − y, Ax − Ay⟩ ≥ φ(‖x − y‖)`.
#[derive(Clone)]
pub enum UniformModulus {
    /// `αt²`
    Strong { alpha: f64 },
    /// `αt^p`, `p > 1`
    Power { alpha: f64, p: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl UniformModulus {
    pub fn strong(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidOperator(format!("strong modulus needs alpha > 0, got {alpha}")));
        }
        Ok(UniformModulus::Strong { alpha })
    }

    pub fn power(alpha: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite() && p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidOperator(format!("power modulus needs alpha > 0, p > 1, got ({alpha}, {p})")));
        }
        Ok(UniformModulus::Power { alpha, p })
    }

    /// Checks `φ(0) = 0` and monotonicity on a grid of `[0, 100]`.
    pub fn custom(phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if phi(0.0) != 0.0 {
            return Err(Error::InvalidOperator("modulus must vanish at 0".into()));
        }
        let mut prev = 0.0;
        for k in 1..=10_000 {
            let v = phi(0.01 * k as f64);
            if !(v >= prev) || !v.is_finite() {
                return Err(Error::InvalidOperator(format!("modulus is not increasing near {}", 0.01 * k as f64)));
            }
            prev = v;
        }
        Ok(UniformModulus::Custom(Arc::new(phi)))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            UniformModulus::Strong { alpha } => alpha * t * t,
            UniformModulus::Power { alpha, p } => alpha * t.powf(*p),
            UniformModulus::Custom(f) => f(t),
        }
    }
}

impl fmt::Debug for UniformModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UniformModulus::Strong { alpha } => write!(f, "Strong({alpha})"),
            UniformModulus::Power { alpha, p } => write!(f, "Power({alpha}, {p})"),
            UniformModulus::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Result of an empirical monotonicity check over random pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeReport {
    pub pairs: usize,
    /// `min ⟨x − y, Ax − Ay⟩`
    pub min_pairing: f64,
    /// `min ⟨x − y, Ax − Ay⟩ / ‖x − y‖²`
    pub min_ratio: f64,
    /// `min ⟨x − y, Ax − Ay⟩ − φ(‖x − y‖)` when a modulus was supplied.
    pub min_modulus_slack: Option<f64>,
}

/// Samples `n` random pairs uniformly in `bounds` and reports the worst
/// monotonicity pairing. The box must lie inside the operator's domain.
pub fn monotonicity_probe(
    op: &MonotoneOperator,
    bounds: &[(f64, f64)],
    n: usize,
    modulus: Option<&UniformModulus>,
    seed: u64,
) -> Result<ProbeReport> {
    check_dim(op.dim(), bounds.len())?;
    for (d, &(lo, hi)) in op.domain_box().iter().zip(bounds) {
        if !(lo <= hi) || !d.contains(lo) || !d.contains(hi) {
            return Err(Error::Domain(format!("probe box [{lo}, {hi}] not inside the domain of {}", op.name())));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        bounds.iter().map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) }).collect()
    };
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..n).map(|_| (draw(&mut rng), draw(&mut rng))).collect();
    let rows = par::try_map_range(Exec::Parallel, n, |k| -> Result<(f64, f64, Option<f64>)> {
        let x = VecN::new(pairs[k].0.clone())?;
        let y = VecN::new(pairs[k].1.clone())?;
        let d = x.sub(&y)?;
        let p = pairing(&d, &op.apply(&x)?.sub(&op.apply(&y)?)?)?;
        let nd = d.norm();
        let ratio = if nd > 0.0 { p / (nd * nd) } else { f64::INFINITY };
        Ok((p, ratio, modulus.map(|m| p - m.eval(nd))))
    })?;
    let mut report = ProbeReport {
        pairs: n,
        min_pairing: f64::INFINITY,
        min_ratio: f64::INFINITY,
        min_modulus_slack: modulus.map(|_| f64::INFINITY),
    };
    for (p, r, s) in rows {
        report.min_pairing = report.min_pairing.min(p);
        report.min_ratio = report.min_ratio.min(r);
        if let (Some(acc), Some(s)) = (report.min_modulus_slack.as_mut(), s) {
            *acc = acc.min(s);
        }
    }
    Ok(report)
}

/// Parses whitespace-separated rows of reals. Blank lines and `#` comments are skipped.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|tok| tok.parse::<f64>().map_err(|e| Error::Parse(format!("matrix entry '{tok}': {e}"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    let cols = rows[0].len();
    if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::Parse(format!("matrix row {} has {} entries, expected {cols}", bad + 1, rows[bad].len())));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entry".into()));
    }
    Ok(Matrix::from_row_slice(rows.len(), cols, &flat))
}

/// An `N × N` matrix, optionally followed by one more row holding the offset `b`.
pub fn parse_affine(text: &str) -> Result<MonotoneOperator> {
    let full = parse_matrix(text)?;
    let (r, c) = full.shape();
    if r == c {
        MonotoneOperator::affine(full, VecN::zeros(c))
    } else if r == c + 1 {
        let m = full.rows(0, c).into_owned();
        let b = VecN::new(full.row(c).iter().copied().collect())?;
        MonotoneOperator::affine(m, b)
    } else {
        Err(Error::Parse(format!("affine file must have N or N+1 rows of N entries, got {r}x{c}")))
    }
}
