//! Residual gauges for `0 ∈ Ax + Bx` and for primal-dual systems.
//!
//! `θ(x) = H_A(x, −Bx)` vanishes exactly on `zer(A + B)`. It is bounded below
//! through the warped resolvent `z = (W + γA)^{-1}(Wx − γBx)`.

use crate::bounds::{bound_pairing, BoundResult, Method};
use crate::error::{check_dim, Error, Result};
use crate::functions::SeparableFunction;
use crate::operators::{Matrix, MonotoneOperator, UniformModulus};
use crate::solvers::{bregman_prox, check_gamma, warped_resolvent, SolveConfig};
use crate::space::{pairing, DualPair, VecN};

#[derive(Clone, Debug)]
pub struct InclusionInstance {
    pub a: MonotoneOperator,
    /// Single-valued.
    pub b: MonotoneOperator,
    pub w: MonotoneOperator,
    pub gamma: f64,
    pub modulus: Option<UniformModulus>,
    /// Potential of `W` when `W = ∇f`.
    pub f: Option<SeparableFunction>,
}

impl InclusionInstance {
    pub fn new(a: MonotoneOperator, b: MonotoneOperator, w: MonotoneOperator, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        check_dim(a.dim(), b.dim())?;
        check_dim(a.dim(), w.dim())?;
        Ok(InclusionInstance { a, b, w, gamma, modulus: None, f: None })
    }

    /// Hilbert case `W = Id`.
    pub fn hilbert(a: MonotoneOperator, b: MonotoneOperator, gamma: f64) -> Result<Self> {
        let w = MonotoneOperator::identity(a.dim());
        Ok(InclusionInstance { modulus: Some(UniformModulus::Strong { alpha: 1.0 }), ..Self::new(a, b, w, gamma)? })
    }

    /// Bregman case `W = ∇f`.
    pub fn bregman(a: MonotoneOperator, b: MonotoneOperator, f: SeparableFunction, gamma: f64) -> Result<Self> {
        let w = MonotoneOperator::gradient(f.clone())?;
        Ok(InclusionInstance { f: Some(f), ..Self::new(a, b, w, gamma)? })
    }

    pub fn with_modulus(self, modulus: UniformModulus) -> Self {
        InclusionInstance { modulus: Some(modulus), ..self }
    }
}

/// Lower bound on `G_{A,S}(x, y) = H_A(x, −S y)` for a single-valued selection `S`.
pub fn g_bound(
    w: &MonotoneOperator,
    a: &MonotoneOperator,
    s: &MonotoneOperator,
    gamma: f64,
    x: &VecN,
    y: &VecN,
    cfg: &SolveConfig,
) -> Result<BoundResult> {
    let p = DualPair::new(x.clone(), s.apply(y)?.scale(-1.0)?)?;
    bound_pairing(w, a, &p, gamma, cfg)
}

/// `⟨x − z, Wx − Wz⟩ / γ` with `z` the warped resolvent at `x`. Adds
/// `modulus_value` and `bregman_value` diagnostics when the instance carries
/// a modulus or a potential.
pub fn theta_bound(inst: &InclusionInstance, x: &VecN, cfg: &SolveConfig) -> Result<BoundResult> {
    let gamma = inst.gamma;
    if !inst.w.in_domain(x) {
        return Err(Error::Domain(format!("x = {x} outside the kernel domain")));
    }
    let sol = warped_resolvent(&inst.w, &inst.a, &inst.b, gamma, x, cfg)?;
    let z = &sol.z;
    let dx = x.sub(z)?;
    let dw = inst.w.apply(x)?.sub(&inst.w.apply(z)?)?;
    let raw = pairing(&dx, &dw)? / gamma;
    let scale = dx.norm() * dw.norm() / gamma;
    let value = if raw >= 0.0 {
        raw
    } else if raw >= -1e-12 * (1.0 + scale) {
        0.0
    } else {
        return Err(Error::Inconsistent(format!("gauge pairing is negative ({raw:e})")));
    };
    let mut r = BoundResult { value, z: z.clone(), method: Method::Pairing, gamma, diagnostics: Default::default() };
    r.diagnostics.insert("residual".into(), sol.residual);
    r.diagnostics.insert("near_boundary".into(), f64::from(u8::from(sol.near_boundary)));
    if let Some(m) = &inst.modulus {
        r.diagnostics.insert("modulus_value".into(), m.eval(dx.norm()) / gamma);
    }
    if let Some(f) = &inst.f {
        if f.in_interior(z) {
            let sum = f.bregman(x, z)?.try_add(f.bregman(z, x)?)?;
            r.diagnostics.insert("bregman_value".into(), sum.value() / gamma);
        }
    }
    Ok(r)
}

/// Primal-dual instance: `C` on `ℝ^N`, `D^{-1}` on `ℝ^M`, `L` of shape `M × N`.
#[derive(Clone, Debug)]
pub struct KtInstance {
    pub c: MonotoneOperator,
    pub d_inv: MonotoneOperator,
    pub l: Matrix,
    pub gamma: f64,
    pub w_x: MonotoneOperator,
    pub w_y: MonotoneOperator,
    pub modulus_x: Option<UniformModulus>,
    pub modulus_y: Option<UniformModulus>,
}

impl KtInstance {
    pub fn new(
        c: MonotoneOperator,
        d_inv: MonotoneOperator,
        l: Matrix,
        gamma: f64,
        w_x: MonotoneOperator,
        w_y: MonotoneOperator,
    ) -> Result<Self> {
        check_gamma(gamma)?;
        check_dim(c.dim(), l.ncols())?;
        check_dim(d_inv.dim(), l.nrows())?;
        check_dim(c.dim(), w_x.dim())?;
        check_dim(d_inv.dim(), w_y.dim())?;
        Ok(KtInstance { c, d_inv, l, gamma, w_x, w_y, modulus_x: None, modulus_y: None })
    }

    /// Identity kernels on both blocks.
    pub fn hilbert(c: MonotoneOperator, d_inv: MonotoneOperator, l: Matrix, gamma: f64) -> Result<Self> {
        let (n, m) = (c.dim(), d_inv.dim());
        let strong = Some(UniformModulus::Strong { alpha: 1.0 });
        Ok(KtInstance {
            modulus_x: strong.clone(),
            modulus_y: strong,
            ..Self::new(c, d_inv, l, gamma, MonotoneOperator::identity(n), MonotoneOperator::identity(m))?
        })
    }

    /// `(x, y*) ↦ (Cx, D^{-1}y*)`.
    pub fn stacked_a(&self) -> MonotoneOperator {
        MonotoneOperator::product(self.c.clone(), self.d_inv.clone())
    }

    /// `(x, y*) ↦ (Lᵀy*, −Lx)`.
    pub fn stacked_b(&self) -> Result<MonotoneOperator> {
        MonotoneOperator::skew(self.l.clone())
    }

    pub fn stacked_w(&self) -> MonotoneOperator {
        MonotoneOperator::product(self.w_x.clone(), self.w_y.clone())
    }

    /// The same gauge as an [`InclusionInstance`] on the product space.
    pub fn as_inclusion(&self) -> Result<InclusionInstance> {
        InclusionInstance::new(self.stacked_a(), self.stacked_b()?, self.stacked_w(), self.gamma)
    }
}

fn mat_vec(m: &Matrix, v: &VecN) -> Result<VecN> {
    check_dim(m.ncols(), v.dim())?;
    VecN::new((m * nalgebra::DVector::from_column_slice(v.as_slice())).iter().copied().collect())
}

/// `D^{-1}` from `D = ∇g`, via the inverse derivative.
pub fn inverse_of_gradient(d: &MonotoneOperator) -> Result<MonotoneOperator> {
    d.invert_gradient()
}

/// Sum of the primal and dual pairing bounds, each divided by `γ`. The
/// components are in the diagnostics as `component_primal` and
/// `component_dual`; `z` stacks the two auxiliary points.
pub fn kt_gauge_bound(inst: &KtInstance, x: &VecN, y_star: &VecN, cfg: &SolveConfig) -> Result<BoundResult> {
    let gamma = inst.gamma;
    let lt_y = mat_vec(&inst.l.transpose(), y_star)?;
    let lx = mat_vec(&inst.l, x)?;
    let primal = bound_pairing(&inst.w_x, &inst.c, &DualPair::new(x.clone(), lt_y.scale(-1.0)?)?, gamma, cfg)
        .map_err(|e| e.context("primal block"))?;
    let dual = bound_pairing(&inst.w_y, &inst.d_inv, &DualPair::new(y_star.clone(), lx)?, gamma, cfg)
        .map_err(|e| e.context("dual block"))?;
    let mut r = BoundResult {
        value: primal.value + dual.value,
        z: primal.z.concat(&dual.z),
        method: Method::Pairing,
        gamma,
        diagnostics: Default::default(),
    };
    r.diagnostics.insert("component_primal".into(), primal.value);
    r.diagnostics.insert("component_dual".into(), dual.value);
    r.diagnostics.insert("residual".into(), primal.residual().max(dual.residual()));
    let near = primal.near_boundary() || dual.near_boundary();
    r.diagnostics.insert("near_boundary".into(), f64::from(u8::from(near)));
    if let (Some(mx), Some(my)) = (&inst.modulus_x, &inst.modulus_y) {
        let px = x.sub(&primal.z)?.norm();
        let py = y_star.sub(&dual.z)?.norm();
        r.diagnostics.insert("modulus_value".into(), (mx.eval(px) + my.eval(py)) / gamma);
    }
    Ok(r)
}

/// Symmetrized Bregman gauge for `min φ(x) + ψ(Lx)` with kernels `∇f` and `∇g*`:
/// `z = (∇f + γ∂φ)^{-1}(∇f(x) − γLᵀy*)`, `q = (∇g* + γ∂ψ*)^{-1}(∇g*(y*) + γLx)`,
/// value `(D_f(x,z) + D_f(z,x) + D_{g*}(y*,q) + D_{g*}(q,y*)) / γ`.
#[allow(clippy::too_many_arguments)]
pub fn fr_gauge_bound(
    f: &SeparableFunction,
    g_star: &SeparableFunction,
    phi: &SeparableFunction,
    psi_star: &SeparableFunction,
    l: &Matrix,
    gamma: f64,
    x: &VecN,
    y_star: &VecN,
    cfg: &SolveConfig,
) -> Result<BoundResult> {
    check_gamma(gamma)?;
    check_dim(f.dim(), phi.dim())?;
    check_dim(g_star.dim(), psi_star.dim())?;
    if !f.in_interior(x) {
        return Err(Error::Domain(format!("x = {x} outside int dom {}", f.name())));
    }
    if !g_star.in_interior(y_star) {
        return Err(Error::Domain(format!("y* = {y_star} outside int dom {}", g_star.name())));
    }
    let lt_y = mat_vec(&l.transpose(), y_star)?;
    let lx = mat_vec(l, x)?;
    let s_primal = f.gradient(x)?.axpy(-gamma, &lt_y)?;
    let s_dual = g_star.gradient(y_star)?.axpy(gamma, &lx)?;
    let zp = bregman_prox(f, phi, gamma, &s_primal, cfg).map_err(|e| e.context("primal Bregman prox"))?;
    let zd = bregman_prox(g_star, psi_star, gamma, &s_dual, cfg).map_err(|e| e.context("dual Bregman prox"))?;
    let sym = |h: &SeparableFunction, a: &VecN, b: &VecN| -> Result<f64> {
        let s = h.bregman(a, b)?.try_add(h.bregman(b, a)?)?;
        s.as_finite().ok_or_else(|| Error::Domain(format!("Bregman prox landed outside int dom {}", h.name())))
    };
    let primal = sym(f, x, &zp.z)? / gamma;
    let dual = sym(g_star, y_star, &zd.z)? / gamma;
    let mut r = BoundResult {
        value: primal + dual,
        z: zp.z.concat(&zd.z),
        method: Method::Bregman,
        gamma,
        diagnostics: Default::default(),
    };
    r.diagnostics.insert("component_primal".into(), primal);
    r.diagnostics.insert("component_dual".into(), dual);
    r.diagnostics.insert("residual".into(), zp.residual.max(zd.residual));
    r.diagnostics.insert("near_boundary".into(), f64::from(u8::from(zp.near_boundary || zd.near_boundary)));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bound_bregman;
    use crate::functions::ScalarLegendre;

    fn v(c: &[f64]) -> VecN {
        VecN::from_slice(c).unwrap()
    }

    fn cfg() -> SolveConfig {
        SolveConfig::default()
    }

    /// `C x = x − 3`, `D^{-1} y = y − 1`, `L = [1]`; KT point `(1, 2)`.
    fn linear_kt() -> KtInstance {
        let c = MonotoneOperator::affine(Matrix::identity(1, 1), v(&[-3.0])).unwrap();
        let d_inv = MonotoneOperator::affine(Matrix::identity(1, 1), v(&[-1.0])).unwrap();
        KtInstance::hilbert(c, d_inv, Matrix::from_row_slice(1, 1, &[1.0]), 1.0).unwrap()
    }

    #[test]
    fn theta_vanishes_on_zeros() {
        let inst = InclusionInstance::hilbert(MonotoneOperator::identity(1), MonotoneOperator::constant(v(&[1.0])), 1.0).unwrap();
        assert!(theta_bound(&inst, &v(&[-1.0]), &cfg()).unwrap().value <= 1e-15);
        // J₁(0 − 1) = −1/2, value 1/4
        let r = theta_bound(&inst, &v(&[0.0]), &cfg()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-15);
        assert!((r.diagnostic("modulus_value").unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn theta_is_g_on_the_diagonal() {
        let a = MonotoneOperator::subdifferential(SeparableFunction::uniform(ScalarLegendre::BURG, 1));
        let b = MonotoneOperator::constant(v(&[-0.5]));
        let f = SeparableFunction::uniform(ScalarLegendre::BURG, 1);
        let inst = InclusionInstance::bregman(a.clone(), b.clone(), f, 0.4).unwrap();
        let x = v(&[3.0]);
        let t = theta_bound(&inst, &x, &cfg()).unwrap();
        let g = g_bound(&inst.w, &a, &b, 0.4, &x, &x, &cfg()).unwrap();
        assert!((t.value - g.value).abs() < 1e-14);
        assert!((t.value - t.diagnostic("bregman_value").unwrap()).abs() < 1e-12);
    }

    #[test]
    fn kt_gauge_linear_instance() {
        let inst = linear_kt();
        let at = kt_gauge_bound(&inst, &v(&[1.0]), &v(&[2.0]), &cfg()).unwrap();
        assert!(at.value <= 1e-15);
        let off = kt_gauge_bound(&inst, &v(&[1.1]), &v(&[2.1]), &cfg()).unwrap();
        assert!((off.value - 0.01).abs() < 1e-12);
        assert!((off.diagnostic("component_primal").unwrap() - 0.01).abs() < 1e-12);
        assert!(off.diagnostic("component_dual").unwrap().abs() < 1e-12);
    }

    #[test]
    fn kt_gauge_matches_product_space_theta() {
        let inst = linear_kt();
        let stacked = inst.as_inclusion().unwrap();
        for &(x, y) in &[(1.1, 2.1), (-0.4, 3.0), (2.0, 0.0)] {
            let direct = kt_gauge_bound(&inst, &v(&[x]), &v(&[y]), &cfg()).unwrap();
            let theta = theta_bound(&stacked, &v(&[x, y]), &cfg()).unwrap();
            assert!((direct.value - theta.value).abs() < 1e-10);
        }
    }

    #[test]
    fn fr_gauge_quadratic_origin() {
        let q = SeparableFunction::quadratic(1);
        let l = Matrix::identity(1, 1);
        let r = fr_gauge_bound(&q, &q, &q, &q, &l, 1.0, &v(&[0.0]), &v(&[0.0]), &cfg()).unwrap();
        assert!(r.value <= 1e-15);
    }

    #[test]
    fn fr_gauge_burg_is_two_bregman_bounds() {
        let burg = SeparableFunction::uniform(ScalarLegendre::BURG, 1);
        let l = Matrix::from_row_slice(1, 1, &[0.5]);
        let (x, y, gamma) = (v(&[1.0]), v(&[1.0]), 0.7);
        let r = fr_gauge_bound(&burg, &burg, &burg, &burg, &l, gamma, &x, &y, &cfg()).unwrap();
        let a = MonotoneOperator::subdifferential(burg.clone());
        let p1 = bound_bregman(&burg, &a, &DualPair::new(x.clone(), v(&[-0.5])).unwrap(), gamma, &cfg()).unwrap();
        let p2 = bound_bregman(&burg, &a, &DualPair::new(y.clone(), v(&[0.5])).unwrap(), gamma, &cfg()).unwrap();
        assert!((r.value - (p1.value + p2.value)).abs() < 1e-12);
    }

    #[test]
    fn inverse_gradient_helper() {
        let d = MonotoneOperator::gradient(SeparableFunction::uniform(ScalarLegendre::BOLTZMANN_SHANNON, 1)).unwrap();
        let inv = inverse_of_gradient(&d).unwrap();
        let y = v(&[0.7]);
        assert!((d.apply(&inv.apply(&y).unwrap()).unwrap()[0] - 0.7).abs() < 1e-15);
    }
}
