//! The eight acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::time::Instant;

use haraux_cli::figure1;
use haraux_core::bounds::{
    bound_bregman, bound_carlier_fy, bound_composite_self, bound_pairing, fy_bound_dispatch, Method,
};
use haraux_core::functions::{ScalarLegendre, SeparableFunction};
use haraux_core::gauges::{kt_gauge_bound, theta_bound, KtInstance};
use haraux_core::operators::{Matrix, MonotoneOperator};
use haraux_core::oracle::{default_box, haraux_lower_approx, refine, sample_graph, verify_bound_sampled, Verdict};
use haraux_core::par::Exec;
use haraux_core::solvers::lambert::lambert_w;
use haraux_core::solvers::{bregman_prox, solve_resolvent, ResolventProblem, SolveConfig};
use haraux_core::{DualPair, VecN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x4841_5241;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn v(c: &[f64]) -> VecN {
    VecN::from_slice(c).unwrap()
}

fn catalog() -> Vec<ScalarLegendre> {
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

/// Points spread over a compact piece of the open domain.
fn spread(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (lo, hi) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo)),
        (true, false) => (lo + 0.05, lo + 5.0),
        (false, true) => (hi - 5.0, hi - 0.05),
        (false, false) => (-5.0, 5.0),
    };
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn quadratic_composite_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let phi = SeparableFunction::uniform(ScalarLegendre::quad_plus(ScalarLegendre::QUADRATIC).unwrap(), 1);
    let psi = SeparableFunction::quadratic(1);
    let cfg = SolveConfig::default();
    let (mut err, mut order_ok) = (0.0f64, true);
    for k in 0..1000 {
        let (x, u) = if k < 10 {
            let x = rng.random_range(-2.5..2.5);
            (x, 2.0 * x)
        } else {
            (rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0))
        };
        let p = DualPair::scalar(x, u).unwrap();
        let r2 = (2.0 * x - u).powi(2);
        let c = bound_carlier_fy(&phi, &p, 1.0, &cfg).unwrap().value;
        let s = bound_composite_self(&psi, &p, 1.0, &cfg).unwrap().value;
        let e = phi.fenchel_young(&p).unwrap().value();
        err = err.max((c - r2 / 9.0).abs()).max((s - r2 / 8.0).abs()).max((e - r2 / 4.0).abs());
        order_ok &= if 2.0 * x == u { c.max(s).max(e.abs()) <= 1e-10 } else { c < s && s < e };
    }
    outcome(err <= 1e-10 && order_ok, format!("max closed-form error {err:.2e}, strict ordering {order_ok}"))
}

fn burg_closed_form() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let burg = SeparableFunction::uniform(ScalarLegendre::BURG, 1);
    let a = MonotoneOperator::subdifferential(burg.clone());
    let (mut err, mut excess) = (0.0f64, f64::NEG_INFINITY);
    for gamma in [0.1, 1.0, 10.0] {
        for _ in 0..1000 {
            let xi: f64 = 5.0 - rng.random_range(0.0..5.0);
            let mu: f64 = -5.0 + rng.random_range(0.0..5.0);
            let p = DualPair::scalar(xi, mu).unwrap();
            let b = bound_bregman(&burg, &a, &p, gamma, &SolveConfig::default()).unwrap().value;
            let t = 1.0 + xi * mu;
            let closed = gamma * t * t / ((1.0 + gamma) * (1.0 - gamma * xi * mu));
            let l = -1.0 - (-xi * mu).ln() - xi * mu;
            err = err.max((b - closed).abs());
            excess = excess.max(b - l);
        }
    }
    outcome(err <= 1e-10 && excess <= 1e-9, format!("max |bound - closed| {err:.2e}, max bound - L {excess:.2e}"))
}

fn fermi_dirac_zeta() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let fd = SeparableFunction::uniform(ScalarLegendre::FERMI_DIRAC, 1);
    let bs = SeparableFunction::uniform(ScalarLegendre::BOLTZMANN_SHANNON, 1);
    let a = MonotoneOperator::subdifferential(bs.clone());
    let cfg = SolveConfig::default().numeric_only();
    let mut all = true;
    let mut parts = Vec::new();
    for gamma in [0.5, 1.0, 2.0] {
        let (mut err, mut excess) = (0.0f64, f64::NEG_INFINITY);
        for _ in 0..1000 {
            let xi: f64 = rng.random_range(0.01..0.99);
            let mu: f64 = rng.random_range(-3.0..=3.0);
            let s = v(&[(xi / (1.0 - xi)).ln() + gamma * mu]);
            let z = bregman_prox(&fd, &bs, gamma, &s, &cfg).unwrap().z.as_slice()[0];
            let e = xi * (gamma * mu).exp() / (1.0 - xi);
            let zeta = -e / 2.0 + (e * e / 4.0 + e).sqrt();
            err = err.max((z - zeta).abs());
            let p = DualPair::scalar(xi, mu).unwrap();
            let b = bound_bregman(&fd, &a, &p, gamma, &cfg).unwrap().value;
            excess = excess.max(b - (xi.ln() * xi - xi + mu.exp() - xi * mu));
        }
        let ok = err <= 1e-8 && excess <= 1e-9;
        all &= ok;
        parts.push(format!("gamma={gamma}: |z - zeta| {err:.2e}, bound - L {excess:.2e} {}", if ok { "ok" } else { "FAIL" }));
    }
    outcome(all, parts.join("; "))
}

fn figure_panels() -> Outcome {
    let panels = figure1::panels().unwrap();
    let mut lines = Vec::new();
    let mut all = true;
    for p in &panels {
        let gap = p.rows().map(|r| r[2] - r[3]).fold(f64::NEG_INFINITY, f64::max);
        let excess = p.rows().map(|r| r[2].max(r[3]) - r[4]).fold(f64::NEG_INFINITY, f64::max);
        let ok = gap >= 1e-6 && excess <= 1e-9;
        all &= ok;
        lines.push(format!("{}: max new - baseline {gap:.3e}, max excess {excess:.1e}", p.name));
    }
    outcome(all && panels.len() == 4, lines.join("; "))
}

fn graph_characterization() -> Outcome {
    let cfg = SolveConfig::default();
    let (mut on, mut off) = (0.0f64, f64::INFINITY);
    for part in catalog() {
        let phi = SeparableFunction::uniform(part, 1);
        let lifted = SeparableFunction::uniform(ScalarLegendre::quad_plus(part.inner().unwrap_or(part)).unwrap(), 1);
        let d = part.dom();
        // the pairing bound behaves like γδ²/(1 + γφ''(x))², so the floor needs bounded curvature
        for x in spread(d.lo, d.hi, 25).into_iter().filter(|&x| part.second_deriv(x) <= 100.0) {
            let g = part.deriv(x).unwrap();
            for gamma in [0.1, 1.0, 10.0] {
                let p = DualPair::scalar(x, g).unwrap();
                for (m, f) in [
                    (Method::Pairing, None),
                    (Method::Pairing, Some(&lifted)),
                    (Method::Strong, Some(&lifted)),
                    (Method::Bregman, Some(&phi)),
                    (Method::LegendreSelf, None),
                    (Method::CarlierHaraux, None),
                    (Method::CarlierFy, None),
                ] {
                    on = on.max(fy_bound_dispatch(&phi, f, &p, gamma, m, &cfg).unwrap().value);
                }
                for delta in [-2.0, -0.1, 0.1, 2.0] {
                    let q = DualPair::scalar(x, g + delta).unwrap();
                    off = off.min(fy_bound_dispatch(&phi, None, &q, gamma, Method::Pairing, &cfg).unwrap().value);
                }
            }
        }
    }
    outcome(on <= 1e-10 && off >= 1e-8, format!("max on-graph bound {on:.2e}, min off-graph pairing bound {off:.2e}"))
}

fn oracle_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut refine_ok = true;
    for part in catalog() {
        let a = MonotoneOperator::gradient(SeparableFunction::uniform(part, 1)).unwrap();
        let bx = default_box(&a);
        for n in [5, 33, 257] {
            let x = spread(part.dom().lo, part.dom().hi, 7)[rng.random_range(0..7)];
            let u = spread(part.conj_dom().lo, part.conj_dom().hi, 7)[rng.random_range(0..7)];
            let p = DualPair::scalar(x, u).unwrap();
            let c = haraux_lower_approx(&sample_graph(&a, &bx, n, Exec::Parallel).unwrap(), &p, Exec::Parallel).unwrap();
            let f = haraux_lower_approx(&sample_graph(&a, &bx, refine(n), Exec::Parallel).unwrap(), &p, Exec::Parallel).unwrap();
            refine_ok &= f >= c;
        }
    }
    let id = MonotoneOperator::identity(1);
    let grid = sample_graph(&id, &[(-10.0, 10.0)], 4096, Exec::Parallel).unwrap();
    let mut conv = 0.0f64;
    for _ in 0..200 {
        let (x, u) = (rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0));
        let approx = haraux_lower_approx(&grid, &DualPair::scalar(x, u).unwrap(), Exec::Parallel).unwrap();
        conv = conv.max((approx - (x - u).powi(2) / 4.0).abs());
    }
    // the sup is attained inside the sampling box for these pairs
    let cases = [
        (ScalarLegendre::QUADRATIC, (-4.0, 4.0), (-4.0, 4.0)),
        (ScalarLegendre::BURG, (0.2, 3.0), (-3.0, -0.3)),
        (ScalarLegendre::BOLTZMANN_SHANNON, (0.2, 3.0), (-1.0, 1.0)),
        (ScalarLegendre::FERMI_DIRAC, (0.1, 0.9), (-2.0, 2.0)),
    ];
    let cfg = SolveConfig::default();
    let mut consistent = true;
    let mut worst = f64::NEG_INFINITY;
    for (part, xr, ur) in cases {
        let phi = SeparableFunction::uniform(part, 1);
        let a = MonotoneOperator::gradient(phi.clone()).unwrap();
        for _ in 0..10 {
            let p = DualPair::scalar(rng.random_range(xr.0..xr.1), rng.random_range(ur.0..ur.1)).unwrap();
            let gamma = [0.1, 1.0, 10.0][rng.random_range(0..3)];
            for m in [Method::Pairing, Method::Strong, Method::LegendreSelf, Method::CarlierFy] {
                let r = fy_bound_dispatch(&phi, None, &p, gamma, m, &cfg).unwrap();
                let rep = verify_bound_sampled(&r, &a, &p, 1e-6, None, None, Exec::Parallel).unwrap();
                consistent &= rep.verdict == Verdict::Consistent;
                worst = worst.max(r.value - rep.reference);
            }
        }
    }
    outcome(
        refine_ok && conv <= 1e-3 && consistent,
        format!("refinement monotone {refine_ok}, identity error at n=4096 {conv:.2e}, max bound - approx {worst:.2e}"),
    )
}

fn kt_gauge() -> Outcome {
    // min ½‖x − c‖² + g(Lx) with g = ½‖· − d‖²: C x = x − c, D⁻¹y = y + d,
    // c = (1, 0), d = 1, L = [1 2]; solution x = (1, 0), y* = 0
    let c = MonotoneOperator::affine(Matrix::identity(2, 2), v(&[-1.0, 0.0])).unwrap();
    let d = MonotoneOperator::affine(Matrix::identity(1, 1), v(&[1.0])).unwrap();
    let l = Matrix::from_row_slice(1, 2, &[1.0, 2.0]);
    let inst = KtInstance::hilbert(c, d, l, 1.0).unwrap();
    let cfg = SolveConfig::default();
    let at = kt_gauge_bound(&inst, &v(&[1.0, 0.0]), &v(&[0.0]), &cfg).unwrap().value;
    let moved = kt_gauge_bound(&inst, &v(&[1.1, 0.1]), &v(&[0.1]), &cfg).unwrap();
    // primal residual (0.2, 0.3), dual residual −0.2, each contributing ‖r‖²/4
    let hand = (0.13 + 0.04) / 4.0;
    let mut agree = 0.0f64;
    let prod = inst.as_inclusion().unwrap();
    for (x, y) in [([1.0, 0.0], 0.0), ([1.1, 0.1], 0.1), ([-2.0, 3.0], 1.5), ([0.3, -0.7], -2.0)] {
        let direct = kt_gauge_bound(&inst, &v(&x), &v(&[y]), &cfg).unwrap().value;
        let stacked = theta_bound(&prod, &v(&[x[0], x[1], y]), &cfg).unwrap().value;
        agree = agree.max((direct - stacked).abs());
    }
    let ok = at <= 1e-9 && moved.value >= 1e-4 && (moved.value - hand).abs() <= 1e-12 && agree <= 1e-10;
    outcome(
        ok,
        format!("at solution {at:.2e}, displaced {:.6} (hand {hand:.6}), product-space gap {agree:.2e}", moved.value),
    )
}

fn solver_contracts() -> Outcome {
    let mut lw = 0.0f64;
    for t in std::iter::once(0.0).chain((0..=1800).map(|k| 10f64.powf(-12.0 + k as f64 / 100.0))) {
        let w = lambert_w(t).unwrap();
        lw = lw.max((w * w.exp() - t).abs() / (1.0 + t));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let parts = catalog();
    let mut res = 0.0f64;
    let cfg = SolveConfig::default();
    for k in 0..2000 {
        let n = 1 + k % 3;
        let ps: Vec<ScalarLegendre> = (0..n).map(|_| parts[rng.random_range(0..parts.len())]).collect();
        let a = MonotoneOperator::subdifferential(SeparableFunction::new(ps.clone()).unwrap());
        let w = if k % 2 == 0 {
            MonotoneOperator::identity(n)
        } else {
            let lifted = ps.iter().map(|p| ScalarLegendre::quad_plus(p.inner().unwrap_or(*p)).unwrap()).collect();
            MonotoneOperator::gradient(SeparableFunction::new(lifted).unwrap()).unwrap()
        };
        let z0 = VecN::new(ps.iter().map(|p| spread(p.dom().lo, p.dom().hi, 101)[rng.random_range(0..101)]).collect()).unwrap();
        let gamma = rng.random_range(0.01..100.0);
        let rhs = w.apply(&z0).unwrap().axpy(gamma, &a.apply(&z0).unwrap()).unwrap();
        let sol = solve_resolvent(&ResolventProblem::new(&w, &a, gamma, &rhs).unwrap(), &cfg).unwrap();
        res = res.max(sol.residual / (1.0 + rhs.norm_inf()));
    }
    let burg = MonotoneOperator::gradient(SeparableFunction::uniform(ScalarLegendre::BURG, 1)).unwrap();
    let id = MonotoneOperator::identity(1);
    let extra = bound_pairing(&id, &burg, &DualPair::scalar(0.5, -3.0).unwrap(), 1.0, &cfg).unwrap().residual();
    res = res.max(extra / 4.0);
    let mut fd = 0.0f64;
    for part in parts {
        let d = part.dom();
        for x in spread(d.lo, d.hi, 50) {
            let h = 1e-6 * (1.0 + x.abs()) * if d.lo.is_finite() || d.hi.is_finite() { 0.01 } else { 1.0 };
            let num = (part.value(x + h).value() - part.value(x - h).value()) / (2.0 * h);
            let g = part.deriv(x).unwrap();
            fd = fd.max((num - g).abs() / (1.0 + g.abs()));
        }
    }
    let ok = lw <= 1e-13 && res <= 1e-10 && fd <= 1e-5;
    outcome(ok, format!("lambert round trip {lw:.2e}, resolvent residual {res:.2e}, gradient check {fd:.2e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("quadratic-composite sharpness chain", quadratic_composite_chain),
        ("Burg closed-form equality", burg_closed_form),
        ("Fermi-Dirac zeta formula", fermi_dirac_zeta),
        ("comparison panels", figure_panels),
        ("zero/graph characterization", graph_characterization),
        ("oracle consistency", oracle_consistency),
        ("KT gauge", kt_gauge),
        ("solver contracts", solver_contracts),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "criterion {} {name}: {} ({:.2}s) {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
