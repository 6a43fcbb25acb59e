//! `verify`: seeded self-checks across every module, one report row each.

use haraux_core::bounds::{bound_bregman, fy_bound_dispatch, Method};
use haraux_core::functions::{Interval, ScalarLegendre, SeparableFunction};
use haraux_core::gauges::{kt_gauge_bound, theta_bound, KtInstance};
use haraux_core::operators::{monotonicity_probe, Matrix, MonotoneOperator};
use haraux_core::oracle::{default_box, haraux_lower_approx, refine, sample_graph, verify_bound_sampled};
use haraux_core::par::Exec;
use haraux_core::solvers::lambert::lambert_w;
use haraux_core::solvers::{solve_resolvent, ResolventProblem, SolveConfig};
use haraux_core::{pairing, DualPair, VecN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csv::{self, Table};
use crate::error::{CliError, Result};

pub const HEADER: [&str; 7] = ["module", "check", "cases", "worst", "tolerance", "slack", "status"];

/// Tolerance used for a check named by `--corrupt-tolerance`.
pub const CORRUPT_TOLERANCE: f64 = -1e300;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub module: &'static str,
    pub name: &'static str,
    pub cases: usize,
    /// Largest violation measure; the check passes when `worst ≤ tolerance`.
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }

    pub fn id(&self) -> String {
        format!("{}/{}", self.module, self.name)
    }
}

type CheckFn = fn(&mut ChaCha8Rng) -> Result<(usize, f64)>;

const CHECKS: [(&str, &str, f64, CheckFn); 16] = [
    ("space", "pairing_bilinear", 1e-13, pairing_bilinear),
    ("functions", "fenchel_young_nonnegative", 1e-12, fy_nonnegative),
    ("functions", "fenchel_young_graph_zero", 1e-10, fy_graph_zero),
    ("functions", "gradient_finite_difference", 1e-5, gradient_fd),
    ("operators", "monotonicity_probe", 1e-12, monotonicity),
    ("solvers", "lambert_round_trip", 1e-13, lambert_round_trip),
    ("solvers", "resolvent_residual", 1e-10, resolvent_residual),
    ("bounds", "dominance", 1e-9, dominance),
    ("bounds", "graph_zero", 1e-10, bounds_graph_zero),
    ("bounds", "burg_closed_form", 1e-10, burg_closed_form),
    ("oracle", "refinement_monotone", 0.0, refinement_monotone),
    ("oracle", "identity_convergence", 1e-3, identity_convergence),
    ("oracle", "bound_below_sample", 1e-6, bound_below_sample),
    ("gauges", "kt_solution_zero", 1e-9, kt_solution_zero),
    ("gauges", "kt_displaced_positive", -1e-4, kt_displaced_positive),
    ("cli", "csv_round_trip", 0.0, csv_round_trip),
];

pub fn check_ids() -> Vec<String> {
    CHECKS.iter().map(|(m, n, _, _)| format!("{m}/{n}")).collect()
}

/// Runs every check with its own generator derived from `seed`.
pub fn run_checks(seed: u64, corrupt: Option<&str>) -> Result<Vec<CheckOutcome>> {
    if let Some(c) = corrupt {
        if !CHECKS.iter().any(|(m, n, _, _)| *n == c || format!("{m}/{n}") == c) {
            return Err(CliError::Config(format!("unknown check '{c}'")));
        }
    }
    CHECKS
        .iter()
        .enumerate()
        .map(|(k, &(module, name, tol, f))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let (cases, worst) = f(&mut rng).map_err(|e| match e {
                CliError::Solver(m) => CliError::Solver(format!("{module}/{name}: {m}")),
                other => other,
            })?;
            let corrupted = corrupt.is_some_and(|c| c == name || c == format!("{module}/{name}"));
            let tolerance = if corrupted { CORRUPT_TOLERANCE } else { tol };
            Ok(CheckOutcome { module, name, cases, worst, tolerance })
        })
        .collect()
}

pub fn report(outcomes: &[CheckOutcome]) -> Table {
    let mut t = Table::new(&HEADER);
    for o in outcomes {
        t.push(vec![
            o.module.into(),
            o.name.into(),
            o.cases.to_string(),
            csv::num(o.worst),
            csv::num(o.tolerance),
            csv::num(o.tolerance - o.worst),
            if o.passed() { "pass" } else { "fail" }.into(),
        ]);
    }
    t
}

fn catalog() -> Vec<ScalarLegendre> {
    let bases = [
        ScalarLegendre::QUADRATIC,
        ScalarLegendre::BURG,
        ScalarLegendre::BOLTZMANN_SHANNON,
        ScalarLegendre::FERMI_DIRAC,
    ];
    let mut all = bases.to_vec();
    all.extend(bases.iter().filter_map(|b| ScalarLegendre::quad_plus(*b).ok()));
    all
}

/// Uniform draw from a compact piece of an open interval.
fn inside(rng: &mut ChaCha8Rng, d: Interval) -> f64 {
    let (lo, hi) = match (d.lo.is_finite(), d.hi.is_finite()) {
        (true, true) => (d.lo + 0.01 * (d.hi - d.lo), d.hi - 0.01 * (d.hi - d.lo)),
        (true, false) => (d.lo + 0.05, d.lo + 5.0),
        (false, true) => (d.hi - 5.0, d.hi - 0.05),
        (false, false) => (-5.0, 5.0),
    };
    rng.random_range(lo..=hi)
}

fn pick(rng: &mut ChaCha8Rng) -> ScalarLegendre {
    let c = catalog();
    c[rng.random_range(0..c.len())]
}

fn random_pair(rng: &mut ChaCha8Rng, p: ScalarLegendre) -> Result<DualPair> {
    let (x, u) = (inside(rng, p.dom()), inside(rng, p.conj_dom()));
    Ok(DualPair::scalar(x, u)?)
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Result<VecN> {
    Ok(VecN::new((0..n).map(|_| rng.random_range(-5.0..5.0)).collect())?)
}

fn pairing_bilinear(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=4);
        let (x, y, u) = (random_vec(rng, n)?, random_vec(rng, n)?, random_vec(rng, n)?);
        let (a, b) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let lhs = pairing(&x.scale(a)?.add(&y.scale(b)?)?, &u)?;
        let (px, py) = (a * pairing(&x, &u)?, b * pairing(&y, &u)?);
        worst = worst.max((lhs - px - py).abs() / (1.0 + px.abs() + py.abs()));
    }
    Ok((200, worst))
}

fn fy_nonnegative(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..500 {
        let p = pick(rng);
        let pair = random_pair(rng, p)?;
        let l = SeparableFunction::uniform(p, 1).fenchel_young(&pair)?.value();
        worst = worst.max(-l);
    }
    Ok((500, worst))
}

fn fy_graph_zero(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let p = pick(rng);
        let x = inside(rng, p.dom());
        let g = p.deriv(x)?;
        let l = SeparableFunction::uniform(p, 1).fenchel_young(&DualPair::scalar(x, g)?)?.value();
        worst = worst.max(l.abs() / (1.0 + (x * g).abs()));
    }
    Ok((500, worst))
}

fn gradient_fd(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let p = pick(rng);
        let x = inside(rng, p.dom());
        let h = 1e-6 * (1.0 + x.abs()) * if p.dom().hi.is_finite() || p.dom().lo.is_finite() { 0.01 } else { 1.0 };
        let fd = (p.value(x + h).value() - p.value(x - h).value()) / (2.0 * h);
        let g = p.deriv(x)?;
        worst = worst.max((fd - g).abs() / (1.0 + g.abs()));
    }
    Ok((500, worst))
}

fn monotonicity(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst = f64::NEG_INFINITY;
    let mut cases = 0;
    for p in catalog() {
        let op = MonotoneOperator::gradient(SeparableFunction::uniform(p, 2))?;
        let r = monotonicity_probe(&op, &default_box(&op), 200, None, rng.random())?;
        worst = worst.max(-r.min_pairing);
        cases += r.pairs;
    }
    Ok((cases, worst))
}

fn lambert_round_trip(_: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst: f64 = 0.0;
    let ts = std::iter::once(0.0).chain((0..=900).map(|k| 10f64.powf(-3.0 + k as f64 / 100.0)));
    let mut n = 0;
    for t in ts {
        let w = lambert_w(t)?;
        worst = worst.max((w * w.exp() - t).abs() / (1.0 + t));
        n += 1;
    }
    Ok((n, worst))
}

fn resolvent_residual(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst: f64 = 0.0;
    let cfg = SolveConfig::default();
    for _ in 0..300 {
        let n = rng.random_range(1..=2);
        let parts: Vec<ScalarLegendre> = (0..n).map(|_| pick(rng)).collect();
        let a = MonotoneOperator::subdifferential(SeparableFunction::new(parts.clone())?);
        let w = if rng.random_bool(0.5) {
            MonotoneOperator::identity(n)
        } else {
            let kp: Vec<ScalarLegendre> =
                parts.iter().map(|p| ScalarLegendre::quad_plus(p.inner().unwrap_or(*p))).collect::<std::result::Result<_, _>>()?;
            MonotoneOperator::gradient(SeparableFunction::new(kp)?)?
        };
        let z0 = VecN::new(parts.iter().map(|p| inside(rng, p.dom())).collect())?;
        let gamma = rng.random_range(0.05..20.0);
        let rhs = w.apply(&z0)?.axpy(gamma, &a.apply(&z0)?)?;
        let sol = solve_resolvent(&ResolventProblem::new(&w, &a, gamma, &rhs)?, &cfg)?;
        worst = worst.max(sol.residual / (1.0 + rhs.norm_inf()));
    }
    Ok((300, worst))
}

const DOMINANCE_METHODS: [Method; 5] =
    [Method::Pairing, Method::Strong, Method::Bregman, Method::LegendreSelf, Method::CarlierFy];

fn lifted(p: ScalarLegendre) -> Result<SeparableFunction> {
    Ok(SeparableFunction::uniform(ScalarLegendre::quad_plus(p.inner().unwrap_or(p))?, 1))
}

fn dominance(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst = f64::NEG_INFINITY;
    let cfg = SolveConfig::default();
    for _ in 0..300 {
        let p = pick(rng);
        let phi = SeparableFunction::uniform(p, 1);
        let pair = random_pair(rng, p)?;
        let gamma = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        let exact = phi.fenchel_young(&pair)?.value();
        let kernel = lifted(p)?;
        for m in DOMINANCE_METHODS {
            let f = if m == Method::Bregman { Some(&phi) } else { Some(&kernel) };
            let r = fy_bound_dispatch(&phi, f, &pair, gamma, m, &cfg)?;
            worst = worst.max(r.value - exact);
        }
    }
    Ok((300 * DOMINANCE_METHODS.len(), worst))
}

fn bounds_graph_zero(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst: f64 = 0.0;
    let cfg = SolveConfig::default();
    for _ in 0..300 {
        let p = pick(rng);
        let phi = SeparableFunction::uniform(p, 1);
        let x = inside(rng, p.dom());
        let pair = DualPair::scalar(x, p.deriv(x)?)?;
        let gamma = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        for m in DOMINANCE_METHODS {
            let r = fy_bound_dispatch(&phi, None, &pair, gamma, m, &cfg)?;
            worst = worst.max(r.value);
        }
    }
    Ok((300 * DOMINANCE_METHODS.len(), worst))
}

fn burg_closed_form(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst: f64 = 0.0;
    let burg = SeparableFunction::uniform(ScalarLegendre::BURG, 1);
    let a = MonotoneOperator::subdifferential(burg.clone());
    for _ in 0..500 {
        let (xi, mu) = (rng.random_range(0.01..=5.0), rng.random_range(-5.0..-0.01));
        let gamma = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        let r = bound_bregman(&burg, &a, &DualPair::scalar(xi, mu)?, gamma, &SolveConfig::default())?;
        let t = 1.0 + xi * mu;
        let closed = gamma * t * t / ((1.0 + gamma) * (1.0 - gamma * xi * mu));
        worst = worst.max((r.value - closed).abs());
    }
    Ok((500, worst))
}

fn refinement_monotone(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..50 {
        let p = pick(rng);
        let a = MonotoneOperator::gradient(SeparableFunction::uniform(p, 1))?;
        let pair = random_pair(rng, p)?;
        let n = rng.random_range(3..500);
        let bx = default_box(&a);
        let coarse = haraux_lower_approx(&sample_graph(&a, &bx, n, Exec::Parallel)?, &pair, Exec::Parallel)?;
        let fine = haraux_lower_approx(&sample_graph(&a, &bx, refine(n), Exec::Parallel)?, &pair, Exec::Parallel)?;
        worst = worst.max(coarse - fine);
    }
    Ok((50, worst))
}

fn identity_convergence(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let a = MonotoneOperator::identity(1);
    let s = sample_graph(&a, &[(-10.0, 10.0)], 4096, Exec::Parallel)?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (x, u) = (rng.random_range(-5.0..=5.0), rng.random_range(-5.0..=5.0));
        let approx = haraux_lower_approx(&s, &DualPair::scalar(x, u)?, Exec::Parallel)?;
        worst = worst.max((approx - (x - u).powi(2) / 4.0).abs());
    }
    Ok((100, worst))
}

fn bound_below_sample(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let phi = SeparableFunction::uniform(ScalarLegendre::BURG, 1);
    let a = MonotoneOperator::gradient(phi.clone())?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let pair = DualPair::scalar(rng.random_range(0.2..3.0), rng.random_range(-3.0..-0.3))?;
        let gamma = [0.1, 1.0, 10.0][rng.random_range(0..3)];
        for m in [Method::Pairing, Method::LegendreSelf, Method::CarlierFy] {
            let r = fy_bound_dispatch(&phi, None, &pair, gamma, m, &SolveConfig::default())?;
            let rep = verify_bound_sampled(&r, &a, &pair, 1e-6, None, None, Exec::Parallel)?;
            worst = worst.max(r.value - rep.reference);
        }
    }
    Ok((60, worst))
}

/// Affine primal-dual system with diagonal parts whose solution is `(x̄, ȳ)`.
fn kt_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, gamma: f64) -> Result<(KtInstance, VecN, VecN)> {
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let b: Vec<f64> = (0..m).map(|_| rng.random_range(0.5..2.0)).collect();
    let l = Matrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
    let xb: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let yb: Vec<f64> = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
    let lt_y = l.transpose() * nalgebra::DVector::from_column_slice(&yb);
    let lx = &l * nalgebra::DVector::from_column_slice(&xb);
    let c_off = VecN::new((0..n).map(|i| -lt_y[i] - a[i] * xb[i]).collect())?;
    let d_off = VecN::new((0..m).map(|i| lx[i] - b[i] * yb[i]).collect())?;
    let diag = |v: &[f64]| Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(v));
    let c = MonotoneOperator::affine(diag(&a), c_off)?;
    let d = MonotoneOperator::affine(diag(&b), d_off)?;
    Ok((KtInstance::hilbert(c, d, l, gamma)?, VecN::new(xb)?, VecN::new(yb)?))
}

fn kt_solution_zero(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst: f64 = 0.0;
    let cfg = SolveConfig::default();
    for _ in 0..200 {
        let (n, m) = (rng.random_range(1..=2), rng.random_range(1..=2));
        let gamma = rng.random_range(0.1..10.0);
        let (inst, x, y) = kt_instance(rng, n, m, gamma)?;
        let r = kt_gauge_bound(&inst, &x, &y, &cfg)?;
        let theta = theta_bound(&inst.as_inclusion()?, &x.concat(&y), &cfg)?;
        worst = worst.max(r.value).max(theta.value);
    }
    Ok((200, worst))
}

fn kt_displaced_positive(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut worst = f64::NEG_INFINITY;
    let cfg = SolveConfig::default();
    for _ in 0..200 {
        let gamma = rng.random_range(0.5..2.0);
        let (inst, x, y) = kt_instance(rng, 1, 1, gamma)?;
        let r = kt_gauge_bound(&inst, &x.map(|t| t + 0.1)?, &y.map(|t| t + 0.1)?, &cfg)?;
        worst = worst.max(-r.value);
    }
    Ok((200, worst))
}

fn csv_round_trip(rng: &mut ChaCha8Rng) -> Result<(usize, f64)> {
    let mut bad = 0usize;
    let mut n = 0;
    while n < 10_000 {
        let v = f64::from_bits(rng.random());
        if !v.is_finite() {
            continue;
        }
        n += 1;
        if csv::num(v).parse::<f64>().ok() != Some(v) {
            bad += 1;
        }
    }
    Ok((n, bad as f64))
}
