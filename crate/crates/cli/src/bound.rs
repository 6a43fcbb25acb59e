//! `bound` and `sweep`.

use haraux_core::bounds::{
    bound_bregman, bound_carlier_haraux, bound_modulus, bound_pairing, fy_bound_dispatch, BoundResult, Method,
};
use haraux_core::functions::{Base, SeparableFunction};
use haraux_core::operators::{Matrix, MonotoneOperator};
use haraux_core::par::{self, Exec};
use haraux_core::solvers::SolveConfig;
use haraux_core::{DualPair, VecN};

use crate::config::{Axis, Grid, RunConfig};
use crate::csv::{self, Table};
use crate::error::{CliError, Result};
use crate::svg::{Plot, Series};

pub const BOUND_HEADER: [&str; 8] = ["x", "u_star", "gamma", "method", "bound", "exact", "z", "residual"];

/// Everything needed to evaluate bounds at points of one dimension.
pub struct Problem {
    pub phi: Option<SeparableFunction>,
    pub a: MonotoneOperator,
    pub w: Option<MonotoneOperator>,
    pub f: Option<SeparableFunction>,
    pub methods: Vec<Method>,
}

impl Problem {
    pub fn from_config(cfg: &RunConfig, dim: usize) -> Result<Self> {
        let f = cfg.f.map(|p| SeparableFunction::uniform(p, dim));
        let w = cfg.op_w.as_ref().map(|o| o.build(dim)).transpose()?;
        let (phi, a, default) = match (&cfg.phi, &cfg.op_a) {
            (Some(p), None) => {
                let phi = SeparableFunction::uniform(*p, dim);
                let a = MonotoneOperator::subdifferential(phi.clone());
                (Some(phi), a, vec![Method::LegendreSelf, Method::CarlierFy])
            }
            (None, Some(op)) => (None, op.build(dim)?, vec![Method::Pairing, Method::CarlierHaraux]),
            (Some(_), Some(_)) => return Err(CliError::Config("give either --phi or --op-a, not both".into())),
            (None, None) => return Err(CliError::Config("one of --phi or --op-a is required".into())),
        };
        let methods = if cfg.methods.is_empty() { default } else { cfg.methods.clone() };
        Ok(Problem { phi, a, w, f, methods })
    }

    fn kernel(&self) -> Result<MonotoneOperator> {
        match (&self.w, &self.f) {
            (Some(w), _) => Ok(w.clone()),
            (None, Some(f)) => Ok(MonotoneOperator::gradient(f.clone())?),
            (None, None) => Ok(MonotoneOperator::identity(self.a.dim())),
        }
    }

    pub fn bound(&self, method: Method, p: &DualPair, gamma: f64, cfg: &SolveConfig) -> Result<BoundResult> {
        if let (Some(phi), None) = (&self.phi, &self.w) {
            return Ok(fy_bound_dispatch(phi, self.f.as_ref(), p, gamma, method, cfg)?);
        }
        let r = match method {
            Method::Pairing => bound_pairing(&self.kernel()?, &self.a, p, gamma, cfg)?,
            Method::Modulus | Method::Strong => {
                let w = self.kernel()?;
                let m = w
                    .declared_modulus()
                    .ok_or_else(|| CliError::Config(format!("no modulus known for kernel {}", w.name())))?;
                BoundResult { method, ..bound_modulus(&w, &m, &self.a, p, gamma, cfg)? }
            }
            Method::Bregman => {
                let f = self.f.as_ref().ok_or_else(|| CliError::Config("method bregman needs --f".into()))?;
                bound_bregman(f, &self.a, p, gamma, cfg)?
            }
            Method::CarlierHaraux => bound_carlier_haraux(&self.a, p, gamma, cfg)?,
            other => match &self.phi {
                Some(phi) => fy_bound_dispatch(phi, self.f.as_ref(), p, gamma, other, cfg)?,
                None => return Err(CliError::Config(format!("method {other} needs --phi"))),
            },
        };
        Ok(r)
    }

    /// `L_φ` in function mode; the closed form of `H_A` for affine `A` with
    /// positive definite symmetric part.
    pub fn exact(&self, p: &DualPair) -> Result<Option<f64>> {
        if let Some(phi) = &self.phi {
            return Ok(Some(phi.fenchel_young(p)?.value()));
        }
        Ok(haraux_affine_exact(&self.a, p))
    }
}

/// `sup_y ⟨x − y, My + b − u*⟩ = ¼ rᵀS⁻¹r` with `r = Mx + b − u*`, `S = (M + Mᵀ)/2`.
pub fn haraux_affine_exact(a: &MonotoneOperator, p: &DualPair) -> Option<f64> {
    let (m, b) = match a {
        MonotoneOperator::Affine { m, b } => (m.clone(), b.clone()),
        MonotoneOperator::Gradient(f) if f.parts().iter().all(|q| q.base() == Base::Quadratic && !q.is_quad_plus()) => {
            (Matrix::identity(f.dim(), f.dim()), VecN::zeros(f.dim()))
        }
        _ => return None,
    };
    let x = nalgebra::DVector::from_column_slice(p.x().as_slice());
    let r = &m * x + nalgebra::DVector::from_column_slice(b.as_slice())
        - nalgebra::DVector::from_column_slice(p.u_star().as_slice());
    let s = (&m + m.transpose()) * 0.5;
    let chol = s.cholesky()?;
    Some(0.25 * r.dot(&chol.solve(&r)))
}

pub fn require_gammas(cfg: &RunConfig) -> Result<&[f64]> {
    if cfg.gammas.is_empty() {
        Err(CliError::Config("--gamma is required".into()))
    } else {
        Ok(&cfg.gammas)
    }
}

pub struct Row {
    pub pair: DualPair,
    pub gamma: f64,
    pub method: Method,
    pub result: BoundResult,
    pub exact: Option<f64>,
}

impl Row {
    pub fn cells(&self) -> Vec<String> {
        vec![
            csv::vec(self.pair.x()),
            csv::vec(self.pair.u_star()),
            csv::num(self.gamma),
            self.method.name().to_string(),
            csv::num(self.result.value),
            csv::opt(self.exact),
            csv::vec(&self.result.z),
            csv::num(self.result.residual()),
        ]
    }
}

/// Rows in point-major, then gamma, then method order. Points run in
/// parallel; the order never depends on scheduling.
pub fn evaluate(cfg: &RunConfig, pairs: &[DualPair]) -> Result<Vec<Row>> {
    let gammas = require_gammas(cfg)?;
    let dim = pairs.first().ok_or_else(|| CliError::Config("at least one --point is required".into()))?.dim();
    let problem = Problem::from_config(cfg, dim)?;
    let solve = SolveConfig::default();
    let per_point = par::map_slice(Exec::Parallel, pairs, |p| -> Result<Vec<Row>> {
        if p.dim() != dim {
            return Err(CliError::Config(format!("points mix dimensions {dim} and {}", p.dim())));
        }
        let exact = problem.exact(p)?;
        let mut rows = Vec::new();
        for &gamma in gammas {
            for &method in &problem.methods {
                let result = problem.bound(method, p, gamma, &solve)?;
                rows.push(Row { pair: p.clone(), gamma, method, result, exact });
            }
        }
        Ok(rows)
    });
    let mut out = Vec::new();
    for r in per_point {
        out.extend(r?);
    }
    Ok(out)
}

pub fn pairs_of(cfg: &RunConfig) -> Result<Vec<DualPair>> {
    cfg.points.iter().map(|(x, u)| Ok(DualPair::new(x.clone(), u.clone())?)).collect()
}

pub fn table(rows: &[Row]) -> Table {
    let mut t = Table::new(&BOUND_HEADER);
    for r in rows {
        t.push(r.cells());
    }
    t
}

pub fn cmd_bound(cfg: &RunConfig) -> Result<Table> {
    let pairs = pairs_of(cfg)?;
    Ok(table(&evaluate(cfg, &pairs)?))
}

/// Replaces every coordinate on the grid axis of the base point.
pub fn sweep_pairs(base: &DualPair, grid: &Grid) -> Result<Vec<DualPair>> {
    let n = base.dim();
    grid.values()
        .into_iter()
        .map(|t| {
            let swept = VecN::splat(t, n)?;
            Ok(match grid.axis {
                Axis::X => DualPair::new(swept, base.u_star().clone())?,
                Axis::U => DualPair::new(base.x().clone(), swept)?,
            })
        })
        .collect()
}

pub enum SweepOutput {
    Csv(Table),
    Svg(String),
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<SweepOutput> {
    let grid = cfg.grid.ok_or_else(|| CliError::Config("sweep needs --grid axis:lo:hi:n".into()))?;
    let base = match pairs_of(cfg)?.as_slice() {
        [p] => p.clone(),
        [] => return Err(CliError::Config("sweep needs one --point as the base point".into())),
        _ => return Err(CliError::Config("sweep takes exactly one base --point".into())),
    };
    let pairs = sweep_pairs(&base, &grid)?;
    let rows = evaluate(cfg, &pairs)?;
    Ok(match cfg.format {
        crate::config::Format::Csv => SweepOutput::Csv(table(&rows)),
        crate::config::Format::Svg => SweepOutput::Svg(sweep_plot(&rows, &grid).render()),
    })
}

fn sweep_plot(rows: &[Row], grid: &Grid) -> Plot {
    let coord = |r: &Row| match grid.axis {
        Axis::X => r.pair.x().as_slice()[0],
        Axis::U => r.pair.u_star().as_slice()[0],
    };
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        let label = format!("{} gamma={}", r.method, r.gamma);
        match series.iter_mut().find(|s| s.label == label) {
            Some(s) => s.points.push((coord(r), r.result.value)),
            None => series.push(Series { label, points: vec![(coord(r), r.result.value)] }),
        }
    }
    let mut exact = Series { label: "exact".into(), points: Vec::new() };
    let mut last = None;
    for r in rows {
        if let Some(e) = r.exact {
            let c = coord(r);
            if last != Some(c) {
                exact.points.push((c, e));
                last = Some(c);
            }
        }
    }
    if !exact.points.is_empty() {
        series.push(exact);
    }
    let axis = match grid.axis {
        Axis::X => "x",
        Axis::U => "u*",
    };
    Plot { title: format!("bounds along {axis}"), x_label: axis.into(), y_label: "bound".into(), series }
}
