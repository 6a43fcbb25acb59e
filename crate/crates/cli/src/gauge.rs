//! `gauge`: the primal-dual residual gauge with identity kernels.

use haraux_core::gauges::{kt_gauge_bound, KtInstance};
use haraux_core::solvers::SolveConfig;

use crate::bound::require_gammas;
use crate::config::RunConfig;
use crate::csv::{self, Table};
use crate::error::{CliError, Result};

pub const HEADER: [&str; 6] = ["x", "y_star", "gamma", "gauge", "component_primal", "component_dual"];

pub fn cmd_gauge(cfg: &RunConfig) -> Result<Table> {
    let gammas = require_gammas(cfg)?;
    let need = |name: &str| CliError::Config(format!("gauge needs --{name}"));
    let c = cfg.op_a.as_ref().ok_or_else(|| need("op-a"))?;
    let d = cfg.op_dual.as_ref().ok_or_else(|| need("op-dual"))?;
    let l = cfg.coupling.as_ref().ok_or_else(|| need("coupling"))?;
    if cfg.points.is_empty() {
        return Err(need("point"));
    }
    let (c, d) = (c.build(l.ncols())?, d.build(l.nrows())?);
    let solve = SolveConfig::default();
    let mut t = Table::new(&HEADER);
    for (x, y) in &cfg.points {
        for &gamma in gammas {
            let inst = KtInstance::hilbert(c.clone(), d.clone(), l.clone(), gamma)?;
            let r = kt_gauge_bound(&inst, x, y, &solve)?;
            t.push(vec![
                csv::vec(x),
                csv::vec(y),
                csv::num(gamma),
                csv::num(r.value),
                csv::opt(r.diagnostic("component_primal")),
                csv::opt(r.diagnostic("component_dual")),
            ]);
        }
    }
    Ok(t)
}
