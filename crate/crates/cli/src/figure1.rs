//! The four comparison panels: Burg with `γ ∈ {0.1, 1, 10}` and
//! Boltzmann–Shannon with the Fermi–Dirac kernel at `γ = 1`. Each panel
//! holds two 1D sweeps.

use std::path::Path;

use haraux_core::bounds::{bound_burg_closed, bound_carlier_fy, bound_fermi_dirac_closed};
use haraux_core::functions::{ScalarLegendre, SeparableFunction};
use haraux_core::par::{self, Exec};
use haraux_core::solvers::SolveConfig;
use haraux_core::DualPair;

use crate::csv::{self, Table};
use crate::error::Result;
use crate::svg::{render_stack, Plot, Series};

pub const HEADER: [&str; 5] = ["x", "u_star", "new_bound", "carlier_bound", "exact_L"];
pub const GRID: usize = 201;
/// Midpoint of the Burg `x` grid, so `u* = −1/X_REF` puts one grid point on the graph.
pub const X_REF: f64 = 2.525;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Burg,
    FermiDirac,
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub label: String,
    /// Which of `x`, `u*` varies along the rows.
    pub varies_x: bool,
    /// `[x, u*, new, carlier, exact]`
    pub rows: Vec<[f64; 5]>,
}

#[derive(Clone, Debug)]
pub struct Panel {
    pub name: String,
    pub title: String,
    pub kind: Kind,
    pub gamma: f64,
    pub sweeps: Vec<Sweep>,
}

impl Panel {
    pub fn rows(&self) -> impl Iterator<Item = &[f64; 5]> {
        self.sweeps.iter().flat_map(|s| s.rows.iter())
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&HEADER);
        for r in self.rows() {
            t.push(r.iter().map(|&v| csv::num(v)).collect());
        }
        t
    }

    pub fn svg(&self) -> String {
        let plots: Vec<Plot> = self
            .sweeps
            .iter()
            .map(|s| {
                let col = if s.varies_x { 0 } else { 1 };
                let series = |label: &str, k: usize| Series {
                    label: label.into(),
                    points: s.rows.iter().map(|r| (r[col], r[k])).collect(),
                };
                Plot {
                    title: format!("{}, {}", self.title, s.label),
                    x_label: if s.varies_x { "x".into() } else { "u*".into() },
                    y_label: "value".into(),
                    series: vec![series("new bound", 2), series("resolvent baseline", 3), series("exact L", 4)],
                }
            })
            .collect();
        render_stack(&plots)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn sweep(kind: Kind, gamma: f64, label: String, varies_x: bool, pts: Vec<(f64, f64)>) -> Result<Sweep> {
    let cfg = SolveConfig::default();
    let phi = match kind {
        Kind::Burg => SeparableFunction::uniform(ScalarLegendre::BURG, 1),
        Kind::FermiDirac => SeparableFunction::uniform(ScalarLegendre::BOLTZMANN_SHANNON, 1),
    };
    let rows = par::map_slice(Exec::Parallel, &pts, |&(x, u)| -> Result<[f64; 5]> {
        let p = DualPair::scalar(x, u)?;
        let new = match kind {
            Kind::Burg => bound_burg_closed(&p, gamma, &cfg)?,
            Kind::FermiDirac => bound_fermi_dirac_closed(&p, gamma, &cfg)?,
        };
        let carlier = bound_carlier_fy(&phi, &p, gamma, &cfg)?;
        Ok([x, u, new.value, carlier.value, phi.fenchel_young(&p)?.value()])
    });
    Ok(Sweep { label, varies_x, rows: rows.into_iter().collect::<Result<_>>()? })
}

pub fn panels() -> Result<Vec<Panel>> {
    let mut out = Vec::new();
    for (tag, gamma) in [("a", 0.1), ("b", 1.0), ("c", 10.0)] {
        let xs = linspace(0.05, 5.0, GRID).into_iter().map(|x| (x, -1.0 / X_REF)).collect();
        let us = linspace(-5.0, -0.05, GRID).into_iter().map(|u| (1.0, u)).collect();
        out.push(Panel {
            name: format!("panel_{tag}_burg"),
            title: format!("Burg, gamma = {gamma}"),
            kind: Kind::Burg,
            gamma,
            sweeps: vec![
                sweep(Kind::Burg, gamma, format!("u* = -1/{X_REF}"), true, xs)?,
                sweep(Kind::Burg, gamma, "x = 1".into(), false, us)?,
            ],
        });
    }
    let mut sweeps = Vec::new();
    for u in [1.0, -1.0] {
        let xs = linspace(0.01, 0.99, GRID).into_iter().map(|x| (x, u)).collect();
        sweeps.push(sweep(Kind::FermiDirac, 1.0, format!("u* = {u}"), true, xs)?);
    }
    out.push(Panel {
        name: "panel_d_entropy".into(),
        title: "Boltzmann-Shannon, Fermi-Dirac kernel, gamma = 1".into(),
        kind: Kind::FermiDirac,
        gamma: 1.0,
        sweeps,
    });
    Ok(out)
}

/// Writes `<name>.csv` and `<name>.svg` for every panel into `dir`.
pub fn cmd_figure1(dir: &Path) -> Result<Vec<Panel>> {
    let panels = panels()?;
    std::fs::create_dir_all(dir)?;
    for p in &panels {
        std::fs::write(dir.join(format!("{}.csv", p.name)), p.table().render())?;
        std::fs::write(dir.join(format!("{}.svg", p.name)), p.svg())?;
    }
    Ok(panels)
}
