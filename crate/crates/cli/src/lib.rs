//! Command-line front end for `haraux-core`: bound evaluation, sweeps,
//! the self-check suite, comparison panels and primal-dual gauges.
//!
//! Output is CSV with 17 significant digits per number, or SVG line charts.
//! Parallel evaluation never changes the output: rows are emitted in input order.

pub mod bound;
pub mod config;
pub mod csv;
pub mod error;
pub mod figure1;
pub mod gauge;
pub mod svg;
pub mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};

pub use config::{Cli, Command, RunConfig};
pub use error::{CliError, Result};

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs one command, writing to `--out` or stdout.
pub fn run(cfg: &RunConfig) -> Result<()> {
    let out = cfg.out.as_deref();
    match cfg.command {
        Command::Bound => emit(out, &bound::cmd_bound(cfg)?.render()),
        Command::Sweep => match bound::cmd_sweep(cfg)? {
            bound::SweepOutput::Csv(t) => emit(out, &t.render()),
            bound::SweepOutput::Svg(s) => emit(out, &s),
        },
        Command::Gauge => emit(out, &gauge::cmd_gauge(cfg)?.render()),
        Command::Figure1 => {
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("figure1"));
            let sets = figure1::cmd_figure1(&dir)?;
            eprintln!("wrote {} panels to {}", sets.len(), dir.display());
            Ok(())
        }
        Command::Verify => {
            let outcomes = verify::run_checks(cfg.seed, cfg.corrupt_tolerance.as_deref())?;
            emit(out, &verify::report(&outcomes).render())?;
            let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verify(failed.join(", ")))
            }
        }
    }
}
