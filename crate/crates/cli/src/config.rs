//! Flags, config files and their resolution into a [`RunConfig`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use haraux_core::bounds::Method;
use haraux_core::functions::{ScalarLegendre, SeparableFunction};
use haraux_core::operators::{parse_affine, parse_matrix, Matrix, MonotoneOperator};
use haraux_core::oracle::DEFAULT_SEED;
use haraux_core::VecN;

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "HARAUX_SEED";

#[derive(Parser, Debug, Clone)]
#[command(name = "haraux", version, about = "Lower bounds on Haraux and Fenchel-Young functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// One CSV row per (point, gamma, method).
    Bound,
    /// Bounds along a 1D grid of points.
    Sweep,
    /// Runs the self-check suite and writes a report.
    Verify,
    /// Writes the four comparison panels as CSV and SVG.
    Figure1,
    /// Primal-dual residual gauge at the given points.
    Gauge,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    /// Key=value file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Function for Fenchel-Young bounds, e.g. burg or quad_plus:quadratic.
    #[arg(long, global = true)]
    pub phi: Option<String>,
    /// Kernel potential for the pairing, modulus and bregman methods.
    #[arg(long, global = true)]
    pub f: Option<String>,
    /// Operator A (for gauge: the primal operator C).
    #[arg(long = "op-a", global = true)]
    pub op_a: Option<String>,
    /// Kernel operator W.
    #[arg(long = "op-w", global = true)]
    pub op_w: Option<String>,
    /// Dual operator D^-1 for gauge.
    #[arg(long = "op-dual", global = true)]
    pub op_dual: Option<String>,
    /// Coupling matrix file L for gauge.
    #[arg(long, global = true)]
    pub coupling: Option<String>,
    /// Comma-separated method names.
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// Comma-separated step sizes.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// "x1,x2;u1,u2", repeatable, or @file with one point per line.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub point: Vec<String>,
    /// Sweep grid "x:lo:hi:n" or "u:lo:hi:n".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (directory for figure1); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Test mode: forces the named verify check to use a negative tolerance.
    #[arg(long = "corrupt-tolerance", global = true, hide = true)]
    pub corrupt_tolerance: Option<String>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Svg,
}

/// Operator names: `grad:<fn>`, `subdiff:<fn>`, `affine:<file>`,
/// `joca16:<beta>,<psi>`, `skew:<file>`, `identity`.
#[derive(Clone, Debug)]
pub enum OpSpec {
    Grad(ScalarLegendre),
    Subdiff(ScalarLegendre),
    Identity,
    Fixed(MonotoneOperator),
}

impl OpSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
        let cfg_err = |e: haraux_core::Error| CliError::Config(format!("operator '{s}': {e}"));
        match kind {
            "identity" | "id" => Ok(OpSpec::Identity),
            "grad" => Ok(OpSpec::Grad(function(arg)?)),
            "subdiff" => Ok(OpSpec::Subdiff(function(arg)?)),
            "affine" => Ok(OpSpec::Fixed(parse_affine(&read(arg)?).map_err(cfg_err)?)),
            "skew" => Ok(OpSpec::Fixed(MonotoneOperator::skew(matrix_file(arg)?).map_err(cfg_err)?)),
            "joca16" => {
                let (beta, psi) = arg
                    .split_once(',')
                    .ok_or_else(|| CliError::Config(format!("operator '{s}': expected joca16:<beta>,<psi>")))?;
                let beta = real(beta)?;
                Ok(OpSpec::Fixed(MonotoneOperator::joca16(beta, function(psi)?).map_err(cfg_err)?))
            }
            _ => Err(CliError::Config(format!("unknown operator '{s}'"))),
        }
    }

    /// Fixed operators keep their own dimension; the rest follow `dim`.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            OpSpec::Fixed(op) => Some(op.dim()),
            _ => None,
        }
    }

    pub fn build(&self, dim: usize) -> Result<MonotoneOperator> {
        let op = match self {
            OpSpec::Grad(p) => MonotoneOperator::gradient(SeparableFunction::uniform(*p, dim))?,
            OpSpec::Subdiff(p) => MonotoneOperator::subdifferential(SeparableFunction::uniform(*p, dim)),
            OpSpec::Identity => MonotoneOperator::identity(dim),
            OpSpec::Fixed(op) => op.clone(),
        };
        if op.dim() != dim {
            return Err(CliError::Config(format!("operator {} has dimension {}, points have {dim}", op.name(), op.dim())));
        }
        Ok(op)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    U,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub axis: Axis,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n).map(|k| self.lo + (self.hi - self.lo) * k as f64 / (self.n - 1) as f64).collect()
    }
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [axis, lo, hi, n] = parts[..] else {
            return Err(CliError::Config(format!("grid '{s}': expected axis:lo:hi:n")));
        };
        let axis = match axis {
            "x" => Axis::X,
            "u" | "u_star" => Axis::U,
            _ => return Err(CliError::Config(format!("grid axis must be x or u, got '{axis}'"))),
        };
        let n: usize = n.trim().parse().map_err(|_| CliError::Config(format!("grid size '{n}'")))?;
        if n == 0 {
            return Err(CliError::Config("grid size must be positive".into()));
        }
        Ok(Grid { axis, lo: real(lo)?, hi: real(hi)?, n })
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub phi: Option<ScalarLegendre>,
    pub f: Option<ScalarLegendre>,
    pub op_a: Option<OpSpec>,
    pub op_w: Option<OpSpec>,
    pub op_dual: Option<OpSpec>,
    pub coupling: Option<Matrix>,
    pub methods: Vec<Method>,
    pub gammas: Vec<f64>,
    /// `(x, u*)`, or `(x, y*)` for gauge.
    pub points: Vec<(VecN, VecN)>,
    pub grid: Option<Grid>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub corrupt_tolerance: Option<String>,
}

fn read(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read '{path}': {e}")))
}

fn matrix_file(path: &str) -> Result<Matrix> {
    parse_matrix(&read(path)?).map_err(|e| CliError::Config(format!("'{path}': {e}")))
}

fn function(s: &str) -> Result<ScalarLegendre> {
    s.parse().map_err(|e: haraux_core::Error| CliError::Config(e.to_string()))
}

fn real(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| CliError::Config(format!("not a number: '{s}'")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("not finite: '{s}'")))
    }
}

fn reals(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(real).collect()
}

/// `"x1,x2;u1,u2"`. The halves may differ in length (gauge points are `x;y*`).
pub fn parse_point(s: &str) -> Result<(VecN, VecN)> {
    let (x, u) = s.split_once(';').ok_or_else(|| CliError::Config(format!("point '{s}': expected x;u")))?;
    Ok((VecN::new(reals(x)?)?, VecN::new(reals(u)?)?))
}

fn points(specs: &[String]) -> Result<Vec<(VecN, VecN)>> {
    let mut out = Vec::new();
    for spec in specs {
        if let Some(path) = spec.strip_prefix('@') {
            for line in read(path)?.lines() {
                let line = line.split('#').next().unwrap_or("").trim();
                if !line.is_empty() {
                    out.push(parse_point(line)?);
                }
            }
        } else {
            out.push(parse_point(spec)?);
        }
    }
    Ok(out)
}

/// Fills flags left unset from `key=value` lines. Keys are the long flag
/// names; `point` may repeat.
pub fn merge_config_file(flags: &mut Flags, text: &str) -> Result<()> {
    let mut file_points = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", k + 1)))?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim().to_string());
        let slot = match key.as_str() {
            "phi" => &mut flags.phi,
            "f" => &mut flags.f,
            "op-a" => &mut flags.op_a,
            "op-w" => &mut flags.op_w,
            "op-dual" => &mut flags.op_dual,
            "coupling" => &mut flags.coupling,
            "method" => &mut flags.method,
            "gamma" => &mut flags.gamma,
            "grid" => &mut flags.grid,
            "point" => {
                file_points.push(value);
                continue;
            }
            "seed" => {
                if flags.seed.is_none() {
                    flags.seed = Some(value.parse().map_err(|_| CliError::Config(format!("seed '{value}'")))?);
                }
                continue;
            }
            "out" => {
                flags.out.get_or_insert_with(|| PathBuf::from(&value));
                continue;
            }
            "format" => {
                if flags.format.is_none() {
                    flags.format = Some(Format::from_str(&value, true).map_err(CliError::Config)?);
                }
                continue;
            }
            other => return Err(CliError::Config(format!("config line {}: unknown key '{other}'", k + 1))),
        };
        slot.get_or_insert(value);
    }
    if flags.point.is_empty() {
        flags.point = file_points;
    }
    Ok(())
}

/// Seed precedence: flag (or config file), then the environment, then the default.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64> {
    match (flag, env) {
        (Some(s), _) => Ok(s),
        (None, Some(e)) => {
            let e = e.trim();
            let parsed = match e.strip_prefix("0x").or_else(|| e.strip_prefix("0X")) {
                Some(hex) => u64::from_str_radix(hex, 16),
                None => e.parse(),
            };
            parsed.map_err(|_| CliError::Config(format!("{SEED_ENV}='{e}' is not an unsigned integer")))
        }
        (None, None) => Ok(DEFAULT_SEED),
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let env = std::env::var(SEED_ENV).ok();
        Self::resolve(cli, env.as_deref())
    }

    pub fn resolve(cli: Cli, env_seed: Option<&str>) -> Result<Self> {
        let mut flags = cli.flags;
        if let Some(path) = flags.config.clone() {
            merge_config_file(&mut flags, &read_path(&path)?)?;
        }
        let methods = match &flags.method {
            Some(m) => m
                .split(',')
                .map(|s| s.trim().parse::<Method>().map_err(|e| CliError::Config(e.to_string())))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        let gammas = match &flags.gamma {
            Some(g) => reals(g)?,
            None => Vec::new(),
        };
        if let Some(g) = gammas.iter().find(|g| **g <= 0.0) {
            return Err(CliError::Config(format!("gamma must be positive, got {g}")));
        }
        let op = |s: &Option<String>| s.as_deref().map(OpSpec::parse).transpose();
        Ok(RunConfig {
            command: cli.command,
            phi: flags.phi.as_deref().map(function).transpose()?,
            f: flags.f.as_deref().map(function).transpose()?,
            op_a: op(&flags.op_a)?,
            op_w: op(&flags.op_w)?,
            op_dual: op(&flags.op_dual)?,
            coupling: flags.coupling.as_deref().map(matrix_file).transpose()?,
            methods,
            gammas,
            points: points(&flags.point)?,
            grid: flags.grid.as_deref().map(Grid::from_str).transpose()?,
            seed: resolve_seed(flags.seed, env_seed)?,
            out: flags.out,
            format: flags.format.unwrap_or_default(),
            corrupt_tolerance: flags.corrupt_tolerance,
        })
    }
}

fn read_path(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read '{}': {e}", p.display())))
}
