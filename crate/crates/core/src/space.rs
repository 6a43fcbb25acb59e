//! Vectors of `ℝ^N`, the extended half-line `ℝ ∪ {+∞}` and the duality pairing.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Index};

use crate::error::{check_dim, Error, Result};

/// A finite vector of `ℝ^N`, `N ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct VecN(Vec<f64>);

impl VecN {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("vector coordinate {bad}")));
        }
        Ok(VecN(coords))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(coords.to_vec())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "VecN needs at least one coordinate");
        VecN(vec![0.0; dim])
    }

    pub fn splat(value: f64, dim: usize) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Builds a vector from a map over coordinates; fails if any result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.0.iter().map(|&t| f(t)).collect())
    }

    pub fn try_map(&self, f: impl Fn(usize, f64) -> Result<f64>) -> Result<Self> {
        let coords = self
            .0
            .iter()
            .enumerate()
            .map(|(i, &t)| f(i, t))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }

    fn zip_with(&self, other: &VecN, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Self::new(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn add(&self, other: &VecN) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &VecN) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Result<Self> {
        self.map(|t| s * t)
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &VecN) -> Result<Self> {
        self.zip_with(other, |a, b| a + s * b)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|t| t * t).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, t| m.max(t.abs()))
    }

    /// Concatenates two vectors (used for product spaces).
    pub fn concat(&self, other: &VecN) -> VecN {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        VecN(v)
    }

    /// Splits into `(first n coordinates, rest)`.
    pub fn split(&self, n: usize) -> Result<(VecN, VecN)> {
        if n == 0 || n >= self.dim() {
            return Err(Error::DimensionMismatch { expected: n + 1, found: self.dim() });
        }
        Ok((VecN(self.0[..n].to_vec()), VecN(self.0[n..].to_vec())))
    }
}

impl Index<usize> for VecN {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for VecN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The canonical pairing `⟨x, u*⟩` of `ℝ^N` with itself.
pub fn pairing(x: &VecN, u_star: &VecN) -> Result<f64> {
    check_dim(x.dim(), u_star.dim())?;
    Ok(x.0.iter().zip(&u_star.0).map(|(a, b)| a * b).sum())
}

/// A value in `ℝ ∪ {+∞}`. Never NaN and never `-∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XReal(f64);

impl XReal {
    pub const ZERO: XReal = XReal(0.0);
    pub const INFINITY: XReal = XReal(f64::INFINITY);

    /// Accepts finite reals and `+∞`; rejects NaN and `-∞`.
    pub fn new(v: f64) -> Result<Self> {
        if v.is_nan() || v == f64::NEG_INFINITY {
            Err(Error::NonFinite(format!("extended real {v}")))
        } else {
            Ok(XReal(v))
        }
    }

    pub fn finite(v: f64) -> Result<Self> {
        if v.is_finite() {
            Ok(XReal(v))
        } else {
            Err(Error::NonFinite(format!("expected a finite value, got {v}")))
        }
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_infinite(self) -> bool {
        !self.0.is_finite()
    }

    /// The underlying `f64`, which is `f64::INFINITY` for `+∞`.
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn as_finite(self) -> Option<f64> {
        self.is_finite().then_some(self.0)
    }

    pub fn try_add(self, other: XReal) -> Result<XReal> {
        if self.is_infinite() || other.is_infinite() {
            return Ok(XReal::INFINITY);
        }
        XReal::new(self.0 + other.0)
    }

    /// Adds a finite real; `+∞` absorbs.
    pub fn add_real(self, r: f64) -> Result<XReal> {
        self.try_add(XReal::finite(r)?)
    }
}

impl Add for XReal {
    type Output = XReal;

    /// Panics if two finite operands overflow to `-∞`.
    fn add(self, other: XReal) -> XReal {
        self.try_add(other).expect("extended-real addition overflowed to -inf")
    }
}

impl Eq for XReal {}

impl PartialOrd for XReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for XReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for XReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "+inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// A primal-dual point `(x, u*) ∈ ℝ^N × ℝ^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPair {
    x: VecN,
    u_star: VecN,
}

impl DualPair {
    pub fn new(x: VecN, u_star: VecN) -> Result<Self> {
        check_dim(x.dim(), u_star.dim())?;
        Ok(DualPair { x, u_star })
    }

    pub fn scalar(x: f64, u_star: f64) -> Result<Self> {
        Self::new(VecN::new(vec![x])?, VecN::new(vec![u_star])?)
    }

    pub fn x(&self) -> &VecN {
        &self.x
    }

    pub fn u_star(&self) -> &VecN {
        &self.u_star
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }
}

/// `|a − b| ≤ atol + rtol·|b|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { atol: 1e-10, rtol: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(atol: f64, rtol: f64) -> Self {
        Tolerance { atol, rtol }
    }

    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.atol + self.rtol * b.abs()
    }
}
