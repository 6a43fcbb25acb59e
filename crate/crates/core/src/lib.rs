//! Lower bounds on the Haraux function `H_A` and the Fenchel–Young function
//! `L_φ` in Euclidean space.
//!
//! The bounds all come from one construction: pick a kernel operator `W`, a
//! step `γ > 0`, solve `W z + γ A z ∋ W x + γ u*` for the auxiliary point `z`
//! and read off `⟨x − z, Wx − Wz⟩ / γ` (or a modulus / Bregman variant of it).
//! The crate ships
//!
//! * [`space`]: dimension-checked vectors, extended reals and the pairing,
//! * [`functions`]: a small catalog of separable Legendre functions with
//!   closed-form conjugates,
//! * [`operators`]: monotone operators built from the catalog, affine and
//!   skew maps,
//! * [`solvers`]: resolvents, proximity operators, Bregman proxes, Lambert W
//!   and warped resolvents,
//! * [`bounds`]: the lower-bound formulas and the resolvent-based baseline,
//! * [`oracle`]: brute-force graph sampling used to check the bounds,
//! * [`gauges`]: residual gauges for `0 ∈ Ax + Bx` and primal-dual problems.
//!
//! Batch work (graph sampling, sweeps, coordinatewise solves) runs on rayon
//! when the `parallel` feature is on and sequentially otherwise; see [`par`].

// `!(a < b)` is used deliberately so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod functions;
pub mod gauges;
pub mod operators;
pub mod oracle;
pub mod par;
pub mod solvers;
pub mod space;

pub use error::{Error, Result};
pub use space::{pairing, DualPair, Tolerance, VecN, XReal};
