//! # hslab
//!
//! A numerical laboratory for semilinear elliptic boundary-value problems
//! that combine two Hardy-Sobolev critical terms with the singular point on
//! the domain boundary:
//!
//! ```text
//! Δu + λ u^(2*(s1)-1)/|x|^s1 + u^(2*(s2)-1)/|x|^s2 = 0   in Ω,  u = 0 on ∂Ω,
//! ```
//!
//! with `0 ∈ ∂Ω`, `0 ≤ s2 < s1 ≤ 2` and `2*(s) = 2(N-s)/(N-2)`.
//!
//! The crate provides:
//!
//! * exponent algebra, scaling laws, Kelvin transforms and moving-sphere
//!   weights ([`model`]);
//! * axisymmetric graded grids with singular-weight quadrature and discrete
//!   differential operators ([`grid`]);
//! * the energy functional, its gradient, Nehari ray scaling, Pohozaev
//!   residual and mountain-pass energy identities ([`functional`]);
//! * a least-energy solver over Nehari rays with subcritical continuation
//!   and blow-up diagnostics ([`solver`]);
//! * entire least-energy profiles on the truncated half-space together with
//!   the boundary-curvature constants K1, K2, K3 ([`halfspace`]);
//! * concentrated test functions on curved-boundary domains, energy-gap
//!   slope fits and Sobolev-threshold sweeps for the perturbed problem
//!   ([`testfn`]);
//! * residual-certified closed-form reference solutions and constants
//!   ([`oracle`]);
//! * a scenario runner with deterministic CSV/JSON outputs ([`cli`]).
//!
//! Every reference constant is recomputed at run time by two independent
//! routes; nothing numeric is trusted from tables.

pub mod cli;
pub mod error;
pub mod functional;
pub mod grid;
pub mod halfspace;
pub mod model;
pub mod oracle;
pub mod solver;
pub mod testfn;

pub use error::{HsError, Result};
