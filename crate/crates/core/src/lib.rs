//! Truncated formal solutions of moment partial differential equations.
//!
//! The crate covers the pieces needed to study such an equation at desk
//! scale:
//!
//! - [`sequences`]: moment sequences `m(n)` in log space and finite-range
//!   witnesses of their structural properties;
//! - [`series`]: dense truncated multivariate polynomials and time series
//!   with moment derivatives;
//! - [`norms`]: majorant norms and their inequalities;
//! - [`polygon`]: operator terms, the Newton polygon and `1/k₁`;
//! - [`solver`]: the coefficient recursion, the constant-coefficient
//!   path and residual certification;
//! - [`growth`]: growth-order regression against a reference sequence;
//! - [`io`]: problem files and the coefficient CSV format.

pub mod error;
pub mod growth;
pub mod io;
pub mod norms;
pub mod polygon;
pub mod sequences;
pub mod series;
pub mod solver;

pub use error::{Error, Result};
