//! Tools for the one-dimensional wave equation with propagation speed
//! `t^-k` (0 < k < 1), damping `mu/t` and mass `nu^2/t^2`, posed from
//! `t = 1`:
//!
//! ```text
//! u_tt - t^(-2k) u_xx + (mu/t) u_t + (nu^2/t^2) u = g(t, x)
//! ```
//!
//! The crate provides
//!
//! * closed-form derived constants and critical-exponent algebra
//!   ([`params`]),
//! * a Gauss hypergeometric evaluator with certified truncation bounds
//!   ([`hypergeom`]),
//! * the explicit solution kernels E, K0, K1 built from it ([`kernels`]),
//! * a quadrature-based solver for the exact representation formula
//!   ([`repr`]),
//! * an independent finite-difference solver in flattened coordinates
//!   ([`fd`]),
//! * blow-up functionals, comparison solutions and lifespan experiments for
//!   the semilinear source `|u_t|^p` ([`blowup`]),
//! * a config-file driven command line ([`config`], [`cli`]).

pub mod blowup;
pub mod cli;
pub mod config;
pub mod error;
pub mod fd;
pub mod field;
mod gamma;
pub mod hypergeom;
pub mod kernels;
pub mod params;
pub mod quad;
pub mod repr;

pub use error::Error;
pub use params::{DerivedConstants, ExtReal, ModelParams};
