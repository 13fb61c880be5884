//! Sparse (maximum hands-off) optimal control for infinite-dimensional
//! linear systems whose dynamics are graphon integral operators.
//!
//! The crate covers the full pipeline:
//!
//! * [`graphon`] — graphons and step graphons, discretized integral
//!   operators, cut norms and the operator-norm sandwich;
//! * [`dynamics`] — matrix exponentials, mild-solution propagation under
//!   piecewise-constant controls, and the switching function;
//! * [`solvers`] — the L¹ and non-convex sparse control solvers, cost
//!   functionals, bang-off-bang certificates, and a brute-force oracle;
//! * [`controllability`] — the spectral approximate-controllability test;
//! * [`network`] — finite networked systems, their lift to the common
//!   grid, and the limit-control approximation experiment;
//! * [`cli`] + [`config`] — the command-line front end, configuration
//!   format, and built-in presets.

pub mod cli;
pub mod config;
pub mod controllability;
pub mod dynamics;
pub mod error;
pub mod graphon;
pub mod linalg;
pub mod network;
pub mod penalty;
pub mod report;
pub mod solvers;

pub use error::{Error, Result};
