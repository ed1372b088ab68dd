//! Viscous approximation of scalar conservation laws on a bounded interval
//! with homogeneous Dirichlet data: mollified initial data, an explicit
//! finite-volume solver, an inviscid Godunov reference and checks of the
//! a priori estimates and of the entropy inequalities of the limit.

pub mod bv;
pub mod cli;
pub mod config;
pub mod entropy;
pub mod error;
pub mod estimates;
pub mod grid;
pub mod models;
pub mod mollify;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
