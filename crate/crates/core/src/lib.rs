//! Hardy-Littlewood-Sobolev numerics on the Heisenberg group `H^n`, the CR
//! sphere `S^{2n+1}` and discretized CR model manifolds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod discretization;
pub mod error;
pub mod experiments;
pub mod functional;
pub mod heisenberg;
pub mod numerics;
pub mod solver;
pub mod sphere;
mod sum;

pub use error::{Error, Result};
pub use numerics::{log_gamma, make_params, sharp_constant_dh, Params};
