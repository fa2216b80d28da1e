//! Stability and Hopf-bifurcation analysis of a p53-mdm2 oscillator with a
//! mixed instantaneous/uniformly distributed delay.

// `!(x > tol)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod kernels;
pub mod model;
pub mod normalform;
pub mod plot;
pub mod simulate;
pub mod stability;

pub use error::{Error, Result};
