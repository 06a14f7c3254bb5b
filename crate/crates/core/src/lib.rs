//! Limiting spectral laws of Wishart matrices whose entry distribution
//! depends on the matrix size.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bernoulli;
pub mod checks;
pub mod error;
pub mod heavytail;
pub mod limitlaw;
pub mod poly;
pub mod quadrature;
pub mod rng;
pub mod spectra;
pub mod treewords;

pub use error::{Error, Result};
