//! Numerical core for reversible vector fields on T^d × R^d.
#![no_std]

extern crate alloc;

pub mod bnf;
pub mod degeneracy;
pub mod dioph;
pub mod error;
pub mod homological;
pub mod kam;
pub mod series;
pub mod system;
pub mod torus;

pub use error::{Error, Result};
