//! Hausdorff dimension of limsup sets cut out by weighted products of digits
//! in d-decaying Gauss-like systems.
//!
//! The dimension is the root `s₀` of `P(s) = A(s)·log B`, where `P` is the
//! pressure of the system and `A` the value of a small min-max program over
//! the weight simplex. The crate computes both sides, bisects for the root
//! and carries numerical checks of the upper and lower bound constructions.

// `!(x > y)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound_lab;
pub mod dimension;
pub mod error;
pub mod exec;
pub mod format;
pub mod ifs;
pub mod pressure;
pub mod series;
pub mod validation;
pub mod weights;

pub use error::{Error, Result};
pub use ifs::{SystemKind, SystemSpec, Word};
pub use weights::{SimplexPoint, TargetSpec};
