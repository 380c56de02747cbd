//! Rank generating functions for n-marked Durfee symbols.
//!
//! `R_n(x; q)` is evaluated as a truncated multisum inside the unit disk, as an
//! exact finite sum at quantum rationals, and its quantum modular cocycle for
//! `S_l = (1 0; l 1)` is computed both from finite sums and from theta period
//! integrals.

// `!(a <= b)` is used on purpose so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
pub mod error;
pub mod modular;
pub mod numerics;
pub mod qmf;
pub mod qseries;
pub mod quantumset;
pub mod ranksum;
pub mod zwegers;

pub use error::{Error, Result};
