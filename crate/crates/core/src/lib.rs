//! Grokking in linear teacher-student networks: random-matrix loss predictions,
//! gradient-descent simulators and grokking-time extraction.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod grok;
pub mod quadrature;
pub mod rmt;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
