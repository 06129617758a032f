//! Asymptotics and pricing for the rough Heston model.
// `!(x > 0.0)` is used on purpose throughout: unlike `x <= 0.0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod export;
pub mod largetime;
pub mod mgf;
pub mod model;
pub mod montecarlo;
pub mod pricing;
pub mod quadrature;
pub mod riccati;
pub mod smalltime;
pub mod special;

pub use error::{Error, Result};
