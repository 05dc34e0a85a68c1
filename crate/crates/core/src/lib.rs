#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod angular;
pub mod chart;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod evolve;
pub mod exactdata;
pub mod grid;
pub mod harness;
pub mod output;
pub mod quadrature;
pub mod radial;

pub use error::{Error, Result};
