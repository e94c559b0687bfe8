//! Continuous homodyne measurement of a dispersively read-out quantum system
//! dephasing in a commuting spin bath.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_runner;
pub mod dispersive_frame;
pub mod error;
pub mod operator_core;
pub mod sme_engine;
pub mod spectroscopy;
pub mod spin_bath;

pub use error::{Result, SmeError};
