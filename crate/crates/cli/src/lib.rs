//! Sweeps, figure presets, CSV/SVG output and the acceptance checks behind
//! the `udncov` binary.

// `!(x > 0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod checks;
pub mod config;
pub mod csv_out;
pub mod error;
pub mod plot;
pub mod presets;
pub mod sweep;

pub use error::{CliError, Result};
