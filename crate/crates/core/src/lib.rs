//! Coverage probability and area spectral efficiency of ultra-dense cellular
//! networks with elevated base stations and LOS/NLOS propagation.
//!
//! Every routine is generic over the floating-point type; the aliases at the
//! crate root fix it to `f64`.

// `!(x > 0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Coefficient tables are kept at the digits they were published with.
#![allow(clippy::excessive_precision)]

pub mod analytic;
pub mod error;
pub mod montecarlo;
pub mod propagation;
pub mod quadrature;
pub mod real;
pub mod special;

pub use analytic::{AssociationPolicy, Method};
pub use error::{Error, Result};
pub use propagation::Regime;
pub use real::Real;

pub type NetworkConfig = analytic::NetworkConfig<f64>;
pub type CoveragePoint = analytic::CoveragePoint<f64>;
pub type PathlossParams = propagation::PathlossParams<f64>;
pub type LosModel = propagation::LosModel<f64>;
pub type BlockageParams = propagation::BlockageParams<f64>;
pub type SimSettings = montecarlo::SimSettings<f64>;
pub type PppSample = montecarlo::PppSample<f64>;
