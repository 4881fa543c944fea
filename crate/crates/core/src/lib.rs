//! Sharp large deviations for the energy and the maximum likelihood estimator
//! of the fractional Ornstein-Uhlenbeck process `dX = theta X dt + dW^H`,
//! `1/2 < H < 1`, together with a Monte Carlo engine that checks every
//! closed form against simulation.

// NaN-rejecting guards are written as negated comparisons, constants carry
// full double precision, and the numerical kernels index fixed-size arrays.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop,
    clippy::suspicious_arithmetic_impl
)]

pub mod energy;
pub mod error;
pub mod jet;
pub mod mle;
pub mod model;
pub mod sim;
pub mod special_fn;
pub mod tail;
pub mod validate;

#[cfg(test)]
mod properties;

pub use error::{Error, Result};
pub use model::{GenFnPoint, GenFnTerms, ModelParams};
