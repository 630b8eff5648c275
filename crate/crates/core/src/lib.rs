//! Bayesian quantile regression for ordinal outcomes with generalized
//! asymmetric Laplace (GAL) errors.
//!
//! The crate is layered bottom-up:
//!
//! * [`special`], [`gal`]: normal-tail helpers and the GAL family, generic
//!   over [`Real`] so they run in `f64` or `f32`;
//! * [`random`]: the non-standard samplers the MCMC needs;
//! * [`model`], [`mcmc`]: the ordinal likelihood, priors and the FBQROR /
//!   BQROR Gibbs samplers;
//! * [`evaluation`], [`sim`], [`io`]: summaries, information criteria,
//!   covariate effects, simulation designs and file formats.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0)` deliberately rejects NaN

pub mod error;
pub mod evaluation;
pub mod gal;
pub mod io;
pub mod mcmc;
pub mod model;
pub mod optim;
pub mod random;
pub mod scalar;
pub mod sim;
pub mod special;

pub use error::{GalorError, Result};
pub use scalar::Real;

pub type Gal64 = gal::GalParams<f64>;
pub type Gal32 = gal::GalParams<f32>;
pub type QuantileGal64 = gal::QuantileGalParams<f64>;
pub type QuantileGal32 = gal::QuantileGalParams<f32>;
