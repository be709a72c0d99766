//! Bimodal skewed distributions built from a symmetric base by two-piece
//! skewing and a quadratic bimodality tilt: the bimodal skew normal (BSN),
//! bimodal skewed standardized Student (BSSTD) and bimodal skewed
//! generalized t (BSGT).
//!
//! * [`dist`]: densities, moments, distribution functions, modes.
//! * [`sampling`]: exact composition and scale-mixture samplers.
//! * [`inference`]: Metropolis-within-Gibbs posterior sampling with
//!   Gamma data augmentation for the Student model.
//! * [`oracle`]: independent numerical checks (quadrature, numeric
//!   marginalization, Monte Carlo) and the validation suite.

pub mod dist;
pub mod error;
pub mod inference;
pub mod oracle;
pub mod sampling;
pub mod special;

pub use dist::{BimodalSkewParams, DistributionSpec, Family};
pub use error::{Error, Result};
