//! Estimation of Wasserstein barycenters of random measures on the real line.

pub mod barycenter;
pub mod error;
pub mod measures;
pub mod numeric;
pub mod simulation;
pub mod smoothing;
pub mod theory;

pub use error::{Error, Result};
