//! Orthogonally invariant Gaussian polynomial ensembles on spheres.
//!
//! The crate builds the weight families of the Kostlan, real Fubini–Study,
//! spherical-harmonic and prescribed-profile ensembles, evaluates their
//! covariance analytics (B, δ, δ′), predicts expected extrema through the
//! GOE largest-eigenvalue integral, and checks the predictions by sampling
//! fields and counting zeros, nodal components, extrema and barrier events.

pub mod barrier;
pub mod census;
pub mod covariance;
pub mod ensemble;
pub mod error;
pub mod fieldsim;
pub mod grid;
pub mod quad;
pub mod rmt;
pub mod specfun;
pub mod stats;
pub mod validate;

pub use error::{Error, Result};
