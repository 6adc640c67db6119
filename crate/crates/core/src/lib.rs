//! Simulation and numerical verification for the stochastic energy exchange
//! model on the simplex.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod poly;
pub mod process;
pub mod scalar;
pub mod simplex;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use simplex::{Configuration, DirichletMomentOracle, MarginalLaw, ModelParams};
