//! Loudspeaker driving signals that synthesise a desired interior sound
//! field while suppressing exterior radiation with a directional priority.

pub mod cli;
pub mod evaluation;
pub mod quadrature;
pub mod radiation;
pub mod scenario;
pub mod solvers;
pub mod specfun;
pub mod wavefield;

mod error;

pub use error::{Error, Result};
