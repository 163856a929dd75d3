//! Magnus integrators for the interaction-picture Schrödinger equation and a
//! harness that measures their convergence orders.

pub mod band;
pub mod cli;
pub mod discretize;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod magnus;

pub use error::{Error, Result};
