//! Synchronous and asynchronous alternating (HSS-type) iterations for
//! non-Hermitian sparse linear systems, with executable convergence
//! certificates based on H-matrix theory.

pub mod alternating;
pub mod asyncengine;
pub mod error;
pub mod harness;
pub mod krylov;
pub mod matclass;
pub mod sparsekit;

pub use error::{Error, Result};
