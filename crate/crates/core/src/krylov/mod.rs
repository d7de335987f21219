//! Unpreconditioned Krylov baselines (CG, restarted GMRES) and a
//! Jacobi-preconditioned Richardson iteration, usable standalone or as inner
//! solvers of the inexact alternating scheme.

mod cg;
mod gmres;
mod richardson;

use serde::{Deserialize, Serialize};

pub use cg::cg;
pub use gmres::gmres;
pub use richardson::richardson;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    /// Relative residual threshold `||b - Ax|| / ||b||`.
    pub tol: f64,
    /// Maximum number of iterations (inner Arnoldi steps for GMRES).
    pub maxit: usize,
    /// GMRES restart length; `None` means full GMRES.
    pub restart: Option<usize>,
}

impl KrylovConfig {
    pub fn new(tol: f64, maxit: usize) -> Self {
        Self {
            tol,
            maxit,
            restart: None,
        }
    }

    pub fn with_restart(mut self, restart: usize) -> Self {
        self.restart = Some(restart);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.maxit == 0 {
            return Err(Error::Config("maxit must be at least 1".into()));
        }
        if self.restart == Some(0) {
            return Err(Error::Config("restart must be at least 1".into()));
        }
        Ok(())
    }
}

/// Why an iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// CG met `p^H A p <= 0`.
    Indefinite,
    /// NaN or infinity in the recurrence.
    NumericalFailure,
    /// Non-finite iterate or residual in a stationary or outer iteration.
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub final_relres: f64,
    pub converged: bool,
    pub matvec_count: usize,
    pub stop: StopReason,
    /// Relative residual after each iteration (recurrence estimates for Krylov
    /// methods).
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub residual_history: Vec<f64>,
}

impl SolveReport {
    pub(crate) fn trivial() -> Self {
        Self {
            iterations: 0,
            final_relres: 0.0,
            converged: true,
            matvec_count: 0,
            stop: StopReason::Converged,
            residual_history: Vec::new(),
        }
    }
}

pub(crate) fn check_system<T: crate::sparsekit::Scalar>(
    a: &crate::sparsekit::SparseMatrix<T>,
    b: &[T],
    x0: &[T],
) -> Result<()> {
    if !a.is_square() || b.len() != a.nrows() || x0.len() != a.ncols() {
        return Err(Error::shape(format!(
            "system {}x{} with b of length {} and x0 of length {}",
            a.nrows(),
            a.ncols(),
            b.len(),
            x0.len()
        )));
    }
    Ok(())
}
