use crate::error::{Error, Result};
use crate::sparsekit::{norm2, residual_into, Scalar, SparseMatrix};

use super::{check_system, KrylovConfig, SolveReport, StopReason};

/// Jacobi-preconditioned Richardson: `y <- y + D^-1 (b - A y)`.
///
/// With `y0 = 0` and `maxit = 1` this returns exactly `D^-1 b`, the single
/// inner iteration of the two-stage alternating scheme.
pub fn richardson<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    x0: &[T],
    diag: &[T],
    cfg: &KrylovConfig,
) -> Result<(Vec<T>, SolveReport)> {
    check_system(a, b, x0)?;
    cfg.validate()?;
    if diag.len() != b.len() {
        return Err(Error::shape("preconditioner diagonal has the wrong length"));
    }
    if let Some(index) = diag.iter().position(|&d| d == T::zero()) {
        return Err(Error::SingularSplitting { index });
    }
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((vec![T::zero(); n], SolveReport::trivial()));
    }
    let mut y = x0.to_vec();
    let mut r = vec![T::zero(); n];
    let mut report = SolveReport {
        iterations: 0,
        final_relres: f64::NAN,
        converged: false,
        matvec_count: 0,
        stop: StopReason::MaxIterations,
        residual_history: Vec::new(),
    };
    residual_into(a, b, &y, &mut r)?;
    report.matvec_count += 1;
    for k in 1..=cfg.maxit {
        for i in 0..n {
            y[i] += r[i] / diag[i];
        }
        residual_into(a, b, &y, &mut r)?;
        report.matvec_count += 1;
        report.iterations = k;
        report.final_relres = norm2(&r) / bnorm;
        report.residual_history.push(report.final_relres);
        if !report.final_relres.is_finite() {
            report.stop = StopReason::Diverged;
            break;
        }
        if report.final_relres <= cfg.tol {
            report.converged = true;
            report.stop = StopReason::Converged;
            break;
        }
    }
    Ok((y, report))
}
