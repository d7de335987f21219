use crate::error::Result;
use crate::sparsekit::{axpy, dot, norm2, residual, spmv_into, Scalar, SparseMatrix};

use super::{check_system, KrylovConfig, SolveReport, StopReason};

/// Conjugate gradients for Hermitian positive definite `A`.
///
/// Convergence is declared only after the explicit residual `b - Ax` confirms
/// the recurrence estimate; a rejected estimate restarts the recurrence from
/// the true residual.
pub fn cg<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    x0: &[T],
    cfg: &KrylovConfig,
) -> Result<(Vec<T>, SolveReport)> {
    check_system(a, b, x0)?;
    cfg.validate()?;
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((vec![T::zero(); n], SolveReport::trivial()));
    }
    let anorm = (0..n)
        .map(|i| a.row(i).1.iter().map(|v| v.modulus()).sum::<f64>())
        .fold(0.0, f64::max);

    let mut x = x0.to_vec();
    let mut r = residual(a, b, &x)?;
    let mut matvecs = 1;
    let mut rr = dot(&r, &r).re();
    let mut report = SolveReport {
        iterations: 0,
        final_relres: rr.sqrt() / bnorm,
        converged: false,
        matvec_count: 0,
        stop: StopReason::MaxIterations,
        residual_history: Vec::new(),
    };
    if report.final_relres <= cfg.tol {
        report.converged = true;
        report.stop = StopReason::Converged;
        report.matvec_count = matvecs;
        return Ok((x, report));
    }
    let mut p = r.clone();
    let mut q = vec![T::zero(); n];
    for k in 1..=cfg.maxit {
        spmv_into(a, &p, &mut q)?;
        matvecs += 1;
        let pq = dot(&p, &q).re();
        let pp = dot(&p, &p).re();
        if !pq.is_finite() || !pp.is_finite() {
            report.stop = StopReason::NumericalFailure;
            break;
        }
        if pq <= 1e-14 * pp * anorm {
            report.stop = StopReason::Indefinite;
            break;
        }
        let alpha = rr / pq;
        axpy(T::from_real(alpha), &p, &mut x);
        axpy(T::from_real(-alpha), &q, &mut r);
        let rr_new = dot(&r, &r).re();
        report.iterations = k;
        report.final_relres = rr_new.sqrt() / bnorm;
        report.residual_history.push(report.final_relres);
        if !rr_new.is_finite() {
            report.stop = StopReason::NumericalFailure;
            break;
        }
        if report.final_relres <= cfg.tol {
            let true_r = residual(a, b, &x)?;
            matvecs += 1;
            let true_relres = norm2(&true_r) / bnorm;
            report.final_relres = true_relres;
            if true_relres <= cfg.tol {
                report.converged = true;
                report.stop = StopReason::Converged;
                break;
            }
            r = true_r;
            rr = dot(&r, &r).re();
            p.copy_from_slice(&r);
            continue;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + pi.scale(beta);
        }
    }
    report.matvec_count = matvecs;
    Ok((x, report))
}
