use crate::error::Result;
use crate::sparsekit::{dot, norm2, residual, spmv_into, Scalar, SparseMatrix};

use super::{check_system, KrylovConfig, SolveReport, StopReason};

/// Restarted GMRES with modified Gram–Schmidt Arnoldi and Givens rotations.
///
/// `report.iterations` counts Arnoldi steps over all cycles. Each cycle starts
/// from an explicit residual, so a recurrence estimate below `tol` is accepted
/// only once the explicit residual agrees.
pub fn gmres<T: Scalar>(
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

    let mut x = x0.to_vec();
    let mut report = SolveReport {
        iterations: 0,
        final_relres: f64::NAN,
        converged: false,
        matvec_count: 0,
        stop: StopReason::MaxIterations,
        residual_history: Vec::new(),
    };
    let mut w = vec![T::zero(); n];
    loop {
        let r = residual(a, b, &x)?;
        report.matvec_count += 1;
        let beta = norm2(&r);
        report.final_relres = beta / bnorm;
        if !beta.is_finite() {
            report.stop = StopReason::NumericalFailure;
            break;
        }
        if report.final_relres <= cfg.tol {
            report.converged = true;
            report.stop = StopReason::Converged;
            break;
        }
        let remaining = cfg.maxit - report.iterations;
        if remaining == 0 {
            break;
        }
        let cycle = cfg.restart.unwrap_or(usize::MAX).min(remaining).min(n);

        let mut basis: Vec<Vec<T>> = Vec::with_capacity(cycle + 1);
        basis.push(r.iter().map(|v| v.scale(1.0 / beta)).collect());
        // Column j of the (rotated) Hessenberg matrix, j + 2 entries each.
        let mut hess: Vec<Vec<T>> = Vec::with_capacity(cycle);
        let mut cs: Vec<f64> = Vec::with_capacity(cycle);
        let mut sn: Vec<T> = Vec::with_capacity(cycle);
        let mut g = vec![T::from_real(beta)];
        let mut failed = false;

        for j in 0..cycle {
            spmv_into(a, &basis[j], &mut w)?;
            report.matvec_count += 1;
            let mut col = vec![T::zero(); j + 2];
            for (i, v) in basis.iter().enumerate() {
                let h = dot(v, &w);
                col[i] = h;
                for (wk, &vk) in w.iter_mut().zip(v) {
                    *wk -= h * vk;
                }
            }
            let h_next = norm2(&w);
            col[j + 1] = T::from_real(h_next);

            for i in 0..j {
                let (top, bot) = (col[i], col[i + 1]);
                col[i] = top.scale(cs[i]) + sn[i] * bot;
                col[i + 1] = -(sn[i].conj() * top) + bot.scale(cs[i]);
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = col[j].scale(c) + s * col[j + 1];
            col[j + 1] = T::zero();
            g.push(-(s.conj() * g[j]));
            g[j] = g[j].scale(c);
            cs.push(c);
            sn.push(s);
            hess.push(col);

            report.iterations += 1;
            let est = g[j + 1].modulus() / bnorm;
            report.residual_history.push(est);
            if !est.is_finite() || !h_next.is_finite() {
                failed = true;
                break;
            }
            if est <= cfg.tol || h_next == 0.0 {
                break;
            }
            if j + 1 < cycle {
                basis.push(w.iter().map(|v| v.scale(1.0 / h_next)).collect());
            }
        }
        if failed {
            report.stop = StopReason::NumericalFailure;
            break;
        }

        // Back substitution on the triangular factor.
        let k = hess.len();
        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for l in i + 1..k {
                acc -= hess[l][i] * y[l];
            }
            y[i] = acc / hess[i][i];
        }
        for (v, &yi) in basis.iter().zip(&y) {
            for (xk, &vk) in x.iter_mut().zip(v) {
                *xk += yi * vk;
            }
        }
    }
    Ok((x, report))
}

/// Rotation (c, s) with c real such that [c, s; -conj(s), c] [a; b] = [r; 0].
fn givens<T: Scalar>(a: T, b: T) -> (f64, T) {
    let (abs_a, abs_b) = (a.modulus(), b.modulus());
    if abs_b == 0.0 {
        return (1.0, T::zero());
    }
    if abs_a == 0.0 {
        return (0.0, T::one());
    }
    let nu = abs_a.hypot(abs_b);
    (abs_a / nu, a.scale(1.0 / abs_a) * b.conj().scale(1.0 / nu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    #[test]
    fn identity_one_iteration() {
        let a = SparseMatrix::<C>::identity(3);
        let b = vec![C::new(1.0, 2.0), C::new(0.0, -1.0), C::new(3.0, 0.0)];
        let (x, rep) = gmres(&a, &b, &[C::new(0.0, 0.0); 3], &KrylovConfig::new(1e-12, 10)).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 1);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_rhs() {
        let a = SparseMatrix::<f64>::identity(2);
        let (x, rep) = gmres(&a, &[0.0, 0.0], &[1.0, 1.0], &KrylovConfig::new(1e-8, 5)).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn restarted_residuals_nonincreasing_within_cycle() {
        let n = 30;
        let trip = (0..n).flat_map(|i| {
            let mut v = vec![(i, i, 4.0)];
            if i + 1 < n {
                v.push((i, i + 1, -1.8));
                v.push((i + 1, i, -0.2));
            }
            v
        });
        let a = SparseMatrix::from_triplets(n, n, trip).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
        let cfg = KrylovConfig::new(1e-10, 500).with_restart(5);
        let (_, rep) = gmres(&a, &b, &vec![0.0; n], &cfg).unwrap();
        assert!(rep.converged);
        for cycle in rep.residual_history.chunks(5) {
            for w in cycle.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", cycle);
            }
        }
    }

    #[test]
    fn givens_zeroes_second_component() {
        let (a, b) = (C::new(1.0, -2.0), C::new(0.5, 0.7));
        let (c, s) = givens(a, b);
        let bottom = -(s.conj() * a) + b.scale(c);
        assert!(bottom.norm() < 1e-15);
    }
}
