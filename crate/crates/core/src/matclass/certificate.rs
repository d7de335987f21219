use serde::{Deserialize, Serialize};

use crate::asyncengine::BlockPartition;
use crate::error::{Error, Result};
use crate::sparsekit::{entrywise_abs, Scalar, SparseMatrix};

use super::hmatrix::{check_corollary_splitting, h_matrix_certificate};
use super::power::{spectral_radius_nonneg, RadiusEstimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateOptions {
    /// Power-iteration tolerance.
    pub tol: f64,
    /// Power-iteration iteration cap per estimate.
    pub maxit: usize,
    /// Relative slack of the H-matrix dominance check.
    pub h_tol: f64,
    /// Jacobi sweep cap for the H-matrix search (`max(10 n, 1000)` when absent).
    pub h_maxit: Option<usize>,
    /// Also estimate rho(sum_q |P_q|) when a partition is supplied.
    pub with_sum_p: bool,
    /// Largest n for which sum_q |P_q| is assembled.
    pub sum_p_cap: usize,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            maxit: 200_000,
            h_tol: 1e-10,
            h_maxit: None,
            with_sum_p: false,
            sum_p_cap: 2048,
        }
    }
}

/// Convergence flags of the individual spectral radius estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateFlags {
    pub t_m: bool,
    pub t_f: bool,
    pub q: bool,
    pub alt: bool,
    pub sum_p: Option<bool>,
}

/// Outcome of the convergence analysis of a diagonal alternating splitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub is_h_matrix: bool,
    pub h_vector: Option<Vec<f64>>,
    pub corollary_splitting_ok: bool,
    /// rho(|I - M^-1 A|)
    pub rho_t_m: f64,
    /// rho(|I - F^-1 A|)
    pub rho_t_f: f64,
    /// rho(|Q|), Q = [[0, I - M^-1 A], [I - F^-1 A, 0]]
    pub rho_q: f64,
    /// rho(|(I - F^-1 A)(I - M^-1 A)|)
    pub rho_alt: f64,
    /// rho(sum_q |P_q|), small instances only
    pub rho_sum_p: Option<f64>,
    pub power_iterations_used: usize,
    pub converged: EstimateFlags,
}

/// I - D^-1 A for a diagonal D given by its entries.
pub fn relaxation_operator<T: Scalar>(a: &SparseMatrix<T>, d: &[T]) -> Result<SparseMatrix<T>> {
    if !a.is_square() || d.len() != a.nrows() {
        return Err(Error::shape("relaxation operator needs a square A and matching diagonal"));
    }
    if let Some(index) = d.iter().position(|&v| v == T::zero()) {
        return Err(Error::SingularSplitting { index });
    }
    let inv: Vec<T> = d.iter().map(|&v| -(T::one() / v)).collect();
    a.scale_rows(&inv)?.add_diagonal(&vec![T::one(); a.nrows()])
}

/// |Q| as a 2n x 2n matrix: [[0, |T_M|], [|T_F|, 0]].
pub fn abs_q_matrix(tm_abs: &SparseMatrix<f64>, tf_abs: &SparseMatrix<f64>) -> Result<SparseMatrix<f64>> {
    let n = tm_abs.nrows();
    if !tm_abs.is_square() || !tf_abs.is_square() || tf_abs.nrows() != n {
        return Err(Error::shape("|Q| blocks must be square of equal order"));
    }
    let upper = tm_abs.triplets().map(|(i, j, v)| (i, j + n, v));
    let lower = tf_abs.triplets().map(|(i, j, v)| (i + n, j, v));
    SparseMatrix::from_triplets(2 * n, 2 * n, upper.chain(lower))
}

/// sum_q |P_q| with P_q = (I - F^-1 A)[:, block q] (I - M^-1 A)[block q, :].
pub fn sum_abs_p<T: Scalar>(
    tm: &SparseMatrix<T>,
    tf: &SparseMatrix<T>,
    partition: &BlockPartition,
) -> Result<SparseMatrix<f64>> {
    let n = tm.nrows();
    if partition.n() != n || tf.nrows() != n {
        return Err(Error::shape("partition does not match the operator size"));
    }
    let mut acc = Vec::new();
    for range in partition.ranges() {
        let tf_cols = SparseMatrix::from_triplets(
            n,
            n,
            tf.triplets().filter(|&(_, j, _)| range.contains(&j)),
        )?;
        let tm_rows = SparseMatrix::from_triplets(
            n,
            n,
            tm.triplets().filter(|&(i, _, _)| range.contains(&i)),
        )?;
        let p = tf_cols.matmul(&tm_rows)?;
        acc.extend(p.triplets().map(|(i, j, v)| (i, j, v.modulus())));
    }
    SparseMatrix::from_triplets(n, n, acc)
}

fn diagonal_of<T: Scalar>(name: &str, s: &SparseMatrix<T>, n: usize) -> Result<Vec<T>> {
    if !s.is_square() || s.nrows() != n {
        return Err(Error::shape(format!("{name} must be square of order {n}")));
    }
    if !s.is_diagonal() {
        return Err(Error::UnsupportedSplitting(format!(
            "{name} has off-diagonal entries; only diagonal splittings are certified"
        )));
    }
    Ok(s.diagonal())
}

/// Assembles |I - M^-1 A|, |I - F^-1 A|, |Q| and |(I - F^-1 A)(I - M^-1 A)|,
/// estimates their spectral radii, and runs the H-matrix and splitting checks.
pub fn convergence_certificate<T: Scalar>(
    a: &SparseMatrix<T>,
    m: &SparseMatrix<T>,
    f: &SparseMatrix<T>,
    opts: &CertificateOptions,
    partition: Option<&BlockPartition>,
) -> Result<CertificateReport> {
    if !a.is_square() {
        return Err(Error::shape("A must be square"));
    }
    let n = a.nrows();
    let m_diag = diagonal_of("M", m, n)?;
    let f_diag = diagonal_of("F", f, n)?;
    let want_sum_p = opts.with_sum_p && partition.is_some();
    if want_sum_p && n > opts.sum_p_cap {
        return Err(Error::TooLarge { n, cap: opts.sum_p_cap });
    }

    let tm = relaxation_operator(a, &m_diag)?;
    let tf = relaxation_operator(a, &f_diag)?;
    let tm_abs = entrywise_abs(&tm);
    let tf_abs = entrywise_abs(&tf);
    let q_abs = abs_q_matrix(&tm_abs, &tf_abs)?;
    let alt_abs = entrywise_abs(&tf.matmul(&tm)?);

    let mut used = 0;
    let mut estimate = |b: &SparseMatrix<f64>| -> Result<RadiusEstimate> {
        let e = spectral_radius_nonneg(b, opts.tol, opts.maxit)?;
        used += e.iterations;
        Ok(e)
    };
    let e_tm = estimate(&tm_abs)?;
    let e_tf = estimate(&tf_abs)?;
    let e_q = estimate(&q_abs)?;
    let e_alt = estimate(&alt_abs)?;
    let e_sum_p = match partition {
        Some(p) if want_sum_p => Some(estimate(&sum_abs_p(&tm, &tf, p)?)?),
        _ => None,
    };

    let h = h_matrix_certificate(a, opts.h_tol, opts.h_maxit)?;
    let corollary_splitting_ok = check_corollary_splitting(a, m, f)?;

    Ok(CertificateReport {
        is_h_matrix: h.is_ok(),
        h_vector: h.ok().map(Into::into),
        corollary_splitting_ok,
        rho_t_m: e_tm.rho,
        rho_t_f: e_tf.rho,
        rho_q: e_q.rho,
        rho_alt: e_alt.rho,
        rho_sum_p: e_sum_p.as_ref().map(|e| e.rho),
        power_iterations_used: used,
        converged: EstimateFlags {
            t_m: e_tm.converged,
            t_f: e_tf.converged,
            q: e_q.converged,
            alt: e_alt.converged,
            sum_p: e_sum_p.as_ref().map(|e| e.converged),
        },
    })
}
