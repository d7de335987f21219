use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparsekit::{Scalar, SparseMatrix};

/// A vector with strictly positive entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PositiveWeightVector(Vec<f64>);

impl PositiveWeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        match values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            Some(i) => Err(Error::Weights(format!("entry {i} is not a positive finite number"))),
            None => Ok(Self(values)),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for PositiveWeightVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PositiveWeightVector> for Vec<f64> {
    fn from(v: PositiveWeightVector) -> Self {
        v.0
    }
}

/// ⟨A⟩: moduli on the diagonal, negated moduli elsewhere. The diagonal is
/// always materialized.
pub fn comparison_matrix<T: Scalar>(a: &SparseMatrix<T>) -> Result<SparseMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::shape("comparison matrix of a non-square matrix"));
    }
    let n = a.nrows();
    let stored = a
        .triplets()
        .map(|(i, j, v)| (i, j, if i == j { v.modulus() } else { -v.modulus() }));
    SparseMatrix::from_triplets(n, n, stored.chain((0..n).map(|i| (i, i, 0.0))))
}

/// Why [`h_matrix_certificate`] did not produce a weight vector. None of these
/// prove that A is not an H-matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum NotCertified {
    ZeroDiagonal { row: usize },
    Diverged { iteration: usize },
    NotConverged { iterations: usize, residual: f64 },
    NonPositive { index: usize },
    DominanceFailed { row: usize },
}

impl NotCertified {
    pub fn reason(&self) -> &'static str {
        match self {
            NotCertified::ZeroDiagonal { .. } => "zero_diagonal",
            NotCertified::Diverged { .. } => "diverged",
            NotCertified::NotConverged { .. } => "not_converged",
            NotCertified::NonPositive { .. } => "non_positive",
            NotCertified::DominanceFailed { .. } => "dominance_failed",
        }
    }
}

/// Damping of the Jacobi sweeps on ⟨A⟩u = e.
pub const JACOBI_DAMPING: f64 = 0.9;
/// Residual (max-norm, relative to e) at which the sweeps count as converged.
pub const JACOBI_TOL: f64 = 1e-10;

/// Attempts to construct u > 0 with `|A_ii| u_i > sum_{j != i} |A_ij| u_j` for
/// every row, by solving ⟨A⟩u = e with damped Jacobi sweeps.
///
/// `tol` is the relative slack demanded of each strict inequality; `maxit`
/// defaults to `max(10 n, 1000)` when `None`.
pub fn h_matrix_certificate<T: Scalar>(
    a: &SparseMatrix<T>,
    tol: f64,
    maxit: Option<usize>,
) -> Result<std::result::Result<PositiveWeightVector, NotCertified>> {
    if !a.is_square() {
        return Err(Error::shape("H-matrix certificate of a non-square matrix"));
    }
    let n = a.nrows();
    let diag: Vec<f64> = a.diagonal().iter().map(|v| v.modulus()).collect();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Ok(Err(NotCertified::ZeroDiagonal { row }));
    }
    let cmp = comparison_matrix(a)?;
    let maxit = maxit.unwrap_or((10 * n).max(1000)).max(1);

    let mut u = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut converged = false;
    for it in 1..=maxit {
        let mut residual = 0.0;
        for i in 0..n {
            let r = 1.0 - cmp.row_dot(i, &u);
            residual = f64::max(residual, r.abs());
            next[i] = u[i] + JACOBI_DAMPING * r / diag[i];
        }
        std::mem::swap(&mut u, &mut next);
        if !residual.is_finite() || u.iter().any(|v| !v.is_finite() || v.abs() > 1e150) {
            return Ok(Err(NotCertified::Diverged { iteration: it }));
        }
        if residual <= JACOBI_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        let residual = (0..n)
            .map(|i| (1.0 - cmp.row_dot(i, &u)).abs())
            .fold(0.0, f64::max);
        if residual > JACOBI_TOL {
            return Ok(Err(NotCertified::NotConverged { iterations: maxit, residual }));
        }
    }
    if let Some(index) = u.iter().position(|&v| !(v > 0.0)) {
        return Ok(Err(NotCertified::NonPositive { index }));
    }
    if let Some(row) = first_dominance_failure(a, &u, tol) {
        return Ok(Err(NotCertified::DominanceFailed { row }));
    }
    Ok(Ok(PositiveWeightVector(u)))
}

/// First row where `|A_ii| u_i - sum_{j != i} |A_ij| u_j > tol |A_ii| u_i` fails.
pub fn first_dominance_failure<T: Scalar>(a: &SparseMatrix<T>, u: &[f64], tol: f64) -> Option<usize> {
    (0..a.nrows()).find(|&i| {
        let (cols, vals) = a.row(i);
        let mut diag = 0.0;
        let mut off = 0.0;
        for (&j, v) in cols.iter().zip(vals) {
            if j == i {
                diag = v.modulus() * u[i];
            } else {
                off += v.modulus() * u[j];
            }
        }
        !(diag - off > tol * diag)
    })
}

/// Absolute tolerance of the entrywise splitting identities.
pub const SPLITTING_TOL: f64 = 1e-12;

/// Checks ⟨M⟩ − |M − A| = ⟨A⟩ and ⟨F⟩ − |F − A| = ⟨A⟩ entrywise over the
/// union of the sparsity patterns.
pub fn check_corollary_splitting<T: Scalar>(
    a: &SparseMatrix<T>,
    m: &SparseMatrix<T>,
    f: &SparseMatrix<T>,
) -> Result<bool> {
    let n = a.nrows();
    for (name, s) in [("A", a), ("M", m), ("F", f)] {
        if !s.is_square() || s.nrows() != n {
            return Err(Error::shape(format!("{name} must be square of order {n}")));
        }
    }
    Ok(splitting_identity_holds(a, m)? && splitting_identity_holds(a, f)?)
}

fn splitting_identity_holds<T: Scalar>(a: &SparseMatrix<T>, m: &SparseMatrix<T>) -> Result<bool> {
    let diff = m.linear_combination(T::one(), a, -T::one())?;
    let lhs = comparison_matrix(m)?.linear_combination(
        1.0,
        &crate::sparsekit::entrywise_abs(&diff),
        -1.0,
    )?;
    let gap = lhs.linear_combination(1.0, &comparison_matrix(a)?, -1.0)?;
    Ok(gap.values().iter().all(|v| v.abs() <= SPLITTING_TOL))
}
