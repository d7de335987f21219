use crate::error::{Error, Result};

use super::csr::SparseMatrix;
use super::scalar::Scalar;

/// y = A x.
pub fn spmv<T: Scalar>(a: &SparseMatrix<T>, x: &[T]) -> Result<Vec<T>> {
    let mut y = vec![T::zero(); a.nrows()];
    spmv_into(a, x, &mut y)?;
    Ok(y)
}

pub fn spmv_into<T: Scalar>(a: &SparseMatrix<T>, x: &[T], y: &mut [T]) -> Result<()> {
    if x.len() != a.ncols() || y.len() != a.nrows() {
        return Err(Error::shape(format!(
            "spmv of a {}x{} matrix with x of length {} into y of length {}",
            a.nrows(),
            a.ncols(),
            x.len(),
            y.len()
        )));
    }
    for (i, yi) in y.iter_mut().enumerate() {
        *yi = a.row_dot(i, x);
    }
    Ok(())
}

/// r = b - A x, with the same row summation order as [`spmv`].
pub fn residual_into<T: Scalar>(a: &SparseMatrix<T>, b: &[T], x: &[T], r: &mut [T]) -> Result<()> {
    if x.len() != a.ncols() || b.len() != a.nrows() || r.len() != a.nrows() {
        return Err(Error::shape("residual operands have inconsistent lengths"));
    }
    for (i, ri) in r.iter_mut().enumerate() {
        *ri = b[i] - a.row_dot(i, x);
    }
    Ok(())
}

pub fn residual<T: Scalar>(a: &SparseMatrix<T>, b: &[T], x: &[T]) -> Result<Vec<T>> {
    let mut r = vec![T::zero(); a.nrows()];
    residual_into(a, b, x, &mut r)?;
    Ok(r)
}

/// ‖b - A x‖₂ / ‖b‖₂ (the absolute norm when b = 0).
pub fn relative_residual<T: Scalar>(a: &SparseMatrix<T>, b: &[T], x: &[T]) -> Result<f64> {
    let r = residual(a, b, x)?;
    let nb = norm2(b);
    let nr = norm2(&r);
    Ok(if nb > 0.0 { nr / nb } else { nr })
}

/// Hermitian and skew-Hermitian parts: H = (A + A^H)/2, S = (A - A^H)/2.
pub fn hermitian_split<T: Scalar>(a: &SparseMatrix<T>) -> Result<(SparseMatrix<T>, SparseMatrix<T>)> {
    if !a.is_square() {
        return Err(Error::shape(format!(
            "hermitian split of a non-square {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let ah = a.conj_transpose();
    let half = T::from_real(0.5);
    let h = a.linear_combination(half, &ah, half)?;
    let s = a.linear_combination(half, &ah, -half)?;
    Ok((h, s))
}

/// |A| entrywise, same sparsity.
pub fn entrywise_abs<T: Scalar>(a: &SparseMatrix<T>) -> SparseMatrix<f64> {
    a.map(Scalar::modulus)
}

/// Weighted row sums `tau_i = (1 / v_i) * sum_j |A_ij| w_j`.
pub fn tau_rowsum<T: Scalar>(a: &SparseMatrix<T>, w: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if w.len() != a.ncols() || v.len() != a.nrows() {
        return Err(Error::shape(format!(
            "tau of a {}x{} matrix with w of length {} and v of length {}",
            a.nrows(),
            a.ncols(),
            w.len(),
            v.len()
        )));
    }
    if let Some(i) = v.iter().position(|&vi| vi == 0.0) {
        return Err(Error::Weights(format!("v has a zero entry at index {i}")));
    }
    Ok((0..a.nrows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            let s: f64 = cols.iter().zip(vals).map(|(&j, v)| v.modulus() * w[j]).sum();
            s / v[i]
        })
        .collect())
}

/// ‖T‖∞^w = max_i tau_i(T, w, w).
pub fn weighted_max_norm<T: Scalar>(t: &SparseMatrix<T>, w: &[f64]) -> Result<f64> {
    if !t.is_square() {
        return Err(Error::shape("weighted max-norm needs a square matrix"));
    }
    if let Some(i) = w.iter().position(|&wi| !(wi > 0.0)) {
        return Err(Error::Weights(format!("w is not positive at index {i}")));
    }
    let tau = tau_rowsum(t, w, w)?;
    Ok(tau.into_iter().fold(0.0, f64::max))
}

/// Euclidean norm.
pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    x.iter().map(|v| v.modulus_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `x^H y`.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(a, b)| a.conj() * *b).sum()
}

/// y += alpha x.
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// max_i |x_i - y_i|.
pub fn max_abs_diff<T: Scalar>(x: &[T], y: &[T]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (*a - *b).modulus()).fold(0.0, f64::max)
}
