#![allow(dead_code)]

use async_hss::alternating::DiagonalSplitting;
use async_hss::sparsekit::{Scalar, SparseMatrix};
use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dense_real(a: &SparseMatrix<f64>) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        d[(i, j)] = v;
    }
    d
}

pub fn dense_complex(a: &SparseMatrix<Complex64>) -> DMatrix<Complex<f64>> {
    let mut d = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplets() {
        d[(i, j)] = Complex::new(v.re, v.im);
    }
    d
}

/// Largest eigenvalue modulus by a dense real Schur decomposition.
pub fn dense_spectral_radius(a: &DMatrix<f64>) -> f64 {
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-13, 100_000).expect("Schur iteration stalled");
    schur.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// rho(|Q|) for Q = [[0, T_M], [T_F, 0]], via |Q|^2 = diag(|T_M||T_F|, |T_F||T_M|).
pub fn dense_rho_q(tm_abs: &SparseMatrix<f64>, tf_abs: &SparseMatrix<f64>) -> f64 {
    dense_spectral_radius(&(dense_real(tm_abs) * dense_real(tf_abs))).sqrt()
}

/// Random sparse pattern with `density` off-diagonal fill and a full diagonal.
pub fn random_pattern(rng: &mut ChaCha8Rng, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut p = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || rng.gen::<f64>() < density {
                p.push((i, j));
            }
        }
    }
    p
}

pub fn random_real(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SparseMatrix<f64> {
    let t: Vec<_> = random_pattern(rng, n, density)
        .into_iter()
        .map(|(i, j)| (i, j, rng.gen_range(-1.0..1.0)))
        .collect();
    SparseMatrix::from_triplets(n, n, t).unwrap()
}

pub fn random_complex(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SparseMatrix<Complex64> {
    let t: Vec<_> = random_pattern(rng, n, density)
        .into_iter()
        .map(|(i, j)| (i, j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    SparseMatrix::from_triplets(n, n, t).unwrap()
}

/// Off-diagonal row sums of |A|.
pub fn offdiag_abs_sums<T: Scalar>(a: &SparseMatrix<T>) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter().zip(vals).filter(|(&j, _)| j != i).map(|(_, v)| v.modulus()).sum()
        })
        .collect()
}

/// Real, strictly diagonally dominant matrix: random off-diagonal part and
/// `|a_ii| = (1 + margin_i) * sum_j |a_ij|`, margins in `[0.05, 1]`,
/// diagonal signs random unless `positive_diagonal`.
pub fn dominant_real(rng: &mut ChaCha8Rng, n: usize, density: f64, positive_diagonal: bool) -> SparseMatrix<f64> {
    let base = random_real(rng, n, density);
    let sums = offdiag_abs_sums(&base);
    let t: Vec<_> = base
        .triplets()
        .map(|(i, j, v)| {
            if i != j {
                return (i, j, v);
            }
            let mag = (1.0 + rng.gen_range(0.05..1.0)) * sums[i].max(0.1);
            let sign = if positive_diagonal || rng.gen::<bool>() { 1.0 } else { -1.0 };
            (i, j, sign * mag)
        })
        .collect();
    SparseMatrix::from_triplets(n, n, t).unwrap()
}

/// Splitting `M = Lambda_M D(A)`, `F = Lambda_F D(A)` with entries of the
/// diagonal scalings drawn from `[1, 3]`.
pub fn scaled_diagonal_splitting(rng: &mut ChaCha8Rng, a: &SparseMatrix<f64>) -> DiagonalSplitting<f64> {
    let d = a.diagonal();
    let m = d.iter().map(|&v| v * rng.gen_range(1.0..3.0)).collect();
    let f = d.iter().map(|&v| v * rng.gen_range(1.0..3.0)).collect();
    DiagonalSplitting::new(m, f).unwrap()
}

/// A dominant instance perturbed so that dominance may fail, with a random
/// diagonal splitting; `rho(|Q|)` lands on both sides of 1.
pub fn perturbed_instance(rng: &mut ChaCha8Rng, n: usize) -> (SparseMatrix<f64>, DiagonalSplitting<f64>) {
    let a = dominant_real(rng, n, 0.2, false);
    let kick = rng.gen_range(0.0..0.6);
    let t: Vec<_> = a
        .triplets()
        .map(|(i, j, v)| if i == j { (i, j, v * (1.0 - kick * rng.gen::<f64>())) } else { (i, j, v) })
        .collect();
    let a = SparseMatrix::from_triplets(n, n, t).unwrap();
    let d = a.diagonal();
    let m = d.iter().map(|&v| v * rng.gen_range(0.7..2.5)).collect();
    let f = d.iter().map(|&v| v * rng.gen_range(0.7..2.5)).collect();
    (a, DiagonalSplitting::new(m, f).unwrap())
}

/// Sparse tridiagonal (1D) helper.
pub fn tridiag<T: Scalar>(n: usize, lo: T, d: T, hi: T) -> SparseMatrix<T> {
    let t = (0..n).flat_map(|i| {
        let mut v = vec![(i, i, d)];
        if i > 0 {
            v.push((i, i - 1, lo));
        }
        if i + 1 < n {
            v.push((i, i + 1, hi));
        }
        v
    });
    SparseMatrix::from_triplets(n, n, t).unwrap()
}

/// `max_i |e_i| / w_i`.
pub fn weighted_vec_norm<T: Scalar>(e: &[T], w: &[f64]) -> f64 {
    e.iter().zip(w).map(|(v, wi)| v.modulus() / wi).fold(0.0, f64::max)
}

pub fn sub<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&a, &b)| a - b).collect()
}
