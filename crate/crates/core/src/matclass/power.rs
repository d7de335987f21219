use crate::error::{Error, Result};
use crate::sparsekit::SparseMatrix;

/// Spectral radius estimate for a nonnegative matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusEstimate {
    /// Collatz–Wielandt upper bound `max_i (Bx)_i / x_i` at the final iterate.
    pub rho: f64,
    /// Collatz–Wielandt lower bound `min_i (Bx)_i / x_i` at the final iterate.
    pub lower: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Final (max-norm normalized, strictly positive) iterate.
    pub vector: Vec<f64>,
}

/// Power iteration for `rho(B)`, `B >= 0`, started from the all-ones vector.
///
/// The iteration runs on `B + sigma I` so that 2-periodic structures (such as
/// the block anti-diagonal `|Q|`) do not oscillate; the shift keeps the iterate
/// strictly positive. Estimates are computed from `B` itself, so the shift never
/// enters the reported value. Stops when the Collatz–Wielandt bracket closes to
/// `tol * max(1, rho)`, or when the upper estimate has moved by at most that
/// much for `n` consecutive sweeps. A shorter stagnation test is fooled by rows
/// whose sums equal the current estimate: the all-ones start then keeps the
/// bound flat for as many sweeps as it takes the graph to carry the decay
/// across the plateau.
pub fn spectral_radius_nonneg(b: &SparseMatrix<f64>, tol: f64, maxit: usize) -> Result<RadiusEstimate> {
    power_iteration(b, 0.0, tol, maxit)
}

/// Same as [`spectral_radius_nonneg`] for `B + eps * E` (E the all-ones
/// matrix), applied implicitly. With `eps > 0` the matrix is positive and the
/// returned vector approximates its Perron vector.
pub fn perron_estimate(
    b: &SparseMatrix<f64>,
    eps: f64,
    tol: f64,
    maxit: usize,
) -> Result<RadiusEstimate> {
    power_iteration(b, eps, tol, maxit)
}

fn power_iteration(b: &SparseMatrix<f64>, eps: f64, tol: f64, maxit: usize) -> Result<RadiusEstimate> {
    if !b.is_square() {
        return Err(Error::shape("spectral radius of a non-square matrix"));
    }
    if let Some((i, j, v)) = b.triplets().find(|&(_, _, v)| !(v >= 0.0)) {
        return Err(Error::Domain(format!("entry ({i}, {j}) = {v} is not nonnegative")));
    }
    if eps < 0.0 {
        return Err(Error::Domain("rank-one perturbation must be nonnegative".into()));
    }
    let n = b.nrows();
    if n == 0 {
        return Ok(RadiusEstimate {
            rho: 0.0,
            lower: 0.0,
            converged: true,
            iterations: 0,
            vector: Vec::new(),
        });
    }
    let inf_norm = (0..n)
        .map(|i| b.row(i).1.iter().sum::<f64>() + eps * n as f64)
        .fold(0.0, f64::max);
    let shift = (0.25 * inf_norm).max(1e-3);

    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut prev = f64::NAN;
    let mut flat = 0usize;
    let mut est = RadiusEstimate {
        rho: 0.0,
        lower: 0.0,
        converged: false,
        iterations: 0,
        vector: Vec::new(),
    };
    for it in 1..=maxit.max(1) {
        let total: f64 = if eps > 0.0 { eps * x.iter().sum::<f64>() } else { 0.0 };
        let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
        for i in 0..n {
            y[i] = b.row_dot(i, &x) + total;
            let ratio = y[i] / x[i];
            hi = hi.max(ratio);
            lo = lo.min(ratio);
        }
        est.rho = hi;
        est.lower = lo;
        est.iterations = it;
        let width = tol * hi.max(1.0);
        flat = if (prev - hi).abs() <= width { flat + 1 } else { 0 };
        if hi - lo <= width || flat >= n.max(2) {
            est.converged = true;
            break;
        }
        prev = hi;
        let mut top = 0.0f64;
        for i in 0..n {
            y[i] += shift * x[i];
            top = top.max(y[i]);
        }
        for i in 0..n {
            x[i] = y[i] / top;
        }
    }
    est.vector = x;
    Ok(est)
}
