//! Synchronous alternating solvers: the Hermitian/skew-Hermitian operators
//! `alpha I + H` and `alpha I + S`, the inexact two-half-step scheme with
//! pluggable inner solvers, and the stationary scheme with diagonal `M`, `F`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::krylov::{cg, gmres, richardson, KrylovConfig, SolveReport, StopReason};
use crate::sparsekit::{hermitian_split, norm2, residual_into, Scalar, SparseMatrix};

pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_KMAX: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct HssOperators<T> {
    pub alpha_i_plus_h: SparseMatrix<T>,
    pub alpha_i_plus_s: SparseMatrix<T>,
    pub alpha: f64,
}

pub fn hss_operators<T: Scalar>(a: &SparseMatrix<T>, alpha: f64) -> Result<HssOperators<T>> {
    check_alpha(alpha)?;
    let (h, s) = hermitian_split(a)?;
    let shift = vec![T::from_real(alpha); a.nrows()];
    Ok(HssOperators {
        alpha_i_plus_h: h.add_diagonal(&shift)?,
        alpha_i_plus_s: s.add_diagonal(&shift)?,
        alpha,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSplitting<T> {
    pub m_diag: Vec<T>,
    pub f_diag: Vec<T>,
}

impl<T: Scalar> DiagonalSplitting<T> {
    pub fn new(m_diag: Vec<T>, f_diag: Vec<T>) -> Result<Self> {
        if m_diag.len() != f_diag.len() {
            return Err(Error::shape("M and F diagonals differ in length"));
        }
        for d in [&m_diag, &f_diag] {
            if let Some(index) = d.iter().position(|&v| v == T::zero()) {
                return Err(Error::SingularSplitting { index });
            }
        }
        Ok(Self { m_diag, f_diag })
    }

    pub fn n(&self) -> usize {
        self.m_diag.len()
    }

    pub fn m_matrix(&self) -> SparseMatrix<T> {
        SparseMatrix::from_diagonal(&self.m_diag)
    }

    pub fn f_matrix(&self) -> SparseMatrix<T> {
        SparseMatrix::from_diagonal(&self.f_diag)
    }
}

/// `M = diag(alpha I + H)`, `F = diag(alpha I + S)`.
///
/// The diagonals are read off the assembled shifted operators so they agree
/// bit for bit with what a Jacobi-preconditioned inner solver sees.
pub fn hss_diagonal_splitting<T: Scalar>(a: &SparseMatrix<T>, alpha: f64) -> Result<DiagonalSplitting<T>> {
    if !a.is_square() {
        return Err(Error::shape("A must be square"));
    }
    let ops = hss_operators(a, alpha)?;
    DiagonalSplitting::new(ops.alpha_i_plus_h.diagonal(), ops.alpha_i_plus_s.diagonal())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    Ok(())
}

/// Inner solver for one half-step of the inexact scheme. The correction
/// equation is always solved from a zero initial guess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnerSolver {
    Cg(KrylovConfig),
    Gmres(KrylovConfig),
    /// Richardson preconditioned by the operator's own diagonal.
    Richardson(KrylovConfig),
}

impl InnerSolver {
    pub fn config(&self) -> &KrylovConfig {
        match self {
            Self::Cg(c) | Self::Gmres(c) | Self::Richardson(c) => c,
        }
    }

    pub fn solve<T: Scalar>(&self, op: &SparseMatrix<T>, rhs: &[T]) -> Result<(Vec<T>, SolveReport)> {
        let zero = vec![T::zero(); rhs.len()];
        match self {
            Self::Cg(c) => cg(op, rhs, &zero, c),
            Self::Gmres(c) => gmres(op, rhs, &zero, c),
            Self::Richardson(c) => richardson(op, rhs, &zero, &op.diagonal(), c),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Cg(_) => "CG".into(),
            Self::Gmres(c) => match c.restart {
                Some(m) => format!("GMRES({m})"),
                None => "GMRES".into(),
            },
            Self::Richardson(_) => "Richardson".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InexactReport {
    #[serde(flatten)]
    pub outer: SolveReport,
    /// Inner iterations summed over both half-steps of every outer step.
    pub inner_iterations: usize,
}

fn start<T: Scalar>(a: &SparseMatrix<T>, b: &[T], x0: &[T]) -> Result<(Vec<T>, Vec<T>, f64)> {
    if !a.is_square() || b.len() != a.nrows() || x0.len() != a.nrows() {
        return Err(Error::shape("A, b and x0 sizes disagree"));
    }
    let x = x0.to_vec();
    let mut r = vec![T::zero(); b.len()];
    residual_into(a, b, &x, &mut r)?;
    Ok((x, r, norm2(b)))
}

fn outer_report() -> SolveReport {
    SolveReport {
        iterations: 0,
        final_relres: f64::NAN,
        converged: false,
        matvec_count: 1,
        stop: StopReason::MaxIterations,
        residual_history: Vec::new(),
    }
}

/// Inexact alternating iteration in residual-updating form:
/// `y = solveH(alpha I + H, r); x += y; r = b - Ax; y = solveS(alpha I + S, r); x += y; r = b - Ax`
/// until `||r|| <= eps ||b||` or `kmax` outer steps.
#[allow(clippy::too_many_arguments)]
pub fn hss_inexact<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    alpha: f64,
    inner_h: &InnerSolver,
    inner_s: &InnerSolver,
    eps: f64,
    kmax: usize,
    x0: &[T],
) -> Result<(Vec<T>, InexactReport)> {
    let ops = hss_operators(a, alpha)?;
    hss_inexact_with(a, b, &ops, inner_h, inner_s, eps, kmax, x0)
}

/// As [`hss_inexact`] with prebuilt shifted operators.
#[allow(clippy::too_many_arguments)]
pub fn hss_inexact_with<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    ops: &HssOperators<T>,
    inner_h: &InnerSolver,
    inner_s: &InnerSolver,
    eps: f64,
    kmax: usize,
    x0: &[T],
) -> Result<(Vec<T>, InexactReport)> {
    let (mut x, mut r, bnorm) = start(a, b, x0)?;
    let mut rep = InexactReport {
        outer: outer_report(),
        inner_iterations: 0,
    };
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = T::zero());
        rep.outer = SolveReport::trivial();
        return Ok((x, rep));
    }
    let mut rnorm = norm2(&r);
    while rnorm > eps * bnorm && rep.outer.iterations < kmax {
        for (inner, op) in [(inner_h, &ops.alpha_i_plus_h), (inner_s, &ops.alpha_i_plus_s)] {
            let (y, irep) = inner.solve(op, &r)?;
            rep.inner_iterations += irep.iterations;
            rep.outer.matvec_count += irep.matvec_count + 1;
            if matches!(irep.stop, StopReason::NumericalFailure | StopReason::Indefinite | StopReason::Diverged) {
                rep.outer.stop = StopReason::NumericalFailure;
                rep.outer.final_relres = rnorm / bnorm;
                return Ok((x, rep));
            }
            for (xi, yi) in x.iter_mut().zip(y) {
                *xi += yi;
            }
            residual_into(a, b, &x, &mut r)?;
        }
        rep.outer.iterations += 1;
        rnorm = norm2(&r);
        rep.outer.residual_history.push(rnorm / bnorm);
        if !rnorm.is_finite() {
            rep.outer.stop = StopReason::NumericalFailure;
            break;
        }
    }
    finish(&mut rep.outer, rnorm, bnorm, eps);
    Ok((x, rep))
}

fn finish(rep: &mut SolveReport, rnorm: f64, bnorm: f64, eps: f64) {
    rep.final_relres = rnorm / bnorm;
    if rnorm <= eps * bnorm {
        rep.converged = true;
        rep.stop = StopReason::Converged;
    }
}

/// Stationary alternating iteration with diagonal splittings:
/// `x += M^-1 r; r = b - Ax; x += F^-1 r; r = b - Ax`.
pub fn hss_stationary<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    split: &DiagonalSplitting<T>,
    eps: f64,
    kmax: usize,
    x0: &[T],
) -> Result<(Vec<T>, SolveReport)> {
    hss_stationary_observed(a, b, split, eps, kmax, x0, |_, _| {})
}

/// As [`hss_stationary`], calling `observe(k, x)` after every completed outer
/// step `k` (1-based).
#[allow(clippy::too_many_arguments)]
pub fn hss_stationary_observed<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    split: &DiagonalSplitting<T>,
    eps: f64,
    kmax: usize,
    x0: &[T],
    mut observe: impl FnMut(usize, &[T]),
) -> Result<(Vec<T>, SolveReport)> {
    if split.n() != a.nrows() {
        return Err(Error::shape("splitting size does not match A"));
    }
    let (mut x, mut r, bnorm) = start(a, b, x0)?;
    let mut rep = outer_report();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok((x, SolveReport::trivial()));
    }
    let mut rnorm = norm2(&r);
    while rnorm > eps * bnorm && rep.iterations < kmax {
        for d in [&split.m_diag, &split.f_diag] {
            for i in 0..x.len() {
                x[i] += r[i] / d[i];
            }
            residual_into(a, b, &x, &mut r)?;
        }
        rep.matvec_count += 2;
        rep.iterations += 1;
        rnorm = norm2(&r);
        rep.residual_history.push(rnorm / bnorm);
        if !rnorm.is_finite() || x.iter().any(|v| !v.is_finite()) {
            rep.final_relres = rnorm / bnorm;
            rep.stop = StopReason::Diverged;
            return Ok((x, rep));
        }
        observe(rep.iterations, &x);
    }
    finish(&mut rep, rnorm, bnorm, eps);
    Ok((x, rep))
}
