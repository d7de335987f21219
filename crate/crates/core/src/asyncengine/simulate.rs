use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::alternating::DiagonalSplitting;
use crate::error::{Error, Result};
use crate::sparsekit::{norm2, relative_residual, Scalar, SparseMatrix};

use super::{BlockPartition, DelaySchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsyncStatus {
    Converged,
    /// Schedule or test budget exhausted first.
    NotConverged,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsyncReport {
    /// Fewest local iterations performed by any block.
    pub k_min: usize,
    /// Most local iterations performed by any block.
    pub k_max: usize,
    /// Completed global residual tests (simulator: global steps).
    pub global_tests: usize,
    /// Exact `||b - Ax|| / ||b||` of the returned iterate.
    pub final_relres: f64,
    /// Relative residual of the snapshot that triggered the stop, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_relres: Option<f64>,
    pub converged: bool,
    pub status: AsyncStatus,
    /// Seconds.
    pub wall_time: f64,
}

impl AsyncReport {
    pub(crate) fn from_counts(counts: &[usize]) -> Self {
        Self {
            k_min: counts.iter().copied().min().unwrap_or(0),
            k_max: counts.iter().copied().max().unwrap_or(0),
            global_tests: 0,
            final_relres: f64::NAN,
            snapshot_relres: None,
            converged: false,
            status: AsyncStatus::NotConverged,
            wall_time: 0.0,
        }
    }
}

pub(crate) fn check_inputs<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    split: &DiagonalSplitting<T>,
    part: &BlockPartition,
    x0: &[T],
) -> Result<()> {
    let n = a.nrows();
    if !a.is_square() || b.len() != n || x0.len() != n || split.n() != n || part.n() != n {
        return Err(Error::shape("A, b, x0, splitting and partition sizes disagree"));
    }
    Ok(())
}

/// Versions `k - depth + 1 ..= k` of an n-vector, indexed by absolute version.
struct History<T> {
    slots: Vec<Vec<T>>,
}

impl<T: Scalar> History<T> {
    fn new(depth: usize, init: &[T]) -> Self {
        Self {
            slots: vec![init.to_vec(); depth],
        }
    }

    fn get(&self, version: usize) -> &[T] {
        &self.slots[version % self.slots.len()]
    }

    fn slot_mut(&mut self, version: usize) -> &mut Vec<T> {
        let d = self.slots.len();
        &mut self.slots[version % d]
    }
}

/// `b_i - sum_j a_ij v_j` where column `j` is read from version
/// `k - lag[owner(j)]`; summed in column order like `SparseMatrix::row_dot`.
fn delayed_residual<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    i: usize,
    hist: &History<T>,
    k: usize,
    lag: &[usize],
    owner: &[usize],
) -> T {
    let (cols, vals) = a.row(i);
    let mut acc = T::zero();
    for (&j, &v) in cols.iter().zip(vals) {
        acc += v * hist.get(k - lag[owner[j]])[j];
    }
    b[i] - acc
}

/// Deterministic replay of the two-stage asynchronous alternating scheme:
///
/// ```text
/// y(s, k)   = x(s, k - lx[s][s]) + M_s^-1 (b_s - sum_q A_sq x(q, k - lx[s][q]))   for all s
/// x(s, k+1) = y(s, k - ly[s][s]) + F_s^-1 (b_s - sum_q A_sq y(q, k - ly[s][q]))   for active s
/// ```
///
/// with inactive blocks copied forward. Stops on the exact residual. When
/// `record_trace` is set, the returned trace holds `x^1, x^2, ...`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_async<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    split: &DiagonalSplitting<T>,
    part: &BlockPartition,
    sched: &DelaySchedule,
    eps: f64,
    x0: &[T],
    record_trace: bool,
) -> Result<(Vec<T>, AsyncReport, Vec<Vec<T>>)> {
    check_inputs(a, b, split, part, x0)?;
    sched.validate()?;
    if sched.m() != part.m() {
        return Err(Error::Schedule(format!(
            "schedule has {} blocks but the partition has {}",
            sched.m(),
            part.m()
        )));
    }
    let start = Instant::now();
    let m = part.m();
    let owner = part.owners();
    let depth = sched.max_delay() + 1;
    let bnorm = norm2(b);
    let mut xh = History::new(depth, x0);
    let mut yh = History::new(depth, x0);
    let mut counts = vec![0usize; m];
    let mut trace = Vec::new();

    let done = |x: &[T]| -> Result<f64> {
        if bnorm == 0.0 {
            return Ok(norm2(x));
        }
        relative_residual(a, b, x)
    };
    let mut relres = done(x0)?;
    let mut k = 0;
    let mut status = AsyncStatus::NotConverged;
    if relres <= eps {
        status = AsyncStatus::Converged;
    } else {
        for step in sched.steps() {
            if step.max_lag() > k {
                return Err(Error::Schedule(format!("step {k} reads a version before 0")));
            }
            // y-stage for every block.
            for s in 0..m {
                let lag = &step.x_lag[s];
                let own = k - lag[s];
                for i in part.range(s) {
                    let r = delayed_residual(a, b, i, &xh, k, lag, &owner);
                    let yi = xh.get(own)[i] + r / split.m_diag[i];
                    yh.slot_mut(k)[i] = yi;
                }
            }
            // x-stage for active blocks, copy-forward for the others.
            for s in 0..m {
                let range = part.range(s);
                if !step.active[s] {
                    for i in range {
                        let v = xh.get(k)[i];
                        xh.slot_mut(k + 1)[i] = v;
                    }
                    continue;
                }
                counts[s] += 1;
                let lag = &step.y_lag[s];
                let own = k - lag[s];
                for i in range {
                    let r = delayed_residual(a, b, i, &yh, k, lag, &owner);
                    let xi = yh.get(own)[i] + r / split.f_diag[i];
                    xh.slot_mut(k + 1)[i] = xi;
                }
            }
            k += 1;
            let x = xh.get(k);
            if record_trace {
                trace.push(x.to_vec());
            }
            relres = done(x)?;
            if !relres.is_finite() {
                status = AsyncStatus::Diverged;
                break;
            }
            if relres <= eps {
                status = AsyncStatus::Converged;
                break;
            }
        }
    }
    let mut report = AsyncReport::from_counts(&counts);
    report.global_tests = k;
    report.final_relres = relres;
    report.converged = status == AsyncStatus::Converged;
    report.status = status;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((xh.get(k).to_vec(), report, trace))
}
