use std::ops::Range;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use arc_swap::ArcSwap;

use crate::alternating::DiagonalSplitting;
use crate::error::Result;
use crate::sparsekit::{norm2, relative_residual, Scalar, SparseMatrix};

use super::simulate::check_inputs;
use super::{AsyncReport, AsyncStatus, BlockPartition, ResidualReduction};

/// Extra runs allowed when the exact residual after join rejects a snapshot.
pub const MAX_RESUMES: usize = 3;

struct Shared<T> {
    /// Latest published version of each block, replaced whole on publish.
    slots: Vec<ArcSwap<Vec<T>>>,
    reduction: ResidualReduction,
    stop: AtomicBool,
    abort: AtomicBool,
    accepted_bits: AtomicU64,
}

/// Columns of block `q` referenced by the rows of block `s`, for every q != s.
fn halo<T: Scalar>(a: &SparseMatrix<T>, part: &BlockPartition, owner: &[usize], s: usize) -> Vec<(usize, Vec<usize>)> {
    let mut per_block: Vec<Vec<usize>> = vec![Vec::new(); part.m()];
    for i in part.range(s) {
        for &j in a.row(i).0 {
            if owner[j] != s {
                per_block[owner[j]].push(j);
            }
        }
    }
    per_block
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_empty())
        .map(|(q, mut v)| {
            v.sort_unstable();
            v.dedup();
            (q, v)
        })
        .collect()
}

struct Worker<'a, T> {
    s: usize,
    rows: Range<usize>,
    halo: &'a [(usize, Vec<usize>)],
    ranges: &'a [Range<usize>],
    a: &'a SparseMatrix<T>,
    b: &'a [T],
    split: &'a DiagonalSplitting<T>,
    shared: &'a Shared<T>,
}

impl<T: Scalar> Worker<'_, T> {
    /// Publish the own block, then pull the latest neighbour versions.
    fn send_recv(&self, x: &mut [T]) {
        self.shared.slots[self.s].store(Arc::new(x[self.rows.clone()].to_vec()));
        for (q, cols) in self.halo {
            let version = self.shared.slots[*q].load();
            let base = self.ranges[*q].start;
            for &j in cols {
                x[j] = version[j - base];
            }
        }
    }

    fn local_residual(&self, x: &[T], r: &mut [T]) -> f64 {
        let mut rr = 0.0;
        for (ri, i) in r.iter_mut().zip(self.rows.clone()) {
            *ri = self.b[i] - self.a.row_dot(i, x);
            rr += ri.modulus_sqr();
        }
        rr
    }

    fn half_step(&self, x: &mut [T], r: &mut [T], d: &[T]) -> f64 {
        for (ri, i) in r.iter().zip(self.rows.clone()) {
            x[i] += *ri / d[i];
        }
        self.send_recv(x);
        self.local_residual(x, r)
    }

    /// One worker's loop; returns its local iteration count.
    fn run(&self, mut x: Vec<T>, tol: f64, test_budget: u64) -> usize {
        let sh = self.shared;
        let mut r = vec![T::zero(); self.rows.len()];
        self.send_recv(&mut x);
        let rr = self.local_residual(&x, &mut r);
        // Blocking initial sum.
        let epoch = sh.reduction.contribute(self.s, rr);
        let first = loop {
            if let Some(snap) = sh.reduction.test(epoch) {
                break snap;
            }
            if sh.abort.load(Ordering::Acquire) {
                return 0;
            }
            std::thread::yield_now();
        };
        if !first.norm.is_finite() {
            sh.abort.store(true, Ordering::Release);
            return 0;
        }
        if first.norm <= tol || epoch >= test_budget {
            self.accept(first.norm, first.norm <= tol);
            return 0;
        }

        let mut iters = 0;
        let mut pending: Option<u64> = None;
        while !sh.stop.load(Ordering::Acquire) && !sh.abort.load(Ordering::Acquire) {
            self.half_step(&mut x, &mut r, &self.split.m_diag);
            let rr = self.half_step(&mut x, &mut r, &self.split.f_diag);
            iters += 1;
            if !rr.is_finite() {
                sh.abort.store(true, Ordering::Release);
                break;
            }
            let epoch = *pending.get_or_insert_with(|| sh.reduction.contribute(self.s, rr));
            if let Some(snap) = sh.reduction.test(epoch) {
                pending = None;
                if !snap.norm.is_finite() {
                    sh.abort.store(true, Ordering::Release);
                    break;
                }
                if snap.norm <= tol || snap.epoch >= test_budget {
                    self.accept(snap.norm, snap.norm <= tol);
                    break;
                }
            }
        }
        iters
    }

    fn accept(&self, norm: f64, converged: bool) {
        if converged {
            self.shared.accepted_bits.store(norm.to_bits(), Ordering::Release);
        }
        self.shared.stop.store(true, Ordering::Release);
    }
}

struct Round<T> {
    x: Vec<T>,
    counts: Vec<usize>,
    tests: u64,
    aborted: bool,
    accepted: Option<f64>,
}

fn one_round<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    split: &DiagonalSplitting<T>,
    part: &BlockPartition,
    halos: &[Vec<(usize, Vec<usize>)>],
    tol: f64,
    test_budget: u64,
    x0: &[T],
) -> Round<T> {
    let m = part.m();
    let shared = Shared {
        slots: part.ranges().iter().map(|r| ArcSwap::from_pointee(x0[r.clone()].to_vec())).collect(),
        reduction: ResidualReduction::new(m),
        stop: AtomicBool::new(false),
        abort: AtomicBool::new(false),
        accepted_bits: AtomicU64::new(f64::NAN.to_bits()),
    };
    let counts: Vec<usize> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..m)
            .map(|s| {
                let worker = Worker {
                    s,
                    rows: part.range(s),
                    halo: &halos[s],
                    ranges: part.ranges(),
                    a,
                    b,
                    split,
                    shared: &shared,
                };
                let x = x0.to_vec();
                scope.spawn(move || worker.run(x, tol, test_budget))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut x = vec![T::zero(); b.len()];
    for (range, slot) in part.ranges().iter().zip(&shared.slots) {
        x[range.clone()].copy_from_slice(&slot.load());
    }
    let accepted = f64::from_bits(shared.accepted_bits.load(Ordering::Acquire));
    Round {
        x,
        counts,
        tests: shared.reduction.completed(),
        aborted: shared.abort.load(Ordering::Acquire),
        accepted: accepted.is_finite().then_some(accepted),
    }
}

/// Multi-threaded asynchronous alternating iteration, one worker per block.
///
/// Each worker repeats: `x_s += M_s^-1 r_s`, publish, local residual,
/// `x_s += F_s^-1 r_s`, publish, local residual, then feeds `||r_s||^2` into
/// a non-blocking global sum whose completed rounds are the global tests.
/// All workers stop once a completed round reports `||r|| <= eps ||b||` or
/// `kmax_tests` rounds have completed. The joined iterate is re-checked with
/// an exact residual; a rejected snapshot resumes the workers up to
/// [`MAX_RESUMES`] times, each time with the detection threshold tightened by
/// the observed gap between snapshot and exact residual.
pub fn run_async_threaded<T: Scalar>(
    a: &SparseMatrix<T>,
    b: &[T],
    split: &DiagonalSplitting<T>,
    part: &BlockPartition,
    eps: f64,
    kmax_tests: usize,
    x0: &[T],
) -> Result<(Vec<T>, AsyncReport)> {
    check_inputs(a, b, split, part, x0)?;
    let start = Instant::now();
    let m = part.m();
    let bnorm = norm2(b);
    let mut report = AsyncReport::from_counts(&vec![0; m]);
    if bnorm == 0.0 {
        report.final_relres = 0.0;
        report.converged = true;
        report.status = AsyncStatus::Converged;
        return Ok((vec![T::zero(); b.len()], report));
    }
    let owner = part.owners();
    let halos: Vec<_> = (0..m).map(|s| halo(a, part, &owner, s)).collect();
    let tol = eps * bnorm;

    let mut x = x0.to_vec();
    let mut counts = vec![0usize; m];
    let mut tests = 0u64;
    let mut status = AsyncStatus::NotConverged;
    let mut relres = f64::NAN;
    let mut detect_tol = tol;
    for _ in 0..=MAX_RESUMES {
        let budget = (kmax_tests as u64).saturating_sub(tests);
        if budget == 0 {
            break;
        }
        let round = one_round(a, b, split, part, &halos, detect_tol, budget, &x);
        x = round.x;
        tests += round.tests;
        for (c, k) in counts.iter_mut().zip(&round.counts) {
            *c += k;
        }
        relres = relative_residual(a, b, &x)?;
        report.snapshot_relres = round.accepted.map(|v| v / bnorm);
        if round.aborted || !relres.is_finite() {
            status = AsyncStatus::Diverged;
            break;
        }
        if relres <= eps {
            status = AsyncStatus::Converged;
            break;
        }
        if round.accepted.is_none() {
            // Test budget exhausted without an accepted snapshot.
            break;
        }
        // The snapshot underestimated the residual; demand that much more
        // (plus 20%) from the next round's snapshots.
        detect_tol *= 0.8 * eps / relres;
    }
    let mut out = AsyncReport::from_counts(&counts);
    out.global_tests = tests as usize;
    out.final_relres = relres;
    out.snapshot_relres = report.snapshot_relres;
    out.converged = status == AsyncStatus::Converged;
    out.status = status;
    out.wall_time = start.elapsed().as_secs_f64();
    Ok((x, out))
}
