use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

/// A combined global residual norm and the reduction round that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSnapshot {
    pub norm: f64,
    pub epoch: u64,
}

/// `sqrt(sum_s c_s)` over the latest per-block squared residual norms, or
/// `None` while some block has not contributed yet.
pub fn reduce_residual_snapshot(contributions: &[Option<f64>], epoch: u64) -> Option<ResidualSnapshot> {
    let mut sum = 0.0;
    for c in contributions {
        sum += (*c)?;
    }
    Some(ResidualSnapshot { norm: sum.sqrt(), epoch })
}

/// Non-blocking sum of per-worker squared residuals, one round at a time.
///
/// Each worker contributes once per round and then polls [`Self::test`]. The
/// last contributor of a round combines the values, resets the arrival
/// counter and only then publishes the result, so a contribution to the next
/// round can never be counted into the current one.
pub struct ResidualReduction {
    contrib: Vec<AtomicU64>,
    arrived: AtomicUsize,
    norm_bits: AtomicU64,
    completed: AtomicU64,
}

impl ResidualReduction {
    pub fn new(workers: usize) -> Self {
        Self {
            contrib: (0..workers).map(|_| AtomicU64::new(0)).collect(),
            arrived: AtomicUsize::new(0),
            norm_bits: AtomicU64::new(f64::NAN.to_bits()),
            completed: AtomicU64::new(0),
        }
    }

    /// Number of finished rounds.
    pub fn completed(&self) -> u64 {
        self.completed.load(Ordering::Acquire)
    }

    /// Adds worker `s`'s value to the open round and returns that round's
    /// epoch. Must not be called again by `s` before the round completes.
    pub fn contribute(&self, s: usize, rr: f64) -> u64 {
        let epoch = self.completed.load(Ordering::Acquire) + 1;
        self.contrib[s].store(rr.to_bits(), Ordering::Release);
        let before = self.arrived.fetch_add(1, Ordering::AcqRel);
        if before + 1 == self.contrib.len() {
            let latest: Vec<Option<f64>> = self
                .contrib
                .iter()
                .map(|c| Some(f64::from_bits(c.load(Ordering::Acquire))))
                .collect();
            let snap = reduce_residual_snapshot(&latest, epoch).expect("all workers contributed");
            self.arrived.store(0, Ordering::Release);
            self.norm_bits.store(snap.norm.to_bits(), Ordering::Release);
            self.completed.store(epoch, Ordering::Release);
        }
        epoch
    }

    /// The result of round `epoch` once it has completed.
    pub fn test(&self, epoch: u64) -> Option<ResidualSnapshot> {
        if self.completed.load(Ordering::Acquire) >= epoch {
            Some(ResidualSnapshot {
                norm: f64::from_bits(self.norm_bits.load(Ordering::Acquire)),
                epoch,
            })
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_reduction_examples() {
        assert_eq!(reduce_residual_snapshot(&[Some(0.0), Some(0.0)], 1).unwrap().norm, 0.0);
        assert_eq!(reduce_residual_snapshot(&[Some(9.0), Some(16.0)], 4).unwrap(), ResidualSnapshot {
            norm: 5.0,
            epoch: 4
        });
        assert!(reduce_residual_snapshot(&[Some(1.0), None], 1).is_none());
    }

    #[test]
    fn two_worker_interleaving_uses_latest_values() {
        let red = ResidualReduction::new(2);
        let e0 = red.contribute(0, 9.0);
        assert_eq!(e0, 1);
        assert!(red.test(e0).is_none());
        let e1 = red.contribute(1, 16.0);
        assert_eq!(e1, 1);
        assert_eq!(red.test(1).unwrap().norm, 5.0);
        // Round two: worker 1 arrives first with a fresh value.
        assert_eq!(red.contribute(1, 0.0), 2);
        assert!(red.test(2).is_none());
        assert_eq!(red.contribute(0, 4.0), 2);
        assert_eq!(red.test(2).unwrap(), ResidualSnapshot { norm: 2.0, epoch: 2 });
        assert_eq!(red.completed(), 2);
    }
}
