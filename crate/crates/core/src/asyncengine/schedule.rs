use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One global step of an asynchronous execution.
///
/// `x_lag[s][q]` is how many versions behind block `s` reads block `q` of the
/// x-iterate in its y-stage; `y_lag[s][q]` likewise for the y-iterate read by
/// the x-stage. The source version is `k - lag`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub active: Vec<bool>,
    pub x_lag: Vec<Vec<usize>>,
    pub y_lag: Vec<Vec<usize>>,
}

impl ScheduleStep {
    pub fn synchronous(m: usize) -> Self {
        Self {
            active: vec![true; m],
            x_lag: vec![vec![0; m]; m],
            y_lag: vec![vec![0; m]; m],
        }
    }

    pub fn max_lag(&self) -> usize {
        self.x_lag.iter().chain(&self.y_lag).flatten().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomSchedule {
    pub seed: u64,
    pub m: usize,
    pub n_steps: usize,
    pub max_delay: usize,
    pub activation_prob: f64,
}

impl RandomSchedule {
    /// Longest run of steps in which a block may be left out, plus one.
    pub fn window(&self) -> usize {
        (2.0 / self.activation_prob).ceil() as usize
    }
}

/// Update sets and read delays for every step. Seeded schedules are stored as
/// their parameters and expanded on demand; the expansion is a pure function
/// of the parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelaySchedule {
    Synchronous { m: usize, n_steps: usize },
    Random(RandomSchedule),
    Explicit { m: usize, steps: Vec<ScheduleStep> },
}

pub fn random_admissible_schedule(
    seed: u64,
    m: usize,
    n_steps: usize,
    max_delay: usize,
    activation_prob: f64,
) -> Result<DelaySchedule> {
    let s = DelaySchedule::Random(RandomSchedule {
        seed,
        m,
        n_steps,
        max_delay,
        activation_prob,
    });
    s.validate()?;
    Ok(s)
}

impl DelaySchedule {
    pub fn synchronous(m: usize, n_steps: usize) -> Self {
        Self::Synchronous { m, n_steps }
    }

    pub fn m(&self) -> usize {
        match self {
            Self::Synchronous { m, .. } | Self::Explicit { m, .. } => *m,
            Self::Random(r) => r.m,
        }
    }

    pub fn n_steps(&self) -> usize {
        match self {
            Self::Synchronous { n_steps, .. } => *n_steps,
            Self::Random(r) => r.n_steps,
            Self::Explicit { steps, .. } => steps.len(),
        }
    }

    /// Upper bound on every lag in the schedule.
    pub fn max_delay(&self) -> usize {
        match self {
            Self::Synchronous { .. } => 0,
            Self::Random(r) => r.max_delay,
            Self::Explicit { steps, .. } => steps.iter().map(ScheduleStep::max_lag).max().unwrap_or(0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        if m == 0 {
            return Err(Error::Schedule("schedule needs at least one block".into()));
        }
        match self {
            Self::Synchronous { .. } => Ok(()),
            Self::Random(r) => {
                if !(r.activation_prob > 0.0 && r.activation_prob <= 1.0) {
                    return Err(Error::Schedule(format!(
                        "activation_prob must lie in (0, 1], got {}",
                        r.activation_prob
                    )));
                }
                Ok(())
            }
            Self::Explicit { steps, .. } => {
                for (k, st) in steps.iter().enumerate() {
                    let square = |t: &Vec<Vec<usize>>| t.len() == m && t.iter().all(|r| r.len() == m);
                    if st.active.len() != m || !square(&st.x_lag) || !square(&st.y_lag) {
                        return Err(Error::Schedule(format!("step {k} does not have {m} blocks")));
                    }
                    if st.max_lag() > k {
                        return Err(Error::Schedule(format!("step {k} reads a version before 0")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Expands the schedule step by step.
    pub fn steps(&self) -> ScheduleIter<'_> {
        let state = match self {
            Self::Random(r) => Some((ChaCha8Rng::seed_from_u64(r.seed), vec![0usize; r.m])),
            _ => None,
        };
        ScheduleIter { sched: self, k: 0, state }
    }
}

pub struct ScheduleIter<'a> {
    sched: &'a DelaySchedule,
    k: usize,
    state: Option<(ChaCha8Rng, Vec<usize>)>,
}

impl Iterator for ScheduleIter<'_> {
    type Item = ScheduleStep;

    fn next(&mut self) -> Option<ScheduleStep> {
        if self.k >= self.sched.n_steps() {
            return None;
        }
        let k = self.k;
        self.k += 1;
        match self.sched {
            DelaySchedule::Synchronous { m, .. } => Some(ScheduleStep::synchronous(*m)),
            DelaySchedule::Explicit { steps, .. } => Some(steps[k].clone()),
            DelaySchedule::Random(r) => {
                let (rng, absent) = self.state.as_mut().expect("random schedule state");
                let forced_after = r.window() - 1;
                let active: Vec<bool> = absent
                    .iter_mut()
                    .map(|a| {
                        let on = rng.gen::<f64>() < r.activation_prob || *a >= forced_after;
                        *a = if on { 0 } else { *a + 1 };
                        on
                    })
                    .collect();
                let bound = r.max_delay.min(k);
                let mut lags = || -> Vec<Vec<usize>> {
                    (0..r.m).map(|_| (0..r.m).map(|_| rng.gen_range(0..=bound)).collect()).collect()
                };
                let x_lag = lags();
                let y_lag = lags();
                Some(ScheduleStep { active, x_lag, y_lag })
            }
        }
    }
}
