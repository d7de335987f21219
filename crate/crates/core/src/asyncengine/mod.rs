//! Asynchronous alternating runtime: block partitions, seeded delay
//! schedules, a deterministic simulator of delayed two-stage updates, and a
//! multi-threaded implementation with non-blocking residual detection.

mod partition;
mod reduction;
mod schedule;
mod simulate;
mod threaded;

pub use partition::{partition_uniform, BlockPartition};
pub use reduction::{reduce_residual_snapshot, ResidualReduction, ResidualSnapshot};
pub use schedule::{random_admissible_schedule, DelaySchedule, RandomSchedule, ScheduleIter, ScheduleStep};
pub use simulate::{simulate_async, AsyncReport, AsyncStatus};
pub use threaded::{run_async_threaded, MAX_RESUMES};
