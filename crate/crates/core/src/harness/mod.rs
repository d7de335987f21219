//! Test problem generators, experiment configuration and report output.

mod config;
mod experiment;
mod problems;

pub use config::{ExperimentConfig, InnerKind, Method, OutputConfig, ProblemSpec, ScheduleConfig, THREADS_ENV};
pub use experiment::{
    analyze, append_csv, execute, run_bench, run_experiment, write_json_report, BenchConfig, CsvRow,
    ExperimentReport,
};

pub use problems::{
    gen_convection_diffusion, gen_structural_dynamics, ConvectionDiffusionSpec, Problem, Scaling,
    StructuralDynamicsSpec,
};
