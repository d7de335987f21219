use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use async_hss::harness::{
    analyze, append_csv, execute, gen_convection_diffusion, gen_structural_dynamics, run_bench, write_json_report,
    BenchConfig, CsvRow, ExperimentConfig, Method, Problem, ProblemSpec, THREADS_ENV,
};
use async_hss::sparsekit::io::{write_matrix_market, write_vector_binary, write_vector_text};
use async_hss::sparsekit::Scalar;
use async_hss::{Error, Result};

/// Synchronous and asynchronous alternating iterations for sparse
/// non-Hermitian systems.
#[derive(Parser)]
#[command(name = "async-hss", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write A (.mtx), b and x* for the configured problem.
    Gen {
        #[command(flatten)]
        common: Common,
        /// Little-endian binary vectors instead of text.
        #[arg(long)]
        binary: bool,
    },
    /// Emit the convergence certificate of the diagonal splitting as JSON.
    Analyze(Common),
    /// Run one configured method; exit 0 iff it converged.
    Solve(Common),
    /// Run a base config over a sweep of values; emit one CSV row per run.
    Bench(Common),
}

#[derive(Args)]
struct Common {
    /// JSON or TOML config (bench: `base` and `sweep` tables).
    config: Option<PathBuf>,
    /// Override any config field, e.g. `--set problem.nx=64 --set alpha=0.12`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Seed of the random exact solution and of the delay schedule.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads of `async_threaded` (beats the environment variable).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; created when missing.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn threads_override(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

impl Common {
    fn finish(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        if let Some(seed) = self.seed {
            cfg.set_seed(seed);
        }
        if cfg.method == Method::AsyncThreaded {
            if let Some(t) = threads_override(self.threads)? {
                cfg.m = t;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        self.finish(ExperimentConfig::load(self.config.as_deref(), &self.set)?)
    }

    fn out_dir(&self) -> Result<Option<&Path>> {
        if let Some(d) = &self.out {
            std::fs::create_dir_all(d)?;
        }
        Ok(self.out.as_deref())
    }
}

fn write_problem<T: Scalar>(p: &Problem<T>, dir: &Path, binary: bool) -> Result<()> {
    write_matrix_market(&p.a, BufWriter::new(File::create(dir.join("A.mtx"))?))?;
    for (name, v) in [("b", &p.b), ("x_star", &p.x_star)] {
        if binary {
            write_vector_binary(v, BufWriter::new(File::create(dir.join(format!("{name}.bin")))?))?;
        } else {
            write_vector_text(v, BufWriter::new(File::create(dir.join(format!("{name}.txt")))?))?;
        }
    }
    Ok(())
}

fn write_json_to<S: serde::Serialize>(v: &S, path: Option<PathBuf>) -> Result<()> {
    match path {
        Some(p) => serde_json::to_writer_pretty(BufWriter::new(File::create(p)?), v)?,
        None => {
            let mut out = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, v)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn print_csv(rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Gen { common, binary } => {
            let cfg = common.experiment()?;
            let dir = common.out_dir()?.unwrap_or(Path::new("."));
            match &cfg.problem {
                ProblemSpec::ConvectionDiffusion(s) => write_problem(&gen_convection_diffusion(s)?, dir, binary)?,
                ProblemSpec::StructuralDynamics(s) => write_problem(&gen_structural_dynamics(s)?, dir, binary)?,
            }
            Ok(true)
        }
        Cmd::Analyze(common) => {
            let cfg = common.experiment()?;
            let cert = analyze(&cfg)?;
            write_json_to(&cert, common.out_dir()?.map(|d| d.join("certificate.json")))?;
            Ok(true)
        }
        Cmd::Solve(common) => {
            let mut cfg = common.experiment()?;
            if let Some(d) = common.out_dir()? {
                cfg.output.json = Some(d.join("report.json"));
                cfg.output.csv = Some(d.join("results.csv"));
            }
            // The report is written even when the method diverged.
            let rep = execute(&cfg)?;
            match &cfg.output.json {
                Some(p) => write_json_report(&rep, p)?,
                None => write_json_to(&rep, None)?,
            }
            if let Some(p) = &cfg.output.csv {
                append_csv(&[rep.csv_row()], p)?;
            }
            eprintln!(
                "{} n={} k={:?} k_min={:?} k_max={:?} relres={:.3e} status={}",
                rep.method.name(),
                rep.n,
                rep.k,
                rep.k_min,
                rep.k_max,
                rep.relres,
                rep.status
            );
            Ok(rep.converged)
        }
        Cmd::Bench(common) => {
            let path = common
                .config
                .as_deref()
                .ok_or_else(|| Error::Config("bench needs a config file with `base` and `sweep`".into()))?;
            let mut bench = BenchConfig::from_file(path)?;
            bench.base = bench.base.with_overrides(&common.set)?;
            let cfgs = bench
                .expand()?
                .into_iter()
                .map(|c| common.finish(c))
                .collect::<Result<Vec<_>>>()?;
            let csv_path = common.out_dir()?.map(|d| d.join("results.csv"));
            let reports = run_bench(&cfgs, csv_path.as_deref())?;
            if csv_path.is_none() {
                print_csv(&reports.iter().map(|r| r.csv_row()).collect::<Vec<_>>())?;
            }
            Ok(reports.iter().all(|r| r.converged))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
