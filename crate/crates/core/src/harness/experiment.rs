use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::alternating::{hss_diagonal_splitting, hss_inexact, hss_stationary, InnerSolver};
use crate::asyncengine::{partition_uniform, random_admissible_schedule, run_async_threaded, simulate_async, DelaySchedule};
use crate::error::{Error, Result};
use crate::krylov::{gmres, KrylovConfig};
use crate::matclass::{convergence_certificate, CertificateOptions, CertificateReport};
use crate::sparsekit::{Scalar, SparseMatrix};

use super::config::{read_value, ExperimentConfig, InnerKind, Method, ProblemSpec};
use super::{gen_convection_diffusion, gen_structural_dynamics, Problem};

/// Everything one run produces; serialized as the JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub method: Method,
    pub n: usize,
    pub config: ExperimentConfig,
    /// Outer iterations (synchronous methods) or global steps (`async_sim`).
    pub k: Option<usize>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub inner_iterations: Option<usize>,
    pub global_tests: Option<usize>,
    /// Exact relative residual of the returned iterate.
    pub relres: f64,
    pub converged: bool,
    /// Solver stop reason or async status, snake case.
    pub status: String,
    /// Solve time only, problem generation excluded.
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateReport>,
}

/// One row of the results CSV; column order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub method: String,
    pub n: usize,
    pub alpha: Option<f64>,
    pub restart: Option<usize>,
    pub eps_in: Option<f64>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub k_min: Option<usize>,
    pub k_max: Option<usize>,
    pub relres: f64,
    pub wall_seconds: f64,
    pub converged: bool,
}

impl ExperimentReport {
    pub fn csv_row(&self) -> CsvRow {
        let c = &self.config;
        let is_async = matches!(c.method, Method::AsyncSim | Method::AsyncThreaded);
        CsvRow {
            method: c.method.name().to_string(),
            n: self.n,
            alpha: c.alpha.filter(|_| c.method != Method::Gmres),
            restart: c.restart.filter(|_| matches!(c.method, Method::Gmres | Method::HssInexact)),
            eps_in: (c.method == Method::HssInexact).then_some(c.eps_in),
            m: is_async.then_some(c.m),
            k: self.k,
            k_min: self.k_min,
            k_max: self.k_max,
            relres: self.relres,
            wall_seconds: self.wall_seconds,
            converged: self.converged,
        }
    }
}

/// Generates the problem and runs the configured method. Writes nothing.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    match &cfg.problem {
        ProblemSpec::ConvectionDiffusion(s) => run_on(cfg, gen_convection_diffusion(s)?),
        ProblemSpec::StructuralDynamics(s) => run_on(cfg, gen_structural_dynamics(s)?),
    }
}

/// [`execute`] followed by writing the JSON report and appending the CSV row
/// to the configured output paths.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let rep = execute(cfg)?;
    if let Some(path) = &cfg.output.json {
        write_json_report(&rep, path)?;
    }
    if let Some(path) = &cfg.output.csv {
        append_csv(&[rep.csv_row()], path)?;
    }
    Ok(rep)
}

pub fn write_json_report(rep: &ExperimentReport, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(f), rep)?;
    Ok(())
}

/// Appends rows, writing the header only when the file is new or empty.
pub fn append_csv(rows: &[CsvRow], path: &Path) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let f = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(f);
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

fn inner(kind: InnerKind, cfg: &ExperimentConfig) -> InnerSolver {
    let kc = KrylovConfig::new(cfg.eps_in, cfg.inner_maxit);
    match kind {
        InnerKind::Cg => InnerSolver::Cg(kc),
        InnerKind::Gmres => InnerSolver::Gmres(KrylovConfig { restart: cfg.restart, ..kc }),
    }
}

fn blank(cfg: &ExperimentConfig, n: usize) -> ExperimentReport {
    ExperimentReport {
        method: cfg.method,
        n,
        config: cfg.clone(),
        k: None,
        k_min: None,
        k_max: None,
        inner_iterations: None,
        global_tests: None,
        relres: f64::NAN,
        converged: false,
        status: String::new(),
        wall_seconds: 0.0,
        certificate: None,
    }
}

fn snake<S: Serialize>(v: &S) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

fn run_on<T: Scalar>(cfg: &ExperimentConfig, p: Problem<T>) -> Result<ExperimentReport> {
    let Problem { a, b, .. } = p;
    let n = b.len();
    let x0 = vec![T::zero(); n];
    let mut rep = blank(cfg, n);
    let alpha = cfg.alpha.unwrap_or(0.0);
    let start = Instant::now();
    match cfg.method {
        Method::Gmres => {
            let kc = KrylovConfig { restart: cfg.restart, ..KrylovConfig::new(cfg.eps, cfg.maxit) };
            let (_, r) = gmres(&a, &b, &x0, &kc)?;
            rep.k = Some(r.iterations);
            rep.relres = r.final_relres;
            rep.converged = r.converged;
            rep.status = snake(&r.stop);
        }
        Method::HssInexact => {
            let (ih, is) = (inner(cfg.inner_h, cfg), inner(cfg.inner_s, cfg));
            let (_, r) = hss_inexact(&a, &b, alpha, &ih, &is, cfg.eps, cfg.maxit, &x0)?;
            rep.k = Some(r.outer.iterations);
            rep.inner_iterations = Some(r.inner_iterations);
            rep.relres = r.outer.final_relres;
            rep.converged = r.outer.converged;
            rep.status = snake(&r.outer.stop);
        }
        Method::HssStationary => {
            let split = hss_diagonal_splitting(&a, alpha)?;
            let (_, r) = hss_stationary(&a, &b, &split, cfg.eps, cfg.maxit, &x0)?;
            rep.k = Some(r.iterations);
            rep.relres = r.final_relres;
            rep.converged = r.converged;
            rep.status = snake(&r.stop);
        }
        Method::AsyncSim | Method::AsyncThreaded => {
            let split = hss_diagonal_splitting(&a, alpha)?;
            let part = partition_uniform(n, cfg.m)?;
            let r = if cfg.method == Method::AsyncSim {
                let sched = match &cfg.schedule {
                    None => DelaySchedule::synchronous(cfg.m, cfg.maxit),
                    Some(s) => random_admissible_schedule(s.seed, cfg.m, cfg.maxit, s.max_delay, s.activation_prob)?,
                };
                let (_, r, _) = simulate_async(&a, &b, &split, &part, &sched, cfg.eps, &x0, false)?;
                rep.k = Some(r.global_tests);
                r
            } else {
                run_async_threaded(&a, &b, &split, &part, cfg.eps, cfg.kmax_tests, &x0)?.1
            };
            rep.k_min = Some(r.k_min);
            rep.k_max = Some(r.k_max);
            rep.global_tests = Some(r.global_tests);
            rep.relres = r.final_relres;
            rep.converged = r.converged;
            rep.status = snake(&r.status);
        }
    }
    rep.wall_seconds = start.elapsed().as_secs_f64();
    if cfg.certificate {
        rep.certificate = Some(certify(&a, alpha, cfg)?);
    }
    Ok(rep)
}

fn certify<T: Scalar>(a: &SparseMatrix<T>, alpha: f64, cfg: &ExperimentConfig) -> Result<CertificateReport> {
    if cfg.alpha.is_none() {
        return Err(Error::Config("certificate requires alpha".into()));
    }
    let split = hss_diagonal_splitting(a, alpha)?;
    convergence_certificate(a, &split.m_matrix(), &split.f_matrix(), &CertificateOptions::default(), None)
}

/// Certificate of the diagonal alternating splitting of a configured problem.
pub fn analyze(cfg: &ExperimentConfig) -> Result<CertificateReport> {
    let alpha = cfg.alpha.ok_or_else(|| Error::Config("analyze requires alpha".into()))?;
    match &cfg.problem {
        ProblemSpec::ConvectionDiffusion(s) => certify(&gen_convection_diffusion(s)?.a, alpha, cfg),
        ProblemSpec::StructuralDynamics(s) => certify(&gen_structural_dynamics(s)?.a, alpha, cfg),
    }
}

/// A base configuration and, per dotted key, the values to sweep over.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub base: ExperimentConfig,
    #[serde(default)]
    pub sweep: BTreeMap<String, Vec<Value>>,
}

impl BenchConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        serde_json::from_value(read_value(path)?).map_err(|e| Error::Config(e.to_string()))
    }

    /// Cartesian product of the sweep values, keys in sorted order with the
    /// last key varying fastest.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        let mut out = vec![self.base.clone()];
        for (key, values) in &self.sweep {
            if values.is_empty() {
                return Err(Error::Config(format!("sweep '{key}' has no values")));
            }
            let mut next = Vec::with_capacity(out.len() * values.len());
            for cfg in &out {
                for v in values {
                    next.push(cfg.with_override_value(key, v.clone())?);
                }
            }
            out = next;
        }
        Ok(out)
    }
}

/// Runs every configuration, appending one CSV row each to `csv_path`.
/// Per-run JSON outputs configured in the base are ignored.
pub fn run_bench(configs: &[ExperimentConfig], csv_path: Option<&Path>) -> Result<Vec<ExperimentReport>> {
    let mut reports = Vec::with_capacity(configs.len());
    for cfg in configs {
        let rep = execute(cfg)?;
        if let Some(p) = csv_path {
            append_csv(&[rep.csv_row()], p)?;
        }
        reports.push(rep);
    }
    Ok(reports)
}
