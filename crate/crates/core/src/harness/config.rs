use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

use super::{ConvectionDiffusionSpec, StructuralDynamicsSpec};

/// Environment variable that overrides the block/worker count of async runs.
pub const THREADS_ENV: &str = "ASYNC_HSS_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    ConvectionDiffusion(ConvectionDiffusionSpec),
    StructuralDynamics(StructuralDynamicsSpec),
}

impl ProblemSpec {
    pub fn n(&self) -> usize {
        match self {
            Self::ConvectionDiffusion(s) => s.n(),
            Self::StructuralDynamics(s) => s.n(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Gmres,
    HssInexact,
    HssStationary,
    AsyncThreaded,
    AsyncSim,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gmres => "gmres",
            Self::HssInexact => "hss_inexact",
            Self::HssStationary => "hss_stationary",
            Self::AsyncThreaded => "async_threaded",
            Self::AsyncSim => "async_sim",
        }
    }

    fn needs_alpha(self) -> bool {
        !matches!(self, Self::Gmres)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerKind {
    #[default]
    Cg,
    Gmres,
}

/// Parameters of a seeded random schedule for `async_sim`; absent means the
/// synchronous schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default)]
    pub seed: u64,
    pub max_delay: usize,
    #[serde(default = "one")]
    pub activation_prob: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// JSON report path (overwritten).
    #[serde(default)]
    pub json: Option<PathBuf>,
    /// CSV results path (appended, header written once).
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub method: Method,
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Outer relative residual threshold.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// GMRES restart length (baseline and inner GMRES); absent means full.
    #[serde(default)]
    pub restart: Option<usize>,
    /// Inner relative residual threshold of `hss_inexact`.
    #[serde(default = "default_eps_in")]
    pub eps_in: f64,
    #[serde(default)]
    pub inner_h: InnerKind,
    #[serde(default = "default_inner_s")]
    pub inner_s: InnerKind,
    /// Iteration cap (outer steps, GMRES steps, or simulator steps).
    #[serde(default = "default_maxit")]
    pub maxit: usize,
    /// Inner iteration cap of `hss_inexact`.
    #[serde(default = "default_inner_maxit")]
    pub inner_maxit: usize,
    /// Blocks (and worker threads for `async_threaded`).
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default)]
    pub schedule: Option<ScheduleConfig>,
    /// Global test budget of `async_threaded`.
    #[serde(default = "default_kmax_tests")]
    pub kmax_tests: usize,
    /// Attach a convergence certificate summary to the report.
    #[serde(default)]
    pub certificate: bool,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_eps() -> f64 {
    1e-6
}
fn default_eps_in() -> f64 {
    1e-10
}
fn default_inner_s() -> InnerKind {
    InnerKind::Gmres
}
fn default_maxit() -> usize {
    1_000_000
}
fn default_inner_maxit() -> usize {
    100_000
}
fn default_m() -> usize {
    1
}
fn default_kmax_tests() -> usize {
    10_000_000
}

impl ExperimentConfig {
    pub fn new(problem: ProblemSpec, method: Method) -> Self {
        Self {
            problem,
            method,
            alpha: None,
            eps: default_eps(),
            restart: None,
            eps_in: default_eps_in(),
            inner_h: InnerKind::Cg,
            inner_s: default_inner_s(),
            maxit: default_maxit(),
            inner_maxit: default_inner_maxit(),
            m: default_m(),
            schedule: None,
            kmax_tests: default_kmax_tests(),
            certificate: false,
            output: OutputConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        match &self.problem {
            ProblemSpec::ConvectionDiffusion(s) => s.validate()?,
            ProblemSpec::StructuralDynamics(s) => s.validate()?,
        }
        if self.method.needs_alpha() {
            match self.alpha {
                Some(a) if a > 0.0 && a.is_finite() => {}
                Some(a) => return bad(format!("alpha must be positive, got {a}")),
                None => return bad(format!("method {} requires alpha", self.method.name())),
            }
        }
        if !(self.eps > 0.0) || !(self.eps_in > 0.0) {
            return bad("eps and eps_in must be positive".into());
        }
        if self.restart == Some(0) || self.maxit == 0 || self.inner_maxit == 0 || self.kmax_tests == 0 {
            return bad("restart, maxit, inner_maxit and kmax_tests must be at least 1".into());
        }
        if self.m == 0 || self.m > self.problem.n() {
            return bad(format!("m = {} must lie in [1, n = {}]", self.m, self.problem.n()));
        }
        if self.certificate && self.alpha.is_none() {
            return bad("certificate requires alpha".into());
        }
        if let Some(s) = &self.schedule {
            if !(s.activation_prob > 0.0 && s.activation_prob <= 1.0) {
                return bad(format!("activation_prob must lie in (0, 1], got {}", s.activation_prob));
            }
        }
        Ok(())
    }

    /// Reads JSON (`.json`) or TOML (anything else).
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::load(Some(path), &[] as &[&str])
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Optional config file followed by `key.path=value` overrides, so a run
    /// can be specified entirely on the command line.
    pub fn load<S: AsRef<str>>(path: Option<&Path>, overrides: &[S]) -> Result<Self> {
        let mut v = match path {
            Some(p) => read_value(p)?,
            None => Value::Object(Default::default()),
        };
        apply_overrides(&mut v, overrides)?;
        serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies `key.path=value` overrides; values are parsed as JSON when
    /// possible and taken as strings otherwise.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut v = serde_json::to_value(self)?;
        apply_overrides(&mut v, overrides)?;
        serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))
    }

    /// Sets one dotted key to an already parsed value.
    pub fn with_override_value(&self, key: &str, value: Value) -> Result<Self> {
        let mut v = serde_json::to_value(self)?;
        set_path(&mut v, key, value)?;
        serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))
    }

    /// Seed override: the problem's random solution and the schedule.
    pub fn set_seed(&mut self, seed: u64) {
        if let ProblemSpec::ConvectionDiffusion(s) = &mut self.problem {
            s.seed = seed;
        }
        if let Some(s) = &mut self.schedule {
            s.seed = seed;
        }
    }
}

/// A JSON (`.json`) or TOML file as a JSON value tree.
pub(crate) fn read_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    } else {
        let t: toml::Value = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(serde_json::to_value(t)?)
    }
}

fn apply_overrides<S: AsRef<str>>(v: &mut Value, overrides: &[S]) -> Result<()> {
    for o in overrides {
        let o = o.as_ref();
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{o}' is not key=value")))?;
        let raw = raw.trim();
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        set_path(v, key.trim(), value)?;
    }
    Ok(())
}

fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, p) in parts.iter().enumerate() {
        if p.is_empty() {
            return Err(Error::Config(format!("empty component in key '{path}'")));
        }
        if !cur.is_object() {
            *cur = Value::Object(Default::default());
        }
        let obj = cur.as_object_mut().expect("object");
        if i + 1 == parts.len() {
            obj.insert((*p).to_string(), value);
            return Ok(());
        }
        cur = obj.entry((*p).to_string()).or_insert(Value::Null);
    }
    Ok(())
}
