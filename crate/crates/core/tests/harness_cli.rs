mod common;

use std::path::Path;
use std::process::Command;

use async_hss::alternating::hss_diagonal_splitting;
use async_hss::harness::{
    execute, gen_convection_diffusion, gen_structural_dynamics, ConvectionDiffusionSpec, ExperimentConfig,
    ExperimentReport, Method, ProblemSpec, StructuralDynamicsSpec,
};
use async_hss::matclass::{check_corollary_splitting, convergence_certificate, CertificateOptions, CertificateReport};
use async_hss::sparsekit::io::{read_matrix_market, read_vector_text, AnyMatrix, AnyVector};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_async-hss"))
}

fn sd_args(nx: usize) -> Vec<String> {
    ["problem.kind=structural_dynamics".to_string(), format!("problem.nx={nx}")]
        .into_iter()
        .flat_map(|s| ["--set".to_string(), s])
        .collect()
}

// Pure diffusion: small grids with convection are not H-matrices and diverge.
fn cd_args(nx: usize) -> Vec<String> {
    let mut v = vec!["problem.kind=convection_diffusion".to_string(), "problem.c=0".to_string()];
    for ax in ["nx", "ny", "nz"] {
        v.push(format!("problem.{ax}={nx}"));
    }
    v.into_iter().flat_map(|s| ["--set".to_string(), s]).collect()
}

#[test]
fn pure_diffusion_is_a_certified_m_matrix() {
    let spec = ConvectionDiffusionSpec { c: 0.0, ..ConvectionDiffusionSpec::cube(8) };
    let a = gen_convection_diffusion(&spec).unwrap().a;
    assert!(a.triplets().all(|(i, j, v)| (i == j) == (v > 0.0)));
    let s = hss_diagonal_splitting(&a, 6.0).unwrap();
    let r = convergence_certificate(&a, &s.m_matrix(), &s.f_matrix(), &CertificateOptions::default(), None).unwrap();
    assert!(r.is_h_matrix && r.corollary_splitting_ok && r.rho_q < 1.0, "{r:?}");
}

#[test]
fn splitting_identity_real_and_complex() {
    for nx in [4, 10] {
        let a = gen_convection_diffusion(&ConvectionDiffusionSpec::cube(nx)).unwrap().a;
        for alpha in [6.0, 7.5, 12.0] {
            let s = hss_diagonal_splitting(&a, alpha).unwrap();
            assert!(check_corollary_splitting(&a, &s.m_matrix(), &s.f_matrix()).unwrap());
        }
    }
    // Complex diagonal: |alpha + i Im a_ii| exceeds |a_ii - alpha - i Im a_ii|
    // by less than |a_ii|, so the identity is expected to fail here.
    let a = gen_structural_dynamics(&StructuralDynamicsSpec::square(8)).unwrap().a;
    let alpha = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.re));
    let s = hss_diagonal_splitting(&a, alpha).unwrap();
    assert!(!check_corollary_splitting(&a, &s.m_matrix(), &s.f_matrix()).unwrap());
}

#[test]
fn simulated_runs_are_deterministic_through_the_harness() {
    let cfg = ExperimentConfig::load(
        None,
        &[
            "problem.kind=convection_diffusion",
            "problem.nx=5",
            "problem.ny=5",
            "problem.nz=5",
            "problem.seed=9",
            "problem.c=0",
            "method=async_sim",
            "alpha=3",
            "m=5",
            "schedule.max_delay=3",
            "schedule.activation_prob=0.6",
            "schedule.seed=4",
        ],
    )
    .unwrap();
    let (a, b) = (execute(&cfg).unwrap(), execute(&cfg).unwrap());
    assert!(a.converged);
    assert_eq!((a.k, a.k_min, a.k_max, a.relres), (b.k, b.k_min, b.k_max, b.relres));
}

#[test]
fn gen_writes_readable_problem_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("gen")
        .args(sd_args(5))
        .args(["--set", "method=gmres", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let p = gen_structural_dynamics(&StructuralDynamicsSpec::square(5)).unwrap();
    let open = |n: &str| std::io::BufReader::new(std::fs::File::open(dir.path().join(n)).unwrap());
    match read_matrix_market(open("A.mtx")).unwrap() {
        AnyMatrix::Complex(a) => assert_eq!(a, p.a),
        _ => panic!("expected a complex matrix"),
    }
    match read_vector_text(open("b.txt")).unwrap() {
        AnyVector::Complex(b) => assert_eq!(b, p.b),
        _ => panic!("expected a complex vector"),
    }
}

#[test]
fn analyze_emits_certificate_json() {
    let out = bin().arg("analyze").args(cd_args(3)).args(["--set", "method=hss_stationary", "--set", "alpha=6"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: CertificateReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r.corollary_splitting_ok);
}

fn read_report(dir: &Path) -> ExperimentReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn solve_exit_codes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let ok = bin()
        .arg("solve")
        .args(sd_args(8))
        .args(["--set", "method=hss_inexact", "--set", "alpha=0.5", "--set", "restart=10", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));
    assert!(read_report(dir.path()).converged);

    // Not converged within the cap: exit 1, report still written.
    let capped = bin()
        .arg("solve")
        .args(sd_args(8))
        .args(["--set", "method=hss_stationary", "--set", "alpha=4", "--set", "maxit=3", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(capped.code(), Some(1));
    let rep = read_report(dir.path());
    assert_eq!((rep.method, rep.k, rep.converged), (Method::HssStationary, Some(3), false));

    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let bad = bin().arg("solve").args(sd_args(8)).args(["--set", "method=hss_stationary"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("alpha"));
}

#[test]
fn thread_override_reaches_async_config() {
    let dir = tempfile::tempdir().unwrap();
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = bin();
        c.arg("solve").args(cd_args(4)).args(["--set", "method=async_threaded", "--set", "alpha=6", "--out"]).arg(dir.path());
        c.env_remove("ASYNC_HSS_THREADS");
        if let Some(e) = env {
            c.env("ASYNC_HSS_THREADS", e);
        }
        if let Some(f) = flag {
            c.args(["--threads", f]);
        }
        let st = c.status().unwrap();
        assert_eq!(st.code(), Some(0));
        read_report(dir.path()).config.m
    };
    assert_eq!(run(None, None), 1);
    assert_eq!(run(Some("3"), None), 3);
    assert_eq!(run(Some("3"), Some("2")), 2);
}

#[test]
fn seed_flag_changes_the_random_solution() {
    let cfg = |seed: u64| {
        let mut c = ExperimentConfig::new(ProblemSpec::ConvectionDiffusion(ConvectionDiffusionSpec::cube(3)), Method::Gmres);
        c.set_seed(seed);
        c
    };
    let x = |c: ExperimentConfig| match c.problem {
        ProblemSpec::ConvectionDiffusion(s) => gen_convection_diffusion(&s).unwrap().x_star,
        _ => unreachable!(),
    };
    assert_ne!(x(cfg(1)), x(cfg(2)));
    assert_eq!(x(cfg(7)), x(cfg(7)));
}

#[test]
fn bench_sweeps_into_one_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.toml");
    std::fs::write(
        &cfg,
        r#"
[base]
method = "hss_stationary"
alpha = 6.0
[base.problem]
kind = "convection_diffusion"
c = 0.0
nx = 3
ny = 3
nz = 3

[sweep]
alpha = [6.0, 9.0]
"problem.nx" = [3, 4]
"#,
    )
    .unwrap();
    let st = bin().arg("bench").arg(&cfg).arg("--out").arg(dir.path()).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("method,n,alpha,restart,eps_in,m,k,k_min,k_max"));
    assert!(lines[4].starts_with("hss_stationary,36,9.0,"));
}
