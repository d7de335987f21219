mod common;

use async_hss::alternating::{hss_diagonal_splitting, DiagonalSplitting};
use async_hss::asyncengine::{
    partition_uniform, random_admissible_schedule, run_async_threaded, simulate_async, AsyncStatus, DelaySchedule,
};
use async_hss::harness::{gen_convection_diffusion, ConvectionDiffusionSpec};
use async_hss::matclass::{abs_q_matrix, perron_estimate, relaxation_operator};
use async_hss::sparsekit::{entrywise_abs, spmv, weighted_max_norm, SparseMatrix};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

/// Perron weights of |Q| split as (w_y, w_x), with the contraction factor
/// ‖|Q|‖_w they achieve.
fn q_weights(a: &SparseMatrix<f64>, s: &DiagonalSplitting<f64>) -> (Vec<f64>, Vec<f64>, f64) {
    let tm = entrywise_abs(&relaxation_operator(a, &s.m_diag).unwrap());
    let tf = entrywise_abs(&relaxation_operator(a, &s.f_diag).unwrap());
    let q = abs_q_matrix(&tm, &tf).unwrap();
    let w = perron_estimate(&q, 1e-12, 1e-13, 1_000_000).unwrap().vector;
    let c = weighted_max_norm(&q, &w).unwrap();
    let n = a.nrows();
    (w[..n].to_vec(), w[n..].to_vec(), c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // y-errors are bounded by c times x-errors read at most D steps back, and
    // updated x-errors by c times y-errors read at most D steps back; c <= 1
    // makes the maximum over the last 2D + 1 steps nonincreasing.
    #[test]
    fn weighted_error_window_never_grows(
        seed in any::<u64>(),
        n in 2usize..=48,
        m in 1usize..=6,
        d in 0usize..=6,
        p in 0.2f64..=1.0,
    ) {
        let mut r = rng(seed);
        let (a, s) = perturbed_instance(&mut r, n);
        let (_, wx, c) = q_weights(&a, &s);
        prop_assume!(c <= 1.0);
        let m = m.min(n);
        let xs: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let b = spmv(&a, &xs).unwrap();
        let part = partition_uniform(n, m).unwrap();
        let sched = random_admissible_schedule(seed, m, 300, d, p).unwrap();
        let x0 = vec![0.0; n];
        let (_, _, trace) = simulate_async(&a, &b, &s, &part, &sched, 0.0, &x0, true).unwrap();

        let floor = 1e-13 * xs.iter().fold(1.0f64, |m, v| m.max(v.abs())) / wx.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let errs: Vec<f64> = std::iter::once(&x0).chain(&trace).map(|x| weighted_vec_norm(&sub(x, &xs), &wx)).collect();
        let window = |k: usize| errs[k.saturating_sub(2 * d)..=k].iter().fold(0.0f64, |m, &e| m.max(e));
        for k in 0..errs.len() - 1 {
            prop_assert!(window(k + 1) <= window(k) * (1.0 + 1e-9) + floor, "step {}: {} > {}", k + 1, window(k + 1), window(k));
        }
    }

    #[test]
    fn exact_solution_is_fixed_under_any_schedule(seed in any::<u64>(), n in 1usize..=40, d in 0usize..=8) {
        let mut r = rng(seed);
        let a = random_complex(&mut r, n, 0.3).add_diagonal(&vec![Complex64::new(3.0, 1.0); n]).unwrap();
        let xs: Vec<Complex64> = (0..n).map(|_| Complex64::new(r.gen(), r.gen())).collect();
        let b = spmv(&a, &xs).unwrap();
        let s = hss_diagonal_splitting(&a, r.gen_range(0.5..4.0)).unwrap();
        let m = r.gen_range(1..=n);
        let part = partition_uniform(n, m).unwrap();
        let sched = random_admissible_schedule(seed, m, 50, d, r.gen_range(0.2..=1.0)).unwrap();
        // eps < 0 forbids stopping, so every scheduled step is replayed.
        let (x, rep, trace) = simulate_async(&a, &b, &s, &part, &sched, -1.0, &xs, true).unwrap();
        prop_assert_eq!(trace.len(), 50);
        prop_assert!(trace.iter().all(|t| *t == xs));
        prop_assert_eq!(x, xs);
        prop_assert_eq!(rep.status, AsyncStatus::NotConverged);
    }

    #[test]
    fn simulation_is_bit_reproducible(seed in any::<u64>(), n in 2usize..=40, d in 0usize..=8) {
        let mut r = rng(seed);
        let (a, s) = perturbed_instance(&mut r, n);
        let b: Vec<f64> = (0..n).map(|_| r.gen()).collect();
        let m = r.gen_range(1..=n.min(6));
        let part = partition_uniform(n, m).unwrap();
        let sched = random_admissible_schedule(seed, m, 200, d, 0.5).unwrap();
        let run = || simulate_async(&a, &b, &s, &part, &sched, 1e-8, &vec![0.0; n], true).unwrap();
        let (x1, mut r1, t1) = run();
        let (x2, mut r2, t2) = run();
        r1.wall_time = 0.0;
        r2.wall_time = 0.0;
        prop_assert_eq!(x1, x2);
        prop_assert_eq!(t1, t2);
        prop_assert_eq!(r1, r2);
    }

    #[test]
    fn certified_instances_converge_under_random_schedules(seed in any::<u64>(), n in 4usize..=64, d in prop::sample::select(vec![1usize, 5, 20])) {
        let mut r = rng(seed);
        let a = dominant_real(&mut r, n, 0.2, false);
        let s = scaled_diagonal_splitting(&mut r, &a);
        let m = r.gen_range(2..=4.min(n));
        let part = partition_uniform(n, m).unwrap();
        let sched = random_admissible_schedule(seed, m, 200_000, d, r.gen_range(0.3..=1.0)).unwrap();
        let b: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let (_, rep, _) = simulate_async(&a, &b, &s, &part, &sched, 1e-6, &vec![0.0; n], false).unwrap();
        prop_assert!(rep.converged && rep.final_relres <= 1e-6, "{:?}", rep);
    }
}

#[test]
fn synchronous_schedule_count_equals_block_iterations() {
    let a = tridiag(30, -1.0, 4.0, -1.5);
    let s = hss_diagonal_splitting(&a, 4.0).unwrap();
    let part = partition_uniform(30, 5).unwrap();
    let (_, rep, _) =
        simulate_async(&a, &[1.0; 30], &s, &part, &DelaySchedule::synchronous(5, 10_000), 1e-10, &[0.0; 30], false)
            .unwrap();
    assert!(rep.converged);
    assert_eq!((rep.k_min, rep.k_max), (rep.global_tests, rep.global_tests));
}

#[test]
fn threaded_exact_residual_close_to_accepted_snapshot() {
    // Certified: rho(|Q|) ~ 0.53 for this grid and shift.
    let p = gen_convection_diffusion(&ConvectionDiffusionSpec::cube(10)).unwrap();
    let s = hss_diagonal_splitting(&p.a, 6.0).unwrap();
    let part = partition_uniform(p.b.len(), 4).unwrap();
    for _ in 0..5 {
        let (_, rep) = run_async_threaded(&p.a, &p.b, &s, &part, 1e-6, 1_000_000, &vec![0.0; p.b.len()]).unwrap();
        assert!(rep.converged, "{rep:?}");
        let snap = rep.snapshot_relres.expect("accepted snapshot");
        assert!(rep.final_relres <= 1.1 * snap, "exact {} vs snapshot {snap}", rep.final_relres);
    }
}
