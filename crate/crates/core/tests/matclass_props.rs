mod common;

use async_hss::alternating::{hss_diagonal_splitting, DiagonalSplitting};
use async_hss::asyncengine::partition_uniform;
use async_hss::harness::{gen_convection_diffusion, gen_structural_dynamics, ConvectionDiffusionSpec, StructuralDynamicsSpec};
use async_hss::matclass::{
    abs_q_matrix, convergence_certificate, h_matrix_certificate, perron_estimate, relaxation_operator,
    CertificateOptions, CertificateReport,
};
use async_hss::sparsekit::{entrywise_abs, weighted_max_norm, Scalar, SparseMatrix};
use common::*;
use proptest::prelude::*;

fn certificate<T: Scalar>(a: &SparseMatrix<T>, s: &DiagonalSplitting<T>) -> CertificateReport {
    convergence_certificate(a, &s.m_matrix(), &s.f_matrix(), &CertificateOptions::default(), None).unwrap()
}

/// (|T_M|, |T_F|) of a diagonal splitting.
fn abs_parts<T: Scalar>(a: &SparseMatrix<T>, s: &DiagonalSplitting<T>) -> (SparseMatrix<f64>, SparseMatrix<f64>) {
    let tm = entrywise_abs(&relaxation_operator(a, &s.m_diag).unwrap());
    let tf = entrywise_abs(&relaxation_operator(a, &s.f_diag).unwrap());
    (tm, tf)
}

fn abs_q<T: Scalar>(a: &SparseMatrix<T>, s: &DiagonalSplitting<T>) -> SparseMatrix<f64> {
    let (tm, tf) = abs_parts(a, s);
    abs_q_matrix(&tm, &tf).unwrap()
}

#[test]
fn coarse_convection_diffusion_is_not_certified() {
    // c h / 2 = 2 at nx = 4: the stencil loses dominance and <A> is no M-matrix.
    let a = gen_convection_diffusion(&ConvectionDiffusionSpec::cube(4)).unwrap().a;
    let alpha = a.diagonal().iter().fold(0.0f64, |m, &v| m.max(v));
    let r = certificate(&a, &hss_diagonal_splitting(&a, alpha).unwrap());
    assert!(r.corollary_splitting_ok);
    assert!(!r.is_h_matrix);
    assert!(r.rho_q > 1.0, "{}", r.rho_q);
    let (tm, tf) = abs_parts(&a, &hss_diagonal_splitting(&a, alpha).unwrap());
    let dense = dense_rho_q(&tm, &tf);
    assert!((r.rho_q - dense).abs() <= 1e-6 * dense);
}

#[test]
fn finer_convection_diffusion_is_certified() {
    let a = gen_convection_diffusion(&ConvectionDiffusionSpec::cube(10)).unwrap().a;
    let r = certificate(&a, &hss_diagonal_splitting(&a, 6.0).unwrap());
    assert!(r.corollary_splitting_ok && r.is_h_matrix);
    assert!(r.rho_q < 1.0 && r.rho_alt < 1.0, "{r:?}");
}

#[test]
fn structural_dynamics_radii_agree_with_dense_oracle() {
    let a = gen_structural_dynamics(&StructuralDynamicsSpec::square(8)).unwrap().a;
    let alpha = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.modulus()));
    let s = hss_diagonal_splitting(&a, alpha).unwrap();
    let r = certificate(&a, &s);
    assert!(r.rho_q < 1.0 && r.rho_alt < 1.0, "{r:?}");
    let (tm, tf) = abs_parts(&a, &s);
    let dense = dense_rho_q(&tm, &tf);
    assert!((r.rho_q - dense).abs() <= 1e-6 * dense, "{} vs {dense}", r.rho_q);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn rho_q_below_one_bounds_rho_alt(seed in any::<u64>(), n in 1usize..=32) {
        let (a, s) = perturbed_instance(&mut rng(seed), n);
        let r = certificate(&a, &s);
        if r.rho_q < 1.0 - 1e-6 {
            prop_assert!(r.rho_alt < 1.0 - 1e-9, "rho_q {} rho_alt {}", r.rho_q, r.rho_alt);
        }
    }

    #[test]
    fn scaled_dominant_splittings_are_certified(seed in any::<u64>(), n in 1usize..=64) {
        let mut r = rng(seed);
        let a = dominant_real(&mut r, n, 0.15, false);
        let s = scaled_diagonal_splitting(&mut r, &a);
        let c = certificate(&a, &s);
        prop_assert!(c.is_h_matrix && c.corollary_splitting_ok);
        prop_assert!(c.rho_q < 1.0, "{}", c.rho_q);
    }

    #[test]
    fn perron_weights_make_q_contractive(seed in any::<u64>(), n in 1usize..=32) {
        let (a, s) = perturbed_instance(&mut rng(seed), n);
        let q = abs_q(&a, &s);
        let e = perron_estimate(&q, 1e-12, 1e-13, 1_000_000).unwrap();
        prop_assume!(e.rho < 1.0);
        prop_assert!(weighted_max_norm(&q, &e.vector).unwrap() < 1.0 + 1e-8);
    }

    #[test]
    fn sum_p_radius_below_one_when_q_is(seed in any::<u64>(), n in 2usize..=128, m in 1usize..=8) {
        let (a, s) = perturbed_instance(&mut rng(seed), n);
        let part = partition_uniform(n, m.min(n)).unwrap();
        let opts = CertificateOptions { with_sum_p: true, ..CertificateOptions::default() };
        let r = convergence_certificate(&a, &s.m_matrix(), &s.f_matrix(), &opts, Some(&part)).unwrap();
        prop_assume!(r.rho_q < 1.0);
        let p = r.rho_sum_p.unwrap();
        prop_assert!(p < 1.0 + 1e-9, "rho_sum_p {p} with rho_q {}", r.rho_q);
    }

    #[test]
    fn h_certificate_is_sound(seed in any::<u64>(), n in 1usize..=48, dominant in any::<bool>()) {
        let mut r = rng(seed);
        let a = if dominant { dominant_real(&mut r, n, 0.2, false) } else { perturbed_instance(&mut r, n).0 };
        if let Ok(u) = h_matrix_certificate(&a, 1e-10, None).unwrap() {
            let u = u.as_slice();
            let d = dense_real(&a);
            for i in 0..n {
                let off: f64 = (0..n).filter(|&j| j != i).map(|j| d[(i, j)].abs() * u[j]).sum();
                prop_assert!(d[(i, i)].abs() * u[i] > off, "row {}", i);
            }
        }
    }
}
