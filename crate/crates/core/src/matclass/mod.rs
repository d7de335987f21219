//! Executable convergence theory: comparison matrices, H-matrix weight
//! vectors, splitting identities and spectral radius certificates for
//! alternating and asynchronous schemes with diagonal splittings.

mod certificate;
mod hmatrix;
mod power;

pub use certificate::{
    abs_q_matrix, convergence_certificate, relaxation_operator, sum_abs_p, CertificateOptions,
    CertificateReport, EstimateFlags,
};
pub use hmatrix::{
    check_corollary_splitting, comparison_matrix, first_dominance_failure, h_matrix_certificate,
    NotCertified, PositiveWeightVector, JACOBI_DAMPING, JACOBI_TOL, SPLITTING_TOL,
};
pub use power::{perron_estimate, spectral_radius_nonneg, RadiusEstimate};
