//! Sparse linear algebra over a real or complex scalar field: CSR storage,
//! products, norms, the Hermitian/skew-Hermitian decomposition and
//! entrywise-absolute-value transforms.

mod csr;
pub mod io;
mod ops;
mod scalar;

pub use csr::SparseMatrix;
pub use ops::{
    axpy, dot, entrywise_abs, hermitian_split, max_abs_diff, norm2, relative_residual, residual,
    residual_into, spmv, spmv_into, tau_rowsum, weighted_max_norm,
};
pub use scalar::{Field, Scalar};

/// Dense vectors are plain `Vec`s; the alias documents intent at API boundaries.
pub type DenseVector<T> = Vec<T>;
