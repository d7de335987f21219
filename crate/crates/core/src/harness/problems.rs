use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparsekit::{spmv, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// Whole system multiplied by h^2 (stencil entries O(1)).
    #[default]
    H2Scaled,
    /// Difference quotients with their 1/h^2 and 1/h factors.
    Unscaled,
}

/// A generated test system with its known solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem<T> {
    pub a: SparseMatrix<T>,
    pub b: Vec<T>,
    pub x_star: Vec<T>,
}

/// `-Laplace(u) + c grad(u)` on the unit cube, 7-point centred differences,
/// Dirichlet boundary eliminated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvectionDiffusionSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub scaling: Scaling,
    #[serde(default)]
    pub seed: u64,
}

fn default_c() -> f64 {
    20.0
}

impl ConvectionDiffusionSpec {
    pub fn cube(nx: usize) -> Self {
        Self {
            nx,
            ny: nx,
            nz: nx,
            c: default_c(),
            scaling: Scaling::H2Scaled,
            seed: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || self.nz == 0 {
            return Err(Error::Config("grid counts must be at least 1".into()));
        }
        if !self.c.is_finite() {
            return Err(Error::Config("convection coefficient must be finite".into()));
        }
        Ok(())
    }
}

/// Index of interior grid point (i, j, k), x fastest.
fn lex(i: usize, j: usize, k: usize, nx: usize, ny: usize) -> usize {
    i + nx * (j + ny * k)
}

pub fn gen_convection_diffusion(spec: &ConvectionDiffusionSpec) -> Result<Problem<f64>> {
    spec.validate()?;
    let dims = [spec.nx, spec.ny, spec.nz];
    let href = 1.0 / (spec.nx + 1) as f64;
    // Per-axis (diagonal, lower neighbour, upper neighbour) contributions.
    let coeffs: Vec<(f64, f64, f64)> = dims
        .iter()
        .map(|&nd| {
            let h = 1.0 / (nd + 1) as f64;
            let (diff, conv) = (1.0 / (h * h), spec.c / (2.0 * h));
            let s = match spec.scaling {
                Scaling::H2Scaled => href * href,
                Scaling::Unscaled => 1.0,
            };
            (2.0 * diff * s, (-diff - conv) * s, (-diff + conv) * s)
        })
        .collect();

    let (nx, ny, nz) = (spec.nx, spec.ny, spec.nz);
    let n = spec.n();
    let mut trip = Vec::with_capacity(7 * n);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let row = lex(i, j, k, nx, ny);
                let pos = [i, j, k];
                let diag: f64 = coeffs.iter().map(|c| c.0).sum();
                trip.push((row, row, diag));
                for axis in 0..3 {
                    let (_, lo, hi) = coeffs[axis];
                    let mut p = pos;
                    if pos[axis] > 0 {
                        p[axis] = pos[axis] - 1;
                        trip.push((row, lex(p[0], p[1], p[2], nx, ny), lo));
                    }
                    if pos[axis] + 1 < dims[axis] {
                        p[axis] = pos[axis] + 1;
                        trip.push((row, lex(p[0], p[1], p[2], nx, ny), hi));
                    }
                }
            }
        }
    }
    let a = SparseMatrix::from_triplets(n, n, trip)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let x_star: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let b = spmv(&a, &x_star)?;
    Ok(Problem { a, b, x_star })
}

/// Damped Helmholtz-type system `[(-omega^2 I + K) + i(omega c_v I + mu K)] x = b`
/// with `K` the 5-point Laplacian on the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructuralDynamicsSpec {
    pub nx: usize,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_cv")]
    pub cv_coeff: f64,
    /// `h2_scaled` multiplies the whole system by h^2, which reproduces the
    /// reference iteration counts; `unscaled` keeps K = stencil / h^2.
    #[serde(default)]
    pub scaling: Scaling,
}

fn default_omega() -> f64 {
    std::f64::consts::PI
}
fn default_mu() -> f64 {
    0.02
}
fn default_cv() -> f64 {
    10.0
}

impl StructuralDynamicsSpec {
    pub fn square(nx: usize) -> Self {
        Self {
            nx,
            omega: default_omega(),
            mu: default_mu(),
            cv_coeff: default_cv(),
            scaling: Scaling::H2Scaled,
        }
    }

    pub fn n(&self) -> usize {
        self.nx * self.nx
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 {
            return Err(Error::Config("nx must be at least 1".into()));
        }
        if !(self.omega > 0.0) || !self.mu.is_finite() || !self.cv_coeff.is_finite() {
            return Err(Error::Config("omega must be positive and coefficients finite".into()));
        }
        Ok(())
    }
}

pub fn gen_structural_dynamics(spec: &StructuralDynamicsSpec) -> Result<Problem<Complex64>> {
    spec.validate()?;
    let nx = spec.nx;
    let n = spec.n();
    let h = 1.0 / (nx + 1) as f64;
    let (k_scale, mass_scale) = match spec.scaling {
        Scaling::H2Scaled => (1.0, h * h),
        Scaling::Unscaled => (1.0 / (h * h), 1.0),
    };
    let shift = Complex64::new(-spec.omega * spec.omega, spec.omega * spec.cv_coeff) * mass_scale;
    let kc = Complex64::new(1.0, spec.mu) * k_scale;

    let mut trip = Vec::with_capacity(5 * n);
    for j in 0..nx {
        for i in 0..nx {
            let row = i + nx * j;
            trip.push((row, row, kc * 4.0 + shift));
            if i > 0 {
                trip.push((row, row - 1, -kc));
            }
            if i + 1 < nx {
                trip.push((row, row + 1, -kc));
            }
            if j > 0 {
                trip.push((row, row - nx, -kc));
            }
            if j + 1 < nx {
                trip.push((row, row + nx, -kc));
            }
        }
    }
    let a = SparseMatrix::from_triplets(n, n, trip)?;
    let x_star = vec![Complex64::new(1.0, 1.0); n];
    let b = spmv(&a, &x_star)?;
    Ok(Problem { a, b, x_star })
}
