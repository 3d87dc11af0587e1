//! Friedrichs/Poincaré constants `cₗ = 1/√λ_min⁺(Aₗ*Aₗ)`.

use serde::{Deserialize, Serialize};

use super::{dense_slice, HilbertComplex};
use crate::error::{Error, Result};
use crate::linalg::dense::KERNEL_THRESHOLD;
use crate::linalg::vector::deterministic_vector;
use crate::linalg::{lanczos_extremal, LanczosOptions, Which, DEFAULT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantMethod {
    Lanczos,
    Dense,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub level: usize,
    pub c_l: f64,
    pub method: ConstantMethod,
    pub tolerance: f64,
    /// Dimension of the kernel excluded from the Rayleigh quotient:
    /// `dim N(Aₗ)` for `cₗ`, `dim N(Aₗ*)` for `cₗ*`.
    pub deflated_dim: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub iterations: usize,
}

/// Smallest admissible `σ_min/σ_max`: 1e3 times the kernel threshold.
pub const RANK_STABILITY: f64 = 1e3 * KERNEL_THRESHOLD;

impl HilbertComplex {
    /// `cₗ` from Lanczos on `Aₗ*Aₗ`, falling back to the dense oracle when
    /// Lanczos fails on a slice under the cap.
    pub fn poincare_constant(&self, level: usize, tol: f64) -> Result<ConstantsReport> {
        self.constant_impl(level, tol, false)
    }

    /// `cₗ*` from Lanczos on `AₗAₗ*`; equals `cₗ`.
    pub fn poincare_constant_adjoint(&self, level: usize, tol: f64) -> Result<ConstantsReport> {
        self.constant_impl(level, tol, true)
    }

    fn constant_impl(&self, level: usize, tol: f64, adjoint: bool) -> Result<ConstantsReport> {
        self.check_level(level)?;
        let l = level as isize;
        if self.is_zero_op(l) {
            return Err(Error::NoNonzeroSingularValue { level });
        }
        // Starting in the range of the operator keeps Lanczos away from the kernel.
        let (start, space) = if adjoint {
            (self.apply_op(l, &deterministic_vector(self.dim(l), 13)), l + 1)
        } else {
            (self.apply_adjoint(l, &deterministic_vector(self.dim(l + 1), 11)), l)
        };
        let opts = LanczosOptions {
            tol,
            start: Some(&start),
            ..LanczosOptions::default()
        };
        let result = if adjoint {
            lanczos_extremal(
                |v: &[f64]| self.apply_op(l, &self.apply_adjoint(l, v)),
                self.gram(space),
                Which::SmallestNonzero,
                &opts,
            )
        } else {
            lanczos_extremal(
                |v: &[f64]| self.apply_adjoint(l, &self.apply_op(l, v)),
                self.gram(space),
                Which::SmallestNonzero,
                &opts,
            )
        };
        let deflated_dim = if adjoint {
            self.dim(l + 1) - self.rank(level)?
        } else {
            self.dim(l) - self.rank(level)?
        };
        let report = match result {
            Ok(r) => ConstantsReport {
                level,
                c_l: 1.0 / r.value.sqrt(),
                method: ConstantMethod::Lanczos,
                tolerance: tol,
                deflated_dim,
                lambda_min: r.value,
                lambda_max: r.largest,
                iterations: r.iterations,
            },
            Err(Error::NoNonzeroSingularValue { .. }) => return Err(Error::NoNonzeroSingularValue { level }),
            Err(e @ Error::NonConvergence { .. }) => {
                let slice_dim = self.dim(l - 1) + self.dim(l) + self.dim(l + 1);
                if slice_dim > DEFAULT_CAP {
                    return Err(e);
                }
                let mut r = self.poincare_constant_dense(level, DEFAULT_CAP)?;
                r.tolerance = tol;
                r
            }
            Err(e) => return Err(e),
        };
        let ratio = report.lambda_min / report.lambda_max;
        let threshold = RANK_STABILITY * RANK_STABILITY;
        if ratio < threshold {
            return Err(Error::IllPosed {
                level,
                ratio: ratio.sqrt(),
                threshold: RANK_STABILITY,
            });
        }
        Ok(report)
    }

    /// `cₗ` from the dense SVD of `Âₗ`.
    pub fn poincare_constant_dense(&self, level: usize, cap: usize) -> Result<ConstantsReport> {
        let slice = dense_slice(self, level, cap)?;
        let sigma = slice.next.smallest_nonzero().ok_or(Error::NoNonzeroSingularValue { level })?;
        let smax = slice.next.sigma_max();
        if sigma / smax < RANK_STABILITY {
            return Err(Error::IllPosed {
                level,
                ratio: sigma / smax,
                threshold: RANK_STABILITY,
            });
        }
        Ok(ConstantsReport {
            level,
            c_l: 1.0 / sigma,
            method: ConstantMethod::Dense,
            tolerance: 0.0,
            deflated_dim: slice.kernel_dim(),
            lambda_min: sigma * sigma,
            lambda_max: smax * smax,
            iterations: 0,
        })
    }

    /// `rank Aₗ`, from `dim Hₖ = rank Aₖ₋₁ + dim Kₖ + rank Aₖ`.
    pub fn rank(&self, level: usize) -> Result<usize> {
        let mut prev = 0usize;
        for k in 0..=level {
            let dim_k = self.dim(k as isize);
            let coh = self.cohomology(k)?.dim;
            prev = dim_k.checked_sub(coh + prev).ok_or_else(|| {
                Error::InvalidComplex(format!("inconsistent dimensions at level {k}: rank recursion went negative"))
            })?;
        }
        Ok(prev)
    }

    /// `dim N(Aₗ)`.
    pub fn kernel_dim(&self, level: usize) -> Result<usize> {
        Ok(self.dim(level as isize) - self.rank(level)?)
    }
}
