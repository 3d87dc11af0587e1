//! Guaranteed two-sided bounds for the error `e = x − x̃` of an arbitrary
//! approximation `x̃ ∈ Hₗ`, split along `Hₗ = R(Aₗ₋₁) ⊕ Kₗ ⊕ R(Aₗ*)`.
//!
//! Naming follows the solver: the "g-part" lives in `R(Aₗ₋₁)` and is
//! controlled by `Aₗ₋₁*x = g`, the "f-part" lives in `R(Aₗ*)` and is
//! controlled by `Aₗx = f`.

mod bounds;
mod minimize;
mod report;
mod second;

use serde::Serialize;

use crate::complex::{HilbertComplex, RangeSide, PROJECTION_TOL};
use crate::error::Result;
use crate::linalg::vector::sub;
use crate::linalg::InnerProduct;

pub use bounds::{
    conforming_functional, lower_bound_f_part, lower_bound_g_part, lower_bound_kernel_part, upper_bound_f_part,
    upper_bound_g_part, upper_bound_kernel_part, TrialFields, TrialValues,
};
pub use minimize::{minimize_upper_f, minimize_upper_g, Minimization, MinimizeOptions};
pub use report::{two_sided_estimate, BoundReport, ComponentBound, Constants, EstimateOptions, Totals};
pub use second::{
    lower_bound_second_adj, second_order_estimate, upper_bound_second_adj, SecondOrderBounds,
};

#[derive(Debug, Clone, Serialize)]
pub struct ErrorDecomposition {
    #[serde(skip)]
    pub e: Vec<f64>,
    /// Component in `R(Aₗ₋₁)`.
    #[serde(skip)]
    pub e_prev: Vec<f64>,
    /// Component in `Kₗ`.
    #[serde(skip)]
    pub e_kernel: Vec<f64>,
    /// Component in `R(Aₗ*)`.
    #[serde(skip)]
    pub e_adj: Vec<f64>,
    pub norm: f64,
    pub norm_prev: f64,
    pub norm_kernel: f64,
    pub norm_adj: f64,
    /// `|‖e‖² − Σ‖eᵢ‖²|`, relative to `‖e‖²` when that is nonzero.
    pub pythagoras_gap: f64,
}

/// Splits `x − x̃` into its three orthogonal components.
pub fn decompose_error(c: &HilbertComplex, level: usize, x_approx: &[f64], x: &[f64], tol: f64) -> Result<ErrorDecomposition> {
    let e = sub(x, x_approx);
    let h = c.helmholtz_decompose(level, &e, tol)?;
    let m = c.gram(level as isize);
    let norm = m.norm(&e);
    let (np, nk, na) = (m.norm(&h.prev), m.norm(&h.kernel), m.norm(&h.adj));
    let gap = (norm * norm - np * np - nk * nk - na * na).abs();
    Ok(ErrorDecomposition {
        pythagoras_gap: if norm > 0.0 { gap / (norm * norm) } else { gap },
        e,
        e_prev: h.prev,
        e_kernel: h.kernel,
        e_adj: h.adj,
        norm,
        norm_prev: np,
        norm_kernel: nk,
        norm_adj: na,
    })
}

/// Potentials `(φ, φ')` with `Aₗ₋₁φ + Aₗ*φ' = (1 − πₗ)x̃`, attaining the
/// kernel upper bound.
pub fn kernel_attaining_potentials(c: &HilbertComplex, level: usize, x_approx: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let l = level as isize;
    let phi = if level == 0 || c.dim(l - 1) == 0 {
        vec![0.0; c.dim(l - 1)]
    } else {
        c.project_range(RangeSide::PrevRange, level, x_approx, PROJECTION_TOL)?.potential
    };
    let phi_prime = if c.dim(l + 1) == 0 {
        Vec::new()
    } else {
        c.project_range(RangeSide::AdjRange, level, x_approx, PROJECTION_TOL)?.potential
    };
    Ok((phi, phi_prime))
}
