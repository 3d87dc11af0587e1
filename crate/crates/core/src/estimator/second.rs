//! Bounds for the second-order problem `Aₗ*Aₗx = f`, `Aₗ₋₁*x = g`,
//! `πₗx = k` with approximations `x̃ ≈ x` and `ỹ ≈ y = Aₗx`.
//!
//! The error `e = x − x̃` is bounded componentwise as in the first-order
//! case, except that the `R(Aₗ*)` part uses the composite form. The error
//! `h = y − ỹ` solves a first-order problem one level up with data
//! `(0, f, 0)`, so its bounds are those of [`two_sided_estimate`].

use serde::Serialize;

use super::report::{check, exact_parts, g_component, kernel_component, BoundReport, ComponentBound, Constants};
use super::{two_sided_estimate, EstimateOptions};
use crate::complex::HilbertComplex;
use crate::error::{Error, Result};
use crate::linalg::vector::{add, axpy, norm2, sub};
use crate::linalg::{cg, CgOptions, InnerProduct};

#[derive(Debug, Clone, Serialize)]
pub struct SecondOrderBounds {
    pub e: BoundReport,
    pub h: BoundReport,
    /// `ỹ ∈ R(Aₗ)` up to rounding, forcing the upper components of `h`
    /// to vanish.
    pub y_in_range: bool,
}

/// `c²‖Aₗ*Φ − f‖ + c‖Φ − Aₗξ‖ + ‖ξ − x̃‖ ≥ ‖e_adj‖` for `ξ ∈ Hₗ`,
/// `Φ ∈ Hₗ₊₁`. With `Φ = Aₗξ` this is `c²‖Aₗ*Aₗξ − f‖ + ‖ξ − x̃‖`.
pub fn upper_bound_second_adj(
    c: &HilbertComplex,
    level: usize,
    x_approx: &[f64],
    f: &[f64],
    xi: &[f64],
    flux: Option<&[f64]>,
    c_next: f64,
) -> f64 {
    let l = level as isize;
    let a_xi = c.apply_op(l, xi);
    let flux = flux.unwrap_or(&a_xi);
    let r1 = c.gram(l).norm(&sub(&c.apply_adjoint(l, flux), f));
    let r2 = c.gram(l + 1).norm(&sub(flux, &a_xi));
    c_next * c_next * r1 + c_next * r2 + c.gram(l).norm(&sub(xi, x_approx))
}

/// `2⟨f, φ⟩ − ⟨2x̃ + Aₗ*Aₗφ, Aₗ*Aₗφ⟩ ≤ ‖e_adj‖²` for `φ ∈ Hₗ`.
pub fn lower_bound_second_adj(c: &HilbertComplex, level: usize, x_approx: &[f64], f: &[f64], phi: &[f64]) -> f64 {
    let l = level as isize;
    let m = c.gram(l);
    let w = c.apply_adjoint(l, &c.apply_op(l, phi));
    let mut v = w.clone();
    axpy(2.0, x_approx, &mut v);
    2.0 * m.inner(f, phi) - m.inner(&v, &w)
}

fn composite_component(
    c: &HilbertComplex,
    level: usize,
    x_approx: &[f64],
    f: &[f64],
    c_next: f64,
    tol: f64,
) -> ComponentBound {
    let name = "f-part";
    let l = level as isize;
    let zero = ComponentBound {
        name: name.into(),
        lower: 0.0,
        upper: 0.0,
        exact: None,
        skipped: true,
        converged: true,
        error: None,
        log: Vec::new(),
        attaining: Vec::new(),
    };
    if c.is_zero_op(l) {
        return zero;
    }
    let normal = |v: &[f64]| c.apply_adjoint(l, &c.apply_op(l, v));
    let run = || -> Result<ComponentBound> {
        let rhs = sub(f, &normal(x_approx));
        if rhs.iter().all(|v| *v == 0.0) {
            return Ok(zero.clone());
        }
        let opts = CgOptions::with_tol(tol);
        // ψ ≈ e_adj from Aₗ*Aₗψ = f − Aₗ*Aₗx̃, then φ with Aₗ*Aₗφ = ψ.
        let (psi, st) = cg(normal, c.gram(l), &rhs, &opts);
        check(&st, tol)?;
        let (phi, st) = cg(normal, c.gram(l), &psi, &opts);
        check(&st, tol)?;
        let xi = add(x_approx, &psi);
        let upper = upper_bound_second_adj(c, level, x_approx, f, &xi, None, c_next);
        let lower = lower_bound_second_adj(c, level, x_approx, f, &phi).max(0.0).sqrt();
        Ok(ComponentBound {
            name: name.into(),
            lower,
            upper,
            exact: None,
            skipped: false,
            converged: true,
            error: None,
            log: Vec::new(),
            attaining: vec![xi, phi],
        })
    };
    run().unwrap_or_else(|e| ComponentBound {
        error: Some(e.to_string()),
        converged: false,
        skipped: false,
        ..zero.clone()
    })
}

/// `‖Aₗ₊₁ỹ‖` and `πₗ₊₁ỹ` vanish up to rounding.
fn in_range(c: &HilbertComplex, level: usize, y: &[f64]) -> Result<bool> {
    let l = level as isize + 1;
    let scale = norm2(y) * c.op(l).map_or(0.0, |a| a.max_abs()) * 8.0;
    let ay = c.apply_op(l, y);
    if norm2(&ay) > 1e-12 * scale {
        return Ok(false);
    }
    let k = c.project_cohomology(level + 1, y)?;
    Ok(c.gram(l).norm(&k) <= 1e-12 * c.gram(l).norm(y))
}

/// Bounds for `e = x − x̃` and `h = y − ỹ`.
#[allow(clippy::too_many_arguments)]
pub fn second_order_estimate(
    c: &HilbertComplex,
    level: usize,
    x_approx: &[f64],
    y_approx: &[f64],
    f: &[f64],
    g: &[f64],
    k: &[f64],
    opts: &EstimateOptions,
) -> Result<SecondOrderBounds> {
    c.check_level(level)?;
    c.check_level(level + 1)?;
    let l = level as isize;
    for (what, v, n) in [
        ("approximation", x_approx, c.dim(l)),
        ("approximation y", y_approx, c.dim(l + 1)),
        ("datum f", f, c.dim(l)),
        ("datum g", g, c.dim(l - 1)),
        ("datum k", k, c.dim(l)),
    ] {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                context: what,
                expected: n,
                found: v.len(),
            });
        }
    }
    let constants = match &opts.constants {
        Some(k) => k.clone(),
        None => Constants::compute(c, level, opts.tol)?,
    };

    // h first: it also validates that f ∈ R(Aₗ*).
    let h_opts = EstimateOptions {
        constants: None,
        exact_x: opts.exact_x.as_ref().map(|x| c.apply_op(l, x)),
        ..opts.clone()
    };
    let zeros_up = vec![0.0; c.dim(l + 2)];
    let zeros_k = vec![0.0; c.dim(l + 1)];
    let mut h = two_sided_estimate(c, level + 1, y_approx, &zeros_up, f, &zeros_k, &h_opts)?;
    let y_in_range = in_range(c, level, y_approx)?;
    if y_in_range {
        for comp in h.components.iter_mut().filter(|comp| comp.name != "g-part") {
            comp.lower = 0.0;
            comp.upper = 0.0;
            comp.skipped = true;
            comp.error = None;
            comp.converged = true;
            comp.log.clear();
            comp.attaining.clear();
        }
        h.totals = super::Totals::from_components(&h.components, h.totals.exact);
        h.budget_exhausted = h.components.iter().any(|c| c.ok() && !c.converged);
    }

    let components = vec![
        g_component(c, level, x_approx, g, constants.c_prev, opts),
        kernel_component(c, level, x_approx, k),
        composite_component(c, level, x_approx, f, constants.c_next, opts.tol),
    ];
    let exact = exact_parts(c, level, x_approx, opts)?;
    let e = BoundReport::finish(level, constants, components, exact);
    Ok(SecondOrderBounds { e, h, y_in_range })
}
