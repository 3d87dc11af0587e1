//! Assembly of the componentwise bounds into a two-sided estimate of `‖e‖`.

use std::fmt::Write as _;

use serde::Serialize;

use super::bounds::{lower_bound_f_part, lower_bound_g_part, lower_bound_kernel_part, upper_bound_kernel_part};
use super::minimize::{minimize_upper_f, minimize_upper_g, MinimizeOptions};
use super::{decompose_error, kernel_attaining_potentials};
use crate::complex::HilbertComplex;
use crate::error::{Error, Result};
use crate::linalg::vector::sub;
use crate::linalg::{cg, CgOptions, InnerProduct};
use crate::solver::{check_compatibility, FirstOrderProblem, COMPAT_TOL};

/// Relative amount by which computed constants are enlarged before use.
pub const CONSTANT_INFLATION: f64 = 1e-8;

/// Below this relative size the kernel error is reported as exactly zero.
const KERNEL_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct Constants {
    /// Upper bound for `cₗ₋₁`; zero when `Aₗ₋₁ = 0`.
    pub c_prev: f64,
    /// Upper bound for `cₗ`; zero when `Aₗ = 0`.
    pub c_next: f64,
    pub source: String,
}

impl Constants {
    pub fn compute(c: &HilbertComplex, level: usize, tol: f64) -> Result<Self> {
        let l = level as isize;
        let one = |lv: isize| -> Result<f64> {
            if lv < 0 || c.is_zero_op(lv) {
                return Ok(0.0);
            }
            Ok(c.poincare_constant(lv as usize, tol)?.c_l * (1.0 + CONSTANT_INFLATION))
        };
        Ok(Self {
            c_prev: one(l - 1)?,
            c_next: one(l)?,
            source: "computed".into(),
        })
    }

    pub fn given(c_prev: f64, c_next: f64) -> Self {
        Self {
            c_prev,
            c_next,
            source: "user".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EstimateOptions {
    /// Outer iterations of each minimization algorithm.
    pub budget: usize,
    /// Relative tolerance of all inner solves.
    pub tol: f64,
    /// Relative decrease of the functional that stops the algorithms.
    pub stop_tol: f64,
    pub constants: Option<Constants>,
    /// Exact solution, when known, for efficiency indices.
    pub exact_x: Option<Vec<f64>>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            budget: 20,
            tol: 1e-12,
            stop_tol: 1e-6,
            constants: None,
            exact_x: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentBound {
    pub name: String,
    /// Lower bound on the component norm.
    pub lower: f64,
    /// Upper bound on the component norm.
    pub upper: f64,
    /// Exact component norm, when the exact solution was supplied.
    pub exact: Option<f64>,
    /// The component is zero by construction and was not estimated.
    pub skipped: bool,
    pub converged: bool,
    pub error: Option<String>,
    /// `(tₙ, Fₙ)` of the minimization algorithm.
    pub log: Vec<(f64, f64)>,
    /// Trial fields attaining `upper` and `lower`, in that order.
    #[serde(skip)]
    pub attaining: Vec<Vec<f64>>,
}

impl ComponentBound {
    fn zero(name: &str) -> Self {
        Self {
            name: name.into(),
            lower: 0.0,
            upper: 0.0,
            exact: None,
            skipped: true,
            converged: true,
            error: None,
            log: Vec::new(),
            attaining: Vec::new(),
        }
    }

    fn failed(name: &str, e: Error) -> Self {
        Self {
            error: Some(e.to_string()),
            converged: false,
            skipped: false,
            ..Self::zero(name)
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Totals {
    pub lower_total: f64,
    pub upper_total: f64,
    pub exact: Option<f64>,
    /// `upper_total / ‖e‖`
    pub efficiency_index: Option<f64>,
    /// `lower_total / ‖e‖`
    pub lower_ratio: Option<f64>,
    /// All components were estimated successfully.
    pub valid: bool,
}

impl Totals {
    pub fn from_components(components: &[ComponentBound], exact: Option<f64>) -> Self {
        let ok: Vec<&ComponentBound> = components.iter().filter(|c| c.ok()).collect();
        let lower_total = ok.iter().map(|c| c.lower * c.lower).sum::<f64>().sqrt();
        let upper_total = ok.iter().map(|c| c.upper * c.upper).sum::<f64>().sqrt();
        let ratio = |v: f64| exact.filter(|e| *e > 0.0).map(|e| v / e);
        Self {
            lower_total,
            upper_total,
            exact,
            efficiency_index: ratio(upper_total),
            lower_ratio: ratio(lower_total),
            valid: ok.len() == components.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub level: usize,
    pub constants: Constants,
    pub components: Vec<ComponentBound>,
    pub totals: Totals,
    /// Some algorithm stopped on the budget rather than on its tolerance.
    pub budget_exhausted: bool,
}

impl BoundReport {
    pub fn component(&self, name: &str) -> Option<&ComponentBound> {
        self.components.iter().find(|c| c.name == name)
    }

    /// Convergence traces as CSV: `component,iteration,t,functional`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("component,iteration,t,functional\n");
        for c in &self.components {
            for (i, (t, f)) in c.log.iter().enumerate() {
                let _ = writeln!(out, "{},{},{:.16e},{:.16e}", c.name, i + 1, t, f);
            }
        }
        out
    }

    pub(crate) fn finish(level: usize, constants: Constants, mut components: Vec<ComponentBound>, exact: Option<(f64, [f64; 3])>) -> Self {
        if let Some((_, parts)) = exact {
            for (c, v) in components.iter_mut().zip(parts) {
                c.exact = Some(v);
            }
        }
        let totals = Totals::from_components(&components, exact.map(|e| e.0));
        let budget_exhausted = components.iter().any(|c| c.ok() && !c.converged);
        Self {
            level,
            constants,
            components,
            totals,
            budget_exhausted,
        }
    }
}

pub(crate) fn lower_g(c: &HilbertComplex, level: usize, x_approx: &[f64], g: &[f64], tol: f64) -> Result<(f64, Vec<f64>)> {
    let l = level as isize;
    let rhs = sub(g, &c.apply_adjoint(l - 1, x_approx));
    let (phi, st) = cg(
        |v: &[f64]| c.apply_adjoint(l - 1, &c.apply_op(l - 1, v)),
        c.gram(l - 1),
        &rhs,
        &CgOptions::with_tol(tol),
    );
    check(&st, tol)?;
    Ok((lower_bound_g_part(c, level, x_approx, g, &phi), phi))
}

pub(crate) fn lower_f(c: &HilbertComplex, level: usize, x_approx: &[f64], f: &[f64], tol: f64) -> Result<(f64, Vec<f64>)> {
    let l = level as isize;
    let rhs = sub(f, &c.apply_op(l, x_approx));
    let (phi, st) = cg(
        |v: &[f64]| c.apply_op(l, &c.apply_adjoint(l, v)),
        c.gram(l + 1),
        &rhs,
        &CgOptions::with_tol(tol),
    );
    check(&st, tol)?;
    Ok((lower_bound_f_part(c, level, x_approx, f, &phi), phi))
}

pub(crate) fn check(st: &crate::linalg::IterStats, tol: f64) -> Result<()> {
    if st.converged || st.final_residual <= 1e3 * tol {
        Ok(())
    } else {
        Err(Error::NonConvergence {
            method: "cg (lower bound)",
            iterations: st.iterations,
            residual: st.final_residual,
        })
    }
}

fn minimize_opts(opts: &EstimateOptions) -> MinimizeOptions {
    MinimizeOptions {
        tol: opts.stop_tol,
        max_iter: opts.budget,
        inner_tol: opts.tol,
        start: None,
    }
}

pub(crate) fn g_component(
    c: &HilbertComplex,
    level: usize,
    x_approx: &[f64],
    g: &[f64],
    c_prev: f64,
    opts: &EstimateOptions,
) -> ComponentBound {
    let name = "g-part";
    if c.is_zero_op(level as isize - 1) {
        return ComponentBound::zero(name);
    }
    let run = || -> Result<ComponentBound> {
        let m = minimize_upper_g(c, level, x_approx, g, c_prev, &minimize_opts(opts))?;
        let (value, phi) = lower_g(c, level, x_approx, g, opts.tol)?;
        Ok(ComponentBound {
            name: name.into(),
            lower: value.max(0.0).sqrt(),
            upper: m.bound,
            exact: None,
            skipped: false,
            converged: m.converged,
            error: None,
            log: m.log,
            attaining: vec![m.xi, phi],
        })
    };
    run().unwrap_or_else(|e| ComponentBound::failed(name, e))
}

pub(crate) fn f_component(
    c: &HilbertComplex,
    level: usize,
    x_approx: &[f64],
    f: &[f64],
    c_next: f64,
    opts: &EstimateOptions,
) -> ComponentBound {
    let name = "f-part";
    if c.is_zero_op(level as isize) {
        return ComponentBound::zero(name);
    }
    let run = || -> Result<ComponentBound> {
        let m = minimize_upper_f(c, level, x_approx, f, c_next, &minimize_opts(opts))?;
        let (value, phi) = lower_f(c, level, x_approx, f, opts.tol)?;
        Ok(ComponentBound {
            name: name.into(),
            lower: value.max(0.0).sqrt(),
            upper: m.bound,
            exact: None,
            skipped: false,
            converged: m.converged,
            error: None,
            log: m.log,
            attaining: vec![m.xi, phi],
        })
    };
    run().unwrap_or_else(|e| ComponentBound::failed(name, e))
}

pub(crate) fn kernel_component(c: &HilbertComplex, level: usize, x_approx: &[f64], k: &[f64]) -> ComponentBound {
    let name = "kernel";
    let run = || -> Result<ComponentBound> {
        if c.cohomology(level)?.dim == 0 {
            return Ok(ComponentBound::zero(name));
        }
        let m = c.gram(level as isize);
        let theta = sub(k, &c.project_cohomology(level, x_approx)?);
        let scale = m.norm(k).max(m.norm(x_approx));
        if m.norm(&theta) <= KERNEL_ZERO * scale {
            return Ok(ComponentBound::zero(name));
        }
        let (phi, phi_prime) = kernel_attaining_potentials(c, level, x_approx)?;
        let upper = upper_bound_kernel_part(c, level, x_approx, k, &phi, &phi_prime);
        let lower = lower_bound_kernel_part(c, level, x_approx, k, &theta).max(0.0).sqrt();
        Ok(ComponentBound {
            name: name.into(),
            lower,
            upper,
            exact: None,
            skipped: false,
            converged: true,
            error: None,
            log: Vec::new(),
            attaining: vec![phi, phi_prime, theta],
        })
    };
    run().unwrap_or_else(|e| ComponentBound::failed(name, e))
}

pub(crate) fn exact_parts(c: &HilbertComplex, level: usize, x_approx: &[f64], opts: &EstimateOptions) -> Result<Option<(f64, [f64; 3])>> {
    match &opts.exact_x {
        None => Ok(None),
        Some(x) => {
            let d = decompose_error(c, level, x_approx, x, opts.tol)?;
            Ok(Some((d.norm, [d.norm_prev, d.norm_kernel, d.norm_adj])))
        }
    }
}

/// Lower and upper bounds for each component of `e = x − x̃`, where `x`
/// solves `Aₗx = f`, `Aₗ₋₁*x = g`, `πₗx = k`.
pub fn two_sided_estimate(
    c: &HilbertComplex,
    level: usize,
    x_approx: &[f64],
    f: &[f64],
    g: &[f64],
    k: &[f64],
    opts: &EstimateOptions,
) -> Result<BoundReport> {
    let problem = FirstOrderProblem::new(c, level, f.to_vec(), g.to_vec(), k.to_vec())?;
    if x_approx.len() != c.dim(level as isize) {
        return Err(Error::DimensionMismatch {
            context: "approximation",
            expected: c.dim(level as isize),
            found: x_approx.len(),
        });
    }
    let compat = check_compatibility(&problem, COMPAT_TOL)?;
    if !compat.pass {
        return Err(Error::Incompatible(compat.summary()));
    }
    let constants = match &opts.constants {
        Some(k) => k.clone(),
        None => Constants::compute(c, level, opts.tol)?,
    };
    let components = vec![
        g_component(c, level, x_approx, g, constants.c_prev, opts),
        kernel_component(c, level, x_approx, k),
        f_component(c, level, x_approx, f, constants.c_next, opts),
    ];
    let exact = exact_parts(c, level, x_approx, opts)?;
    Ok(BoundReport::finish(level, constants, components, exact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{build_cycle, build_grid, GridSpec, Recipe};
    use crate::linalg::vector::{add, deterministic_vector};

    #[test]
    fn annulus_sandwich() {
        let g = build_grid(&GridSpec::new(2, 6).with_hole(vec![2, 2], vec![4, 4])).unwrap();
        let c = &g.complex;
        let s = g.manufacture(1, Recipe::SmoothPotential, 9).unwrap();
        let pert = deterministic_vector(s.exact_x.len(), 2);
        let xa: Vec<f64> = s.exact_x.iter().zip(&pert).map(|(a, b)| a + 0.05 * b).collect();
        let opts = EstimateOptions {
            exact_x: Some(s.exact_x.clone()),
            ..EstimateOptions::default()
        };
        let r = two_sided_estimate(c, 1, &xa, &s.f, &s.g, &s.k, &opts).unwrap();
        assert!(r.totals.valid);
        for comp in &r.components {
            let e = comp.exact.unwrap();
            assert!(comp.lower <= e * (1.0 + 1e-10) + 1e-14, "{comp:?}");
            assert!(comp.upper >= e * (1.0 - 1e-10) - 1e-10, "{comp:?}");
        }
        let q: f64 = r.components.iter().map(|c| c.upper * c.upper).sum();
        assert_eq!(r.totals.upper_total, q.sqrt());
        assert!(r.totals.efficiency_index.unwrap() <= 1.01);
        assert!(r.totals.lower_ratio.unwrap() >= 0.99);
    }

    #[test]
    fn kernel_orthogonal_approximation_skips_kernel() {
        let cy = build_cycle(7).unwrap();
        let s = cy.manufacture(1, Recipe::RangePair, 1).unwrap();
        // x̃ = k + (something orthogonal to K)
        let grad_part = cy.complex.apply_op(0, &deterministic_vector(7, 3));
        let xa = add(&s.k, &grad_part);
        let r = two_sided_estimate(&cy.complex, 1, &xa, &s.f, &s.g, &s.k, &EstimateOptions::default()).unwrap();
        let kc = r.component("kernel").unwrap();
        assert!(kc.skipped);
        assert_eq!(kc.upper, 0.0);
    }

    #[test]
    fn trace_csv_has_header() {
        let cy = build_cycle(5).unwrap();
        let s = cy.manufacture(1, Recipe::RangePair, 1).unwrap();
        let xa: Vec<f64> = s.exact_x.iter().map(|v| v * 0.9).collect();
        let r = two_sided_estimate(&cy.complex, 1, &xa, &s.f, &s.g, &s.k, &EstimateOptions::default()).unwrap();
        let csv = r.trace_csv();
        assert!(csv.starts_with("component,iteration,t,functional\n"));
        assert!(csv.lines().count() > 1);
    }
}
