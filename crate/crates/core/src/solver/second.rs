//! Second-order problem `Aₗ*Aₗx = f`, `Aₗ₋₁*x = g`, `πₗx = k`, solved as
//! two first-order problems: `y ∈ R(Aₗ)` with `Aₗ*y = f`, then
//! `Aₗx = y`, `Aₗ₋₁*x = g`, `πₗx = k`.

use serde::Serialize;

use super::{solve_first_order_with, CompatibilityReport, FirstOrderProblem, Membership, SolveOptions, SolveReport};
use crate::complex::{HilbertComplex, RangeSide, PROJECTION_TOL};
use crate::error::{Error, Result};
use crate::linalg::vector::sub;
use crate::linalg::{cg, CgOptions, InnerProduct, IterStats};

#[derive(Debug, Clone)]
pub struct SecondOrderProblem<'a> {
    pub complex: &'a HilbertComplex,
    pub level: usize,
    /// In `Hₗ`.
    pub f: Vec<f64>,
    /// In `Hₗ₋₁`.
    pub g: Vec<f64>,
    /// In `Hₗ`.
    pub k: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondOrderResiduals {
    /// `‖Aₗx − y‖`
    pub first: f64,
    /// `‖Aₗ*y − f‖`
    pub second: f64,
    /// `‖Aₗ*Aₗx − f‖`
    pub combined: f64,
    /// `‖Aₗ₋₁*x − g‖`
    pub prev_adjoint: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondOrderReport {
    pub level: usize,
    #[serde(skip)]
    pub y: Vec<f64>,
    pub y_norm: f64,
    pub f_membership: Membership,
    pub y_stats: IterStats,
    pub residuals: SecondOrderResiduals,
    pub first_order: SolveReport,
}

impl SecondOrderReport {
    pub fn x(&self) -> &[f64] {
        &self.first_order.x
    }
}

pub fn solve_second_order(problem: &SecondOrderProblem, opts: &SolveOptions) -> Result<SecondOrderReport> {
    let c = problem.complex;
    let level = problem.level;
    c.check_level(level)?;
    let l = level as isize;
    let m = c.gram(l);
    if problem.f.len() != c.dim(l) {
        return Err(Error::DimensionMismatch {
            context: "datum f",
            expected: c.dim(l),
            found: problem.f.len(),
        });
    }

    // f must lie in R(Aₗ*).
    let f_proj = if c.dim(l + 1) == 0 {
        vec![0.0; c.dim(l)]
    } else {
        c.project_range(RangeSide::AdjRange, level, &problem.f, PROJECTION_TOL)?.p
    };
    let norm = m.norm(&problem.f);
    let distance = m.norm(&sub(&problem.f, &f_proj));
    let f_membership = Membership {
        norm,
        distance,
        pass: distance <= opts.compat_tol * norm,
    };
    if !f_membership.pass {
        return Err(Error::Incompatible(format!(
            "distance of f to R(A*) = {distance:.3e} (|f| = {norm:.3e})"
        )));
    }

    let (y, y_stats) = if c.dim(l + 1) == 0 {
        (Vec::new(), IterStats::trivial())
    } else {
        let cg_opts = CgOptions {
            tol: opts.tol,
            ..CgOptions::default()
        };
        let (z, st) = cg(
            |v: &[f64]| c.apply_adjoint(l, &c.apply_op(l, v)),
            m,
            &f_proj,
            &cg_opts,
        );
        if !(st.converged || st.final_residual <= 1e3 * opts.tol) {
            return Err(Error::NonConvergence {
                method: "cg (second order)",
                iterations: st.iterations,
                residual: st.final_residual,
            });
        }
        (c.apply_op(l, &z), st)
    };

    let first = FirstOrderProblem::new(c, level, y.clone(), problem.g.clone(), problem.k.clone())?;
    let report = solve_first_order_with(&first, opts)?;
    let x = &report.x;
    let ax = c.apply_op(l, x);
    let mn = c.gram(l + 1);
    let residuals = SecondOrderResiduals {
        first: mn.norm(&sub(&ax, &y)),
        second: m.norm(&sub(&c.apply_adjoint(l, &y), &problem.f)),
        combined: m.norm(&sub(&c.apply_adjoint(l, &ax), &problem.f)),
        prev_adjoint: report.residuals.prev_adjoint,
    };
    Ok(SecondOrderReport {
        level,
        y_norm: mn.norm(&y),
        y,
        f_membership,
        y_stats,
        residuals,
        first_order: report,
    })
}

impl SecondOrderReport {
    pub fn compatibility(&self) -> &CompatibilityReport {
        &self.first_order.compatibility
    }
}
