//! Alternating minimization of
//! `F(ξ, t) = (1 + 1/t)c²‖Bξ − d‖² + (1 + t)‖ξ − x̃‖²`
//! with `B = Aₗ, d = f` (f-part) or `B = Aₗ₋₁*, d = g` (g-part).
//!
//! For fixed `ξ` the minimizing `t` is `c‖Bξ − d‖/‖ξ − x̃‖`; for fixed `t`
//! the minimizing `ξ` solves `(c²B*B + t)ξ = c²B*d + t x̃`.

use serde::Serialize;

use crate::complex::HilbertComplex;
use crate::error::{Error, Result};
use crate::linalg::vector::{axpy, deterministic_vector, sub};
use crate::linalg::{cg, CgOptions, GramOperator, InnerProduct};

#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    /// Stop once `F` decreases by at most `tol·F` in one outer step.
    pub tol: f64,
    /// Maximal number of outer steps.
    pub max_iter: usize,
    /// Relative tolerance of the inner CG solves.
    pub inner_tol: f64,
    /// Starting field `ξ₀`; must differ from `x̃`.
    pub start: Option<Vec<f64>>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 20,
            inner_tol: 1e-12,
            start: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Minimization {
    /// Last `t` used.
    pub t: f64,
    #[serde(skip)]
    pub xi: Vec<f64>,
    /// `c‖Bξ − d‖ + ‖ξ − x̃‖`, the minimum of `F(ξ, ·)^½`.
    pub bound: f64,
    /// Last logged `F`.
    pub functional: f64,
    /// `(tₙ, F(ξₙ, tₙ))` per outer step.
    pub log: Vec<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
}

struct Problem<'a> {
    m: &'a GramOperator,
    m_data: &'a GramOperator,
    b: Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>,
    bt: Box<dyn Fn(&[f64]) -> Vec<f64> + 'a>,
}

impl Problem<'_> {
    fn residual(&self, xi: &[f64], d: &[f64]) -> f64 {
        self.m_data.norm(&sub(&(self.b)(xi), d))
    }
}

fn functional(c2: f64, t: f64, r: f64, s: f64) -> f64 {
    (1.0 + 1.0 / t) * c2 * r * r + (1.0 + t) * s * s
}

fn alternate(p: &Problem, x_approx: &[f64], d: &[f64], c: f64, opts: &MinimizeOptions) -> Result<Minimization> {
    let n = x_approx.len();
    let c2 = c * c;
    let r0 = p.residual(x_approx, d);
    // x̃ already satisfies the constraint: the component vanishes.
    if r0 == 0.0 {
        return Ok(Minimization {
            t: 0.0,
            xi: x_approx.to_vec(),
            bound: 0.0,
            functional: 0.0,
            log: Vec::new(),
            iterations: 0,
            converged: true,
        });
    }
    let mut xi = match &opts.start {
        Some(s) => {
            if s.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "minimization start",
                    expected: n,
                    found: s.len(),
                });
            }
            s.clone()
        }
        None if x_approx.iter().any(|v| *v != 0.0) => vec![0.0; n],
        None => deterministic_vector(n, 17),
    };
    let conforming = Minimization {
        t: f64::INFINITY,
        xi: x_approx.to_vec(),
        bound: c * r0,
        functional: c2 * r0 * r0,
        log: vec![(f64::INFINITY, c2 * r0 * r0)],
        iterations: 0,
        converged: true,
    };
    if p.m.norm(&sub(&xi, x_approx)) == 0.0 {
        return Ok(conforming);
    }

    // c²B*d is fixed across iterations.
    let mut rhs_base = (p.bt)(d);
    for v in rhs_base.iter_mut() {
        *v *= c2;
    }

    let mut log = Vec::new();
    let mut t = f64::INFINITY;
    let mut f_prev = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let r = p.residual(&xi, d);
        let s = p.m.norm(&sub(&xi, x_approx));
        if r == 0.0 || s == 0.0 {
            converged = true;
            break;
        }
        let t_new = c * r / s;
        let mut rhs = rhs_base.clone();
        axpy(t_new, x_approx, &mut rhs);
        let cg_opts = CgOptions {
            tol: opts.inner_tol,
            x0: Some(&xi),
            ..CgOptions::default()
        };
        let (cand, stats) = cg(
            |v: &[f64]| {
                let mut out = (p.bt)(&(p.b)(v));
                for (o, vi) in out.iter_mut().zip(v) {
                    *o = c2 * *o + t_new * vi;
                }
                out
            },
            p.m,
            &rhs,
            &cg_opts,
        );
        if !(stats.converged || stats.final_residual <= 1e3 * opts.inner_tol) {
            return Err(Error::NonConvergence {
                method: "cg (bound minimization)",
                iterations: stats.iterations,
                residual: stats.final_residual,
            });
        }
        let f_new = functional(c2, t_new, p.residual(&cand, d), p.m.norm(&sub(&cand, x_approx)));
        iterations += 1;
        if f_new > f_prev {
            // Inexact inner solve; keep the previous pair.
            converged = true;
            break;
        }
        xi = cand;
        t = t_new;
        log.push((t, f_new));
        let decrease = f_prev - f_new;
        f_prev = f_new;
        if decrease <= opts.tol * f_new {
            converged = true;
            break;
        }
    }
    let r = p.residual(&xi, d);
    let s = p.m.norm(&sub(&xi, x_approx));
    let bound = c * r + s;
    if bound >= conforming.bound {
        let mut out = conforming;
        out.log = log;
        out.iterations = iterations;
        out.converged = converged;
        return Ok(out);
    }
    Ok(Minimization {
        t,
        xi,
        bound,
        functional: f_prev,
        log,
        iterations,
        converged,
    })
}

/// Minimizes the f-part upper bound; `c_next` is (an upper bound of) `cₗ`.
pub fn minimize_upper_f(
    c: &HilbertComplex,
    level: usize,
    x_approx: &[f64],
    f: &[f64],
    c_next: f64,
    opts: &MinimizeOptions,
) -> Result<Minimization> {
    c.check_level(level)?;
    let l = level as isize;
    let p = Problem {
        m: c.gram(l),
        m_data: c.gram(l + 1),
        b: Box::new(move |v| c.apply_op(l, v)),
        bt: Box::new(move |v| c.apply_adjoint(l, v)),
    };
    alternate(&p, x_approx, f, c_next, opts)
}

/// Minimizes the g-part upper bound; `c_prev` is (an upper bound of) `cₗ₋₁`.
pub fn minimize_upper_g(
    c: &HilbertComplex,
    level: usize,
    x_approx: &[f64],
    g: &[f64],
    c_prev: f64,
    opts: &MinimizeOptions,
) -> Result<Minimization> {
    c.check_level(level)?;
    let l = level as isize;
    let p = Problem {
        m: c.gram(l),
        m_data: c.gram(l - 1),
        b: Box::new(move |v| c.apply_adjoint(l - 1, v)),
        bt: Box::new(move |v| c.apply_op(l - 1, v)),
    };
    alternate(&p, x_approx, g, c_prev, opts)
}
