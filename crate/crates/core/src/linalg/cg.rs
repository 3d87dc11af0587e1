//! Conjugate gradients in a weighted inner product.

use serde::Serialize;

use super::gram::InnerProduct;
use super::vector::{axpy, sub};

/// Iteration statistics reported by every Krylov solver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterStats {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    pub breakdown_reason: Option<String>,
}

impl IterStats {
    pub fn trivial() -> Self {
        Self {
            iterations: 0,
            final_residual: 0.0,
            converged: true,
            breakdown_reason: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOptions<'a> {
    /// Relative tolerance on `‖b − Ax‖_M / ‖b‖_M`.
    pub tol: f64,
    /// Defaults to `10 · dim`.
    pub max_iter: Option<usize>,
    pub x0: Option<&'a [f64]>,
    /// M-orthonormal basis of the kernel of `A`; residuals are kept
    /// M-orthogonal to it.
    pub deflation: Option<&'a [Vec<f64>]>,
}

impl Default for CgOptions<'_> {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
            x0: None,
            deflation: None,
        }
    }
}

impl<'a> CgOptions<'a> {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

fn deflate(v: &mut [f64], basis: Option<&[Vec<f64>]>, m: &dyn InnerProduct) {
    if let Some(basis) = basis {
        for q in basis {
            let c = m.inner(q, v);
            axpy(-c, q, v);
        }
    }
}

/// Solves `A x = b` for `A` self-adjoint positive semidefinite in the
/// inner product `m`.
///
/// Starting from zero (or from an `x0` in the range of `A`) with a
/// consistent right-hand side, the iterates stay in the range and the
/// result is the minimum-norm solution.
pub fn cg<F>(apply: F, m: &dyn InnerProduct, b: &[f64], opts: &CgOptions) -> (Vec<f64>, IterStats)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let b_norm = m.norm(b);
    let mut x = match opts.x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    if b_norm == 0.0 && opts.x0.is_none() {
        return (x, IterStats::trivial());
    }
    let scale = if b_norm > 0.0 { b_norm } else { 1.0 };
    let target = opts.tol * scale;

    let mut r = if opts.x0.is_some() { sub(b, &apply(&x)) } else { b.to_vec() };
    deflate(&mut r, opts.deflation, m);
    let mut rr = m.inner(&r, &r);
    let mut best = (rr.sqrt(), x.clone());
    if rr.sqrt() <= target {
        return (
            x,
            IterStats {
                iterations: 0,
                final_residual: rr.sqrt() / scale,
                converged: true,
                breakdown_reason: None,
            },
        );
    }
    let mut p = r.clone();
    let mut breakdown = None;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let ap = apply(&p);
        let curv = m.inner(&p, &ap);
        if !(curv > 0.0) || !curv.is_finite() {
            breakdown = Some(if curv.is_finite() {
                "zero or negative curvature: right-hand side inconsistent with the range".to_string()
            } else {
                "non-finite curvature".to_string()
            });
            break;
        }
        let alpha = rr / curv;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        deflate(&mut r, opts.deflation, m);
        let rr_new = m.inner(&r, &r);
        let res = rr_new.sqrt();
        if res < best.0 {
            best = (res, x.clone());
        }
        if res <= target {
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }

    // The recursive residual drifts from the true one; report the true value.
    let mut true_r = sub(b, &apply(&x));
    deflate(&mut true_r, opts.deflation, m);
    let mut res = m.norm(&true_r);
    let mut best_x = x;
    if best.0 < res {
        let mut r_best = sub(b, &apply(&best.1));
        deflate(&mut r_best, opts.deflation, m);
        let rb = m.norm(&r_best);
        if rb < res {
            res = rb;
            best_x = best.1;
        }
    }
    let converged = res <= target;
    if !converged && breakdown.is_none() && it >= max_iter {
        breakdown = Some("iteration limit reached".to_string());
    }
    (
        best_x,
        IterStats {
            iterations: it,
            final_residual: res / scale,
            converged,
            breakdown_reason: if converged { None } else { breakdown },
        },
    )
}

/// `cg` with the conventional argument list: tolerance relative to
/// `‖b‖_M` and an iteration cap.
pub fn cg_solve<F>(apply: F, m: &dyn InnerProduct, b: &[f64], tol: f64, maxit: usize) -> (Vec<f64>, IterStats)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    cg(
        apply,
        m,
        b,
        &CgOptions {
            tol,
            max_iter: Some(maxit),
            ..CgOptions::default()
        },
    )
}
