//! Extremal eigenvalues of self-adjoint positive semidefinite operators by
//! Lanczos with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::gram::InnerProduct;
use super::vector::{axpy, deterministic_vector, scale};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    SmallestNonzero,
    Largest,
}

#[derive(Debug, Clone)]
pub struct LanczosOptions<'a> {
    /// Relative accuracy requested for the eigenvalue.
    pub tol: f64,
    /// Defaults to the dimension.
    pub max_iter: Option<usize>,
    /// M-orthonormal vectors removed from every Krylov vector.
    pub kernel_basis: Option<&'a [Vec<f64>]>,
    /// Defaults to a fixed deterministic vector.
    pub start: Option<&'a [f64]>,
    /// Ritz values at or below `zero_threshold · θ_max` count as kernel.
    pub zero_threshold: f64,
}

impl Default for LanczosOptions<'_> {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: None,
            kernel_basis: None,
            start: None,
            zero_threshold: 1e-11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanczosResult {
    pub value: f64,
    /// Largest Ritz value seen, an estimate of the operator norm.
    pub largest: f64,
    pub iterations: usize,
    pub residual_estimate: f64,
    pub converged: bool,
    /// Ritz values discarded as numerical kernel.
    pub ghosts: usize,
}

fn check_orthonormal(basis: &[Vec<f64>], m: &dyn InnerProduct) -> Result<()> {
    let mut worst = 0.0_f64;
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m.inner(u, v) - target).abs());
        }
    }
    if worst > 1e-10 {
        return Err(Error::KernelNotOrthonormal(worst));
    }
    Ok(())
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>], m: &dyn InnerProduct) {
    for q in against {
        let c = m.inner(q, w);
        axpy(-c, q, w);
    }
}

struct Ritz {
    value: f64,
    largest: f64,
    residual: f64,
    gap: f64,
    ghosts: usize,
    found: bool,
}

fn ritz(alpha: &[f64], beta: &[f64], which: Which, zero_threshold: f64) -> Ritz {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let largest = values[k - 1].max(0.0);
    let beta_last = beta.get(k - 1).copied().unwrap_or(0.0).abs();
    let pick = match which {
        Which::Largest => Some(k - 1),
        Which::SmallestNonzero => values.iter().position(|&v| v > zero_threshold * largest),
    };
    let ghosts = match which {
        Which::Largest => 0,
        Which::SmallestNonzero => pick.unwrap_or(k),
    };
    let Some(p) = pick else {
        return Ritz {
            value: 0.0,
            largest,
            residual: 0.0,
            gap: 0.0,
            ghosts,
            found: false,
        };
    };
    let col = order[p];
    let residual = beta_last * eig.eigenvectors[(k - 1, col)].abs();
    let mut gap = f64::INFINITY;
    if p > 0 {
        gap = gap.min(values[p] - values[p - 1]);
    }
    if p + 1 < k {
        gap = gap.min(values[p + 1] - values[p]);
    }
    Ritz {
        value: values[p],
        largest,
        residual,
        gap,
        ghosts,
        found: true,
    }
}

/// Extremal nonzero eigenvalue of `apply`, which must be self-adjoint and
/// positive semidefinite in the inner product `m`.
///
/// For `SmallestNonzero` without a kernel basis the start vector should lie
/// in the range of the operator; residual kernel components only produce
/// tiny Ritz values, which the zero threshold discards.
pub fn lanczos_extremal<F>(apply: F, m: &dyn InnerProduct, which: Which, opts: &LanczosOptions) -> Result<LanczosResult>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = m.dim();
    let kernel: &[Vec<f64>] = opts.kernel_basis.unwrap_or(&[]);
    check_orthonormal(kernel, m)?;

    let mut q = match opts.start {
        Some(s) => s.to_vec(),
        None => deterministic_vector(n, 7),
    };
    orthogonalize(&mut q, kernel, m);
    orthogonalize(&mut q, kernel, m);
    let q_norm = m.norm(&q);
    if q_norm == 0.0 || n == 0 {
        return Err(Error::NoNonzeroSingularValue { level: 0 });
    }
    scale(1.0 / q_norm, &mut q);

    let max_iter = opts.max_iter.unwrap_or(n).min(n).max(1);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter.min(512));
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last = None;

    for j in 0..max_iter {
        let mut w = apply(&q);
        let a = m.inner(&q, &w);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            axpy(-b, prev, &mut w);
        }
        basis.push(q);
        alpha.push(a);
        for _ in 0..2 {
            orthogonalize(&mut w, kernel, m);
            orthogonalize(&mut w, &basis, m);
        }
        let b = m.norm(&w);
        beta.push(b);

        let k = j + 1;
        let check = k <= 30 || k % 5 == 0 || k == max_iter;
        let norm_est = alpha.iter().fold(0.0_f64, |s, v| s.max(v.abs())).max(b);
        let invariant = b <= 1e-13 * norm_est.max(f64::MIN_POSITIVE);
        if check || invariant {
            let r = ritz(&alpha, &beta, which, opts.zero_threshold);
            let err = if r.gap.is_finite() && r.gap > 0.0 {
                r.residual.min(r.residual * r.residual / r.gap)
            } else {
                r.residual
            };
            let done = invariant || (r.found && err <= opts.tol * r.value.abs());
            let result = LanczosResult {
                value: r.value,
                largest: r.largest,
                iterations: k,
                residual_estimate: if invariant { 0.0 } else { r.residual },
                converged: done && r.found,
                ghosts: r.ghosts,
            };
            if done {
                if !r.found {
                    return Err(Error::NoNonzeroSingularValue { level: 0 });
                }
                return Ok(result);
            }
            last = Some(result);
        }
        if invariant {
            break;
        }
        q = w;
        scale(1.0 / b, &mut q);
    }

    match last {
        Some(r) if r.value > 0.0 => Err(Error::NonConvergence {
            method: "lanczos",
            iterations: r.iterations,
            residual: r.residual_estimate,
        }),
        _ => Err(Error::NoNonzeroSingularValue { level: 0 }),
    }
}
