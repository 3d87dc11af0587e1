//! Mixed formulations of the two potential problems, solved by MINRES.
//!
//! f-part: find `y ∈ Hₗ₊₁` with `AₗAₗ* y = f` and `y ⟂ N(Aₗ*)`. The
//! constraint space `N(Aₗ*) = R(Aₗ₊₁*) ⊕ Kₗ₊₁` is parameterized by a
//! multiplier `v ∈ Hₗ₊₂` and coefficients `κ` over a basis of `Kₗ₊₁`:
//!
//! ```text
//! [ AₗAₗ*   Aₗ₊₁*  Θ ] [y]   [f]
//! [ Aₗ₊₁    0      0 ] [v] = [0]
//! [ Θ*      0      0 ] [κ]   [0]
//! ```
//!
//! The augmented form drops the `κ` block and needs `Kₗ₊₁ = 0`. The g-part
//! mirrors this with `Aₗ₋₁*Aₗ₋₁`, `Aₗ₋₂` and `Kₗ₋₁`.

use serde::{Deserialize, Serialize};

use crate::complex::HilbertComplex;
use crate::error::{Error, Result};
use crate::linalg::vector::axpy;
use crate::linalg::{minres, BlockInnerProduct, InnerProduct, IterStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SaddlePart {
    F,
    G,
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleSolution {
    pub part: SaddlePart,
    pub augmented: bool,
    /// `y_f` or `z_g`.
    #[serde(skip)]
    pub potential: Vec<f64>,
    /// `v_f ∈ Hₗ₊₂` or `w_g ∈ Hₗ₋₂`.
    #[serde(skip)]
    pub multiplier: Vec<f64>,
    #[serde(skip)]
    pub kernel_multiplier: Vec<f64>,
    /// `x_f = Aₗ* y_f` or `x_g = Aₗ₋₁ z_g`.
    #[serde(skip)]
    pub field: Vec<f64>,
    /// `(‖v‖² + |κ|²)^½`
    pub multiplier_norm: f64,
    /// `‖Aₗ₊₁* v + Θκ‖` (f-part) or `‖Aₗ₋₂ w + Θκ‖` (g-part).
    pub multiplier_image_norm: f64,
    pub stats: IterStats,
}

/// Solves one mixed potential problem at `level`.
pub fn solve_saddle(
    c: &HilbertComplex,
    level: usize,
    part: SaddlePart,
    rhs: &[f64],
    augmented: bool,
    tol: f64,
) -> Result<SaddleSolution> {
    c.check_level(level)?;
    let l = level as isize;
    // Potential level p, constraint level q, and the operators as closures.
    let (p, q) = match part {
        SaddlePart::F => (l + 1, l + 2),
        SaddlePart::G => (l - 1, l - 2),
    };
    let np = c.dim(p);
    if rhs.len() != np {
        return Err(Error::DimensionMismatch {
            context: "saddle right-hand side",
            expected: np,
            found: rhs.len(),
        });
    }
    if np == 0 {
        return Ok(SaddleSolution {
            part,
            augmented,
            potential: Vec::new(),
            multiplier: Vec::new(),
            kernel_multiplier: Vec::new(),
            field: vec![0.0; c.dim(l)],
            multiplier_norm: 0.0,
            multiplier_image_norm: 0.0,
            stats: IterStats::trivial(),
        });
    }
    let nq = c.dim(q);
    let kernel = c.cohomology(p as usize)?;
    if augmented && kernel.dim > 0 {
        return Err(Error::NontrivialCohomology {
            level: p as usize,
            dim: kernel.dim,
        });
    }
    let theta: &[Vec<f64>] = if augmented { &[] } else { &kernel.vectors };
    let nk = theta.len();
    let mp = c.gram(p);

    let main = |y: &[f64]| -> Vec<f64> {
        match part {
            SaddlePart::F => c.apply_op(l, &c.apply_adjoint(l, y)),
            SaddlePart::G => c.apply_adjoint(l - 1, &c.apply_op(l - 1, y)),
        }
    };
    // Constraint B: Hₚ → H_q and its adjoint.
    let constraint = |y: &[f64]| -> Vec<f64> {
        match part {
            SaddlePart::F => c.apply_op(p, y),
            SaddlePart::G => c.apply_adjoint(q, y),
        }
    };
    let constraint_adj = |v: &[f64]| -> Vec<f64> {
        match part {
            SaddlePart::F => c.apply_adjoint(p, v),
            SaddlePart::G => c.apply_op(q, v),
        }
    };

    let n = np + nq + nk;
    let apply = |u: &[f64]| -> Vec<f64> {
        let (y, rest) = u.split_at(np);
        let (v, kappa) = rest.split_at(nq);
        let mut top = main(y);
        if nq > 0 {
            for (t, b) in top.iter_mut().zip(constraint_adj(v)) {
                *t += b;
            }
        }
        for (kc, th) in kappa.iter().zip(theta) {
            axpy(*kc, th, &mut top);
        }
        let mut out = top;
        if nq > 0 {
            out.extend(constraint(y));
        }
        out.extend(theta.iter().map(|th| mp.inner(th, y)));
        out
    };

    let inner = BlockInnerProduct::new(vec![(np, Some(mp)), (nq, Some(c.gram(q))), (nk, None)]);
    let mut b = rhs.to_vec();
    b.resize(n, 0.0);
    let (u, stats) = minres(apply, &inner, &b, tol, 20 * n + 100);
    if !(stats.converged || stats.final_residual <= 1e3 * tol) {
        return Err(Error::NonConvergence {
            method: "minres (saddle)",
            iterations: stats.iterations,
            residual: stats.final_residual,
        });
    }
    let potential = u[..np].to_vec();
    let multiplier = u[np..np + nq].to_vec();
    let kernel_multiplier = u[np + nq..].to_vec();

    let mut image = if nq > 0 { constraint_adj(&multiplier) } else { vec![0.0; np] };
    for (kc, th) in kernel_multiplier.iter().zip(theta) {
        axpy(*kc, th, &mut image);
    }
    let kappa_sq: f64 = kernel_multiplier.iter().map(|k| k * k).sum();
    let multiplier_norm = (c.gram(q).inner(&multiplier, &multiplier) + kappa_sq).sqrt();
    let field = match part {
        SaddlePart::F => c.apply_adjoint(l, &potential),
        SaddlePart::G => c.apply_op(l - 1, &potential),
    };
    Ok(SaddleSolution {
        part,
        augmented,
        potential,
        multiplier,
        kernel_multiplier,
        field,
        multiplier_norm,
        multiplier_image_norm: mp.norm(&image),
        stats,
    })
}
