//! MINRES for symmetric indefinite systems in a weighted inner product.

use super::cg::IterStats;
use super::gram::InnerProduct;
use super::vector::{axpy, sub};

/// Solves `A x = b` where `A` is self-adjoint (possibly indefinite) in the
/// inner product `m`. The tolerance is relative to `‖b‖_m`.
pub fn minres<F>(apply: F, m: &dyn InnerProduct, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, IterStats)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let beta1 = m.norm(b);
    if beta1 == 0.0 {
        return (x, IterStats::trivial());
    }

    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut y = b.to_vec();
    let mut beta = beta1;
    let mut oldb = 0.0;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut breakdown = None;
    let mut it = 0;

    while it < max_iter {
        it += 1;
        let s = 1.0 / beta;
        let v: Vec<f64> = y.iter().map(|yi| s * yi).collect();
        y = apply(&v);
        if it >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = m.inner(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        r1 = std::mem::replace(&mut r2, y.clone());
        oldb = beta;
        beta = m.norm(&r2);

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON * beta1);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let w1 = std::mem::replace(&mut w2, w.clone());
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        axpy(phi, &w, &mut x);

        if phibar <= tol * beta1 {
            break;
        }
        if beta <= f64::EPSILON * beta1 {
            // Invariant Krylov subspace; the current iterate is final.
            break;
        }
        if !beta.is_finite() {
            breakdown = Some("non-finite lanczos coefficient".to_string());
            break;
        }
    }

    let res = m.norm(&sub(b, &apply(&x))) / beta1;
    let converged = res <= tol;
    if !converged && breakdown.is_none() {
        breakdown = Some(if it >= max_iter {
            "iteration limit reached".to_string()
        } else {
            "stagnation: system may be singular and inconsistent".to_string()
        });
    }
    (
        x,
        IterStats {
            iterations: it,
            final_residual: res,
            converged,
            breakdown_reason: if converged { None } else { breakdown },
        },
    )
}
