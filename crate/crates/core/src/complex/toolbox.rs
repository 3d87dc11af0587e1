//! Range projectors, the refined Helmholtz decomposition and cohomology.

use serde::{Deserialize, Serialize};

use super::{dense_slice, HilbertComplex, PROJECTION_TOL};
use crate::error::{Error, Result};
use crate::linalg::vector::{axpy, deterministic_vector, scale, sub};
use crate::linalg::{cg, CgOptions, InnerProduct, IterStats, DEFAULT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangeSide {
    /// `R(Aₗ₋₁)`
    PrevRange,
    /// `R(Aₗ*)`
    AdjRange,
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub p: Vec<f64>,
    /// Potential with `p = Aₗ₋₁ z` or `p = Aₗ* z`.
    pub potential: Vec<f64>,
    pub stats: IterStats,
}

#[derive(Debug, Clone)]
pub struct Helmholtz {
    pub prev: Vec<f64>,
    pub kernel: Vec<f64>,
    pub adj: Vec<f64>,
    pub stats: [IterStats; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CohomologyMethod {
    Dense,
    Projection,
}

/// M-orthonormal basis of `Kₗ = N(Aₗ) ∩ N(Aₗ₋₁*)`.
#[derive(Debug, Clone, Serialize)]
pub struct CohomologyBasis {
    pub level: usize,
    pub vectors: Vec<Vec<f64>>,
    pub dim: usize,
    pub method: CohomologyMethod,
}

/// Consecutive dependent candidates after which the projection-based
/// cohomology search stops.
const DEPENDENT_STOP: usize = 2;
const DEPENDENT_REL: f64 = 1e-6;

fn subsolve_ok(stats: &IterStats, tol: f64) -> bool {
    stats.converged || stats.final_residual <= 1e3 * tol
}

impl HilbertComplex {
    /// Orthogonal projection of `x ∈ Hₗ` onto `R(Aₗ₋₁)` or `R(Aₗ*)` via the
    /// normal equations of the reduced operator.
    pub fn project_range(&self, side: RangeSide, level: usize, x: &[f64], tol: f64) -> Result<Projection> {
        self.project_range_from(side, level, x, tol, None)
    }

    pub(crate) fn project_range_from(
        &self,
        side: RangeSide,
        level: usize,
        x: &[f64],
        tol: f64,
        x0: Option<&[f64]>,
    ) -> Result<Projection> {
        self.check_level(level)?;
        let l = level as isize;
        if x.len() != self.dim(l) {
            return Err(Error::DimensionMismatch {
                context: "project_range input",
                expected: self.dim(l),
                found: x.len(),
            });
        }
        let (op_level, zero) = match side {
            RangeSide::PrevRange => (l - 1, self.is_zero_op(l - 1)),
            RangeSide::AdjRange => (l, self.is_zero_op(l)),
        };
        if zero {
            let pot_dim = match side {
                RangeSide::PrevRange => self.dim(l - 1),
                RangeSide::AdjRange => self.dim(l + 1),
            };
            return Ok(Projection {
                p: vec![0.0; x.len()],
                potential: vec![0.0; pot_dim],
                stats: IterStats::trivial(),
            });
        }
        let opts = CgOptions {
            tol,
            x0,
            ..CgOptions::default()
        };
        let (potential, stats, p) = match side {
            RangeSide::PrevRange => {
                let rhs = self.apply_adjoint(op_level, x);
                let (z, st) = cg(
                    |v: &[f64]| self.apply_adjoint(op_level, &self.apply_op(op_level, v)),
                    self.gram(op_level),
                    &rhs,
                    &opts,
                );
                let p = self.apply_op(op_level, &z);
                (z, st, p)
            }
            RangeSide::AdjRange => {
                let rhs = self.apply_op(op_level, x);
                let (y, st) = cg(
                    |v: &[f64]| self.apply_op(op_level, &self.apply_adjoint(op_level, v)),
                    self.gram(op_level + 1),
                    &rhs,
                    &opts,
                );
                let p = self.apply_adjoint(op_level, &y);
                (y, st, p)
            }
        };
        if !subsolve_ok(&stats, tol) && !self.roundoff_rhs(side, op_level, x, &stats, tol) {
            return Err(Error::NonConvergence {
                method: "cg (projection)",
                iterations: stats.iterations,
                residual: stats.final_residual,
            });
        }
        Ok(Projection { p, potential, stats })
    }

    /// A right-hand side `Ax` or `A*x` that is roundoff relative to
    /// `‖A‖‖x‖` need not be consistent, so CG can stall on it; the
    /// projection is then zero to working accuracy.
    fn roundoff_rhs(&self, side: RangeSide, op_level: isize, x: &[f64], stats: &IterStats, tol: f64) -> bool {
        let (m_in, m_out) = (self.gram(op_level), self.gram(op_level + 1));
        let mut v = deterministic_vector(self.dim(op_level), 29);
        let mut sigma = 0.0;
        for _ in 0..30 {
            let nv = m_in.norm(&v);
            if nv == 0.0 {
                return false;
            }
            scale(1.0 / nv, &mut v);
            let av = self.apply_op(op_level, &v);
            sigma = m_out.norm(&av);
            v = self.apply_adjoint(op_level, &av);
        }
        let (x_norm, rhs) = match side {
            RangeSide::PrevRange => (m_out.norm(x), m_in.norm(&self.apply_adjoint(op_level, x))),
            RangeSide::AdjRange => (m_in.norm(x), m_out.norm(&self.apply_op(op_level, x))),
        };
        rhs * stats.final_residual <= 1e3 * tol * sigma * x_norm
    }

    /// `x = x_prev + x_K + x_adj` with `x_prev ∈ R(Aₗ₋₁)`, `x_K ∈ Kₗ`,
    /// `x_adj ∈ R(Aₗ*)`.
    pub fn helmholtz_decompose(&self, level: usize, x: &[f64], tol: f64) -> Result<Helmholtz> {
        let prev = self.project_range(RangeSide::PrevRange, level, x, tol)?;
        let adj = self.project_range(RangeSide::AdjRange, level, x, tol)?;
        let mut kernel = sub(x, &prev.p);
        axpy(-1.0, &adj.p, &mut kernel);
        Ok(Helmholtz {
            prev: prev.p,
            kernel,
            adj: adj.p,
            stats: [prev.stats, adj.stats],
        })
    }

    /// `πₗ x = x − π_{Aₗ₋₁} x − π_{Aₗ*} x`, or the exact basis expansion when
    /// the basis is at hand.
    pub fn project_cohomology(&self, level: usize, x: &[f64]) -> Result<Vec<f64>> {
        let basis = self.cohomology(level)?;
        let m = self.gram(level as isize);
        let mut out = vec![0.0; x.len()];
        for q in &basis.vectors {
            axpy(m.inner(q, x), q, &mut out);
        }
        Ok(out)
    }

    /// Cached cohomology basis at the default tolerance and cap.
    pub fn cohomology(&self, level: usize) -> Result<&CohomologyBasis> {
        self.check_level(level)?;
        if let Some(b) = self.cohomology_cache(level).get() {
            return Ok(b);
        }
        let basis = self.cohomology_basis(level, PROJECTION_TOL, DEFAULT_CAP)?;
        Ok(self.cohomology_cache(level).get_or_init(|| basis))
    }

    /// Dense null space of the stacked operator `[Aₗ; Aₗ₋₁*]` when the slice
    /// is under `cap`, projection of deterministic probes otherwise.
    pub fn cohomology_basis(&self, level: usize, tol: f64, cap: usize) -> Result<CohomologyBasis> {
        self.check_level(level)?;
        let l = level as isize;
        let slice_dim = self.dim(l - 1) + self.dim(l) + self.dim(l + 1);
        let (vectors, method) = if slice_dim <= cap {
            (dense_slice(self, level, cap)?.cohomology_basis(), CohomologyMethod::Dense)
        } else {
            (self.cohomology_by_projection(level, tol)?, CohomologyMethod::Projection)
        };
        let vectors = self.orthonormalize(level, vectors);
        let basis = CohomologyBasis {
            level,
            dim: vectors.len(),
            vectors,
            method,
        };
        self.check_cohomology(&basis)?;
        Ok(basis)
    }

    fn cohomology_by_projection(&self, level: usize, tol: f64) -> Result<Vec<Vec<f64>>> {
        let n = self.dim(level as isize);
        let m = self.gram(level as isize);
        let mut found: Vec<Vec<f64>> = Vec::new();
        let mut dependent = 0;
        let mut salt = 0u64;
        while dependent < DEPENDENT_STOP && found.len() < n {
            let v = deterministic_vector(n, 1000 + salt);
            salt += 1;
            let h = self.helmholtz_decompose(level, &v, tol)?;
            let mut k = h.kernel;
            let k_norm = m.norm(&k).max(f64::MIN_POSITIVE);
            for _ in 0..2 {
                for q in &found {
                    let c = m.inner(q, &k);
                    axpy(-c, q, &mut k);
                }
            }
            let rest = m.norm(&k);
            // Projection error is ~tol·‖v‖; anything at that level is noise.
            if rest <= DEPENDENT_REL * m.norm(&v) || rest <= DEPENDENT_REL * k_norm {
                dependent += 1;
                continue;
            }
            dependent = 0;
            scale(1.0 / rest, &mut k);
            found.push(k);
        }
        Ok(found)
    }

    /// Modified Gram–Schmidt in the M-inner product, input order.
    pub(crate) fn orthonormalize(&self, level: usize, vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let m = self.gram(level as isize);
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
        for mut v in vectors {
            for _ in 0..2 {
                for q in &out {
                    let c = m.inner(q, &v);
                    axpy(-c, q, &mut v);
                }
            }
            let nv = m.norm(&v);
            if nv > 1e-8 {
                scale(1.0 / nv, &mut v);
                out.push(v);
            }
        }
        out
    }

    fn check_cohomology(&self, basis: &CohomologyBasis) -> Result<()> {
        let l = basis.level as isize;
        let m = self.gram(l);
        let mut worst = 0.0_f64;
        for (i, u) in basis.vectors.iter().enumerate() {
            for (j, v) in basis.vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((m.inner(u, v) - target).abs());
            }
        }
        if worst > 1e-10 {
            return Err(Error::KernelNotOrthonormal(worst));
        }
        Ok(())
    }

    /// `(‖Aₗ v‖, ‖Aₗ₋₁* v‖)` for a would-be harmonic field.
    pub fn harmonic_defect(&self, level: usize, v: &[f64]) -> (f64, f64) {
        let l = level as isize;
        let a = self.apply_op(l, v);
        let b = self.apply_adjoint(l - 1, v);
        (self.gram(l + 1).norm(&a), self.gram(l - 1).norm(&b))
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::cycle;
    use super::*;
    use crate::linalg::vector::dot;

    #[test]
    fn cycle_one_forms_have_one_harmonic_field() {
        let c = cycle(5);
        let basis = c.cohomology(1).unwrap();
        assert_eq!(basis.dim, 1);
        let v = &basis.vectors[0];
        for w in v {
            assert!((w.abs() - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        }
        let (a, b) = c.harmonic_defect(1, v);
        assert!(a < 1e-12 && b < 1e-12);
    }

    #[test]
    fn projection_route_matches_dense_route() {
        let c = cycle(7);
        let dense = c.cohomology_basis(1, 1e-12, 10_000).unwrap();
        let proj = c.cohomology_basis(1, 1e-12, 0).unwrap();
        assert_eq!(dense.method, CohomologyMethod::Dense);
        assert_eq!(proj.method, CohomologyMethod::Projection);
        assert_eq!(dense.dim, proj.dim);
        let overlap = dot(&dense.vectors[0], &proj.vectors[0]).abs();
        assert!((overlap - 1.0).abs() < 1e-10);
        let nodes = c.cohomology_basis(0, 1e-12, 0).unwrap();
        assert_eq!(nodes.dim, 1);
    }

    #[test]
    fn all_ones_edge_field_is_harmonic_on_cycle() {
        let c = cycle(5);
        let h = c.helmholtz_decompose(1, &[1.0; 5], 1e-12).unwrap();
        assert!(h.prev.iter().all(|v| v.abs() < 1e-10));
        assert!(h.adj.iter().all(|v| v.abs() < 1e-10));
        assert!(h.kernel.iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn range_elements_project_to_themselves() {
        let c = cycle(6);
        let w = deterministic_vector(6, 3);
        let x = c.apply_op(0, &w);
        let p = c.project_range(RangeSide::PrevRange, 1, &x, 1e-12).unwrap();
        for (a, b) in p.p.iter().zip(&x) {
            assert!((a - b).abs() < 1e-10);
        }
        let q = c.project_range(RangeSide::AdjRange, 1, &x, 1e-12).unwrap();
        assert!(q.p.iter().all(|v| v.abs() < 1e-14));
    }
}
