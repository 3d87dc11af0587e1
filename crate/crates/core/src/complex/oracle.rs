//! Dense SVD ground truth around one level of a complex.

use nalgebra::{DMatrix, DVector};

use super::HilbertComplex;
use crate::error::Result;
use crate::linalg::dense::{check_cap, from_weighted, project_onto, to_weighted, weighted_matrix, DenseSvd};

/// SVDs of `Aₗ₋₁` and `Aₗ` in M-orthonormal coordinates.
#[derive(Debug, Clone)]
pub struct DenseSlice<'a> {
    complex: &'a HilbertComplex,
    pub level: usize,
    /// SVD of `Âₗ₋₁`.
    pub prev: DenseSvd,
    /// SVD of `Âₗ`.
    pub next: DenseSvd,
    prev_matrix: DMatrix<f64>,
    next_matrix: DMatrix<f64>,
}

pub fn dense_slice(complex: &HilbertComplex, level: usize, cap: usize) -> Result<DenseSlice<'_>> {
    complex.check_level(level)?;
    let l = level as isize;
    check_cap(complex.dim(l - 1) + complex.dim(l) + complex.dim(l + 1), cap)?;
    let weighted = |k: isize| {
        let a = complex.op_or_zero(k);
        weighted_matrix(&a, complex.gram(k), complex.gram(k + 1))
    };
    let prev_matrix = weighted(l - 1);
    let next_matrix = weighted(l);
    Ok(DenseSlice {
        complex,
        level,
        prev: DenseSvd::new(&prev_matrix),
        next: DenseSvd::new(&next_matrix),
        prev_matrix,
        next_matrix,
    })
}

impl DenseSlice<'_> {
    fn l(&self) -> isize {
        self.level as isize
    }

    /// M-orthonormal basis of `Kₗ` from the null space of `[Âₗ; Âₗ₋₁ᵀ]`.
    pub fn cohomology_basis(&self) -> Vec<Vec<f64>> {
        let n = self.complex.dim(self.l());
        let top = self.next.rows;
        let bottom = self.prev.cols;
        let mut stacked = DMatrix::zeros(top + bottom, n);
        if top > 0 {
            stacked.view_mut((0, 0), (top, n)).copy_from(&self.next_matrix);
        }
        if bottom > 0 {
            stacked.view_mut((top, 0), (bottom, n)).copy_from(&self.prev_matrix.transpose());
        }
        let ns = DenseSvd::new(&stacked).null_space();
        let m = self.complex.gram(self.l());
        (0..ns.ncols())
            .map(|j| from_weighted(m, &ns.column(j).into_owned()))
            .collect()
    }

    pub fn cohomology_dim(&self) -> usize {
        self.cohomology_basis().len()
    }

    /// `dim N(Aₗ)`.
    pub fn kernel_dim(&self) -> usize {
        self.next.nullity()
    }

    /// `1/σ_min⁺(Âₗ)`, or `None` if `Aₗ` vanishes numerically.
    pub fn poincare_constant(&self) -> Option<f64> {
        self.next.smallest_nonzero().map(|s| 1.0 / s)
    }

    /// Orthogonal projection onto `R(Aₗ₋₁)`.
    pub fn project_prev(&self, x: &[f64]) -> Vec<f64> {
        let m = self.complex.gram(self.l());
        from_weighted(m, &project_onto(&self.prev.range_basis(), &to_weighted(m, x)))
    }

    /// Orthogonal projection onto `R(Aₗ*)`.
    pub fn project_adj(&self, x: &[f64]) -> Vec<f64> {
        let m = self.complex.gram(self.l());
        from_weighted(m, &project_onto(&self.next.row_range_basis(), &to_weighted(m, x)))
    }

    /// Minimum-norm `x ∈ Hₗ` with `Aₗ x = f` (least squares if `f ∉ R(Aₗ)`).
    pub fn solve_next(&self, f: &[f64]) -> Vec<f64> {
        let m_out = self.complex.gram(self.l() + 1);
        let m = self.complex.gram(self.l());
        from_weighted(m, &self.next.pinv_apply(&to_weighted(m_out, f)))
    }

    /// Minimum-norm `x ∈ Hₗ` with `Aₗ₋₁* x = g`.
    pub fn solve_prev_adjoint(&self, g: &[f64]) -> Vec<f64> {
        let m_in = self.complex.gram(self.l() - 1);
        let m = self.complex.gram(self.l());
        let gh = to_weighted(m_in, g);
        let svd = &self.prev;
        let mut out = DVector::zeros(svd.rows);
        for i in 0..svd.rank() {
            let c = svd.v.column(i).dot(&gh) / svd.singular_values[i];
            out.axpy(c, &svd.u.column(i), 1.0);
        }
        from_weighted(m, &out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::cycle;
    use super::*;
    use crate::linalg::vector::deterministic_vector;

    #[test]
    fn cycle_slice() {
        let c = cycle(5);
        let s = dense_slice(&c, 1, 100).unwrap();
        assert_eq!(s.cohomology_dim(), 1);
        assert_eq!(s.kernel_dim(), 5);
        let s0 = dense_slice(&c, 0, 100).unwrap();
        assert_eq!(s0.kernel_dim(), 1);
        assert_eq!(s0.next.rank(), 4);
    }

    #[test]
    fn dense_projections_match_iterative() {
        let c = cycle(6);
        let s = dense_slice(&c, 1, 100).unwrap();
        let x = deterministic_vector(6, 9);
        let h = c.helmholtz_decompose(1, &x, 1e-13).unwrap();
        let p = s.project_prev(&x);
        for (a, b) in p.iter().zip(&h.prev) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(s.project_adj(&x).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn cap_is_respected() {
        let c = cycle(5);
        assert!(dense_slice(&c, 1, 5).is_err());
    }
}
