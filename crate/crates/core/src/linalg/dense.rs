//! Dense SVD ground truth for small instances.

use nalgebra::{DMatrix, DVector};

use super::gram::GramOperator;
use super::sparse::SparseOperator;
use crate::error::{Error, Result};

pub const DEFAULT_CAP: usize = 2000;

/// A singular value counts as zero when `σ ≤ KERNEL_THRESHOLD · σ_max`.
pub const KERNEL_THRESHOLD: f64 = 1e-10;

pub fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        return Err(Error::CapExceeded { dim, cap });
    }
    Ok(())
}

/// Matrix of `A: (Rⁿ, M_in) → (Rᵐ, M_out)` in M-orthonormal coordinates,
/// `Â = L_outᵀ A L_in⁻ᵀ` with `M = L Lᵀ`.
pub fn weighted_matrix(a: &SparseOperator, m_in: &GramOperator, m_out: &GramOperator) -> DMatrix<f64> {
    let dense = a.to_dense();
    let l_out = m_out.dense_factor();
    let left = l_out.transpose() * dense;
    match m_in.as_diagonal() {
        Some(d) => {
            let mut out = left;
            for (j, w) in d.iter().enumerate() {
                let s = 1.0 / w.sqrt();
                out.column_mut(j).scale_mut(s);
            }
            out
        }
        None => {
            // X L_inᵀ = left  ⇔  L_in Xᵀ = leftᵀ
            let l_in = m_in.dense_factor();
            let xt = l_in
                .solve_lower_triangular(&left.transpose())
                .expect("cholesky factor is nonsingular");
            xt.transpose()
        }
    }
}

/// Maps M-orthonormal coordinates back to coefficients: `x = L⁻ᵀ x̂`.
pub fn from_weighted(m: &GramOperator, xh: &DVector<f64>) -> Vec<f64> {
    match m.as_diagonal() {
        Some(d) => xh.iter().zip(d).map(|(v, w)| v / w.sqrt()).collect(),
        None => m
            .dense_factor()
            .transpose()
            .solve_upper_triangular(xh)
            .expect("cholesky factor is nonsingular")
            .as_slice()
            .to_vec(),
    }
}

/// Coefficients to M-orthonormal coordinates: `x̂ = Lᵀ x`.
pub fn to_weighted(m: &GramOperator, x: &[f64]) -> DVector<f64> {
    match m.as_diagonal() {
        Some(d) => DVector::from_iterator(x.len(), x.iter().zip(d).map(|(v, w)| v * w.sqrt())),
        None => m.dense_factor().transpose() * DVector::from_column_slice(x),
    }
}

/// Full SVD with a complete right singular basis.
#[derive(Debug, Clone)]
pub struct DenseSvd {
    pub rows: usize,
    pub cols: usize,
    /// Descending; length `min(rows, cols)`.
    pub singular_values: Vec<f64>,
    /// `rows × min(rows, cols)` left singular vectors, in the same order.
    pub u: DMatrix<f64>,
    /// `cols × cols` right singular vectors; columns beyond the rank span
    /// the null space.
    pub v: DMatrix<f64>,
}

impl DenseSvd {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Self {
                rows: m,
                cols: n,
                singular_values: Vec::new(),
                u: DMatrix::zeros(m, 0),
                v: DMatrix::identity(n, n),
            };
        }
        if m >= n {
            let svd = a.clone().svd(true, true);
            let u = svd.u.expect("requested u");
            let v = svd.v_t.expect("requested v_t").transpose();
            return Self::sorted(m, n, svd.singular_values.as_slice(), &u, &v);
        }
        // Wide: Âᵀ = V Σ Uᵀ gives U in full and the leading m columns of V;
        // the rest of V spans the complement of those columns.
        let svd = a.transpose().svd(true, true);
        let u = svd.v_t.expect("requested v_t").transpose();
        let v_thin = svd.u.expect("requested u");
        let projector = DMatrix::identity(n, n) - &v_thin * v_thin.transpose();
        let eig = nalgebra::SymmetricEigen::new(projector);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let mut v = DMatrix::zeros(n, n);
        v.view_mut((0, 0), (n, m)).copy_from(&v_thin);
        for (k, &i) in idx.iter().take(n - m).enumerate() {
            v.set_column(m + k, &eig.eigenvectors.column(i));
        }
        let mut sv = svd.singular_values.as_slice().to_vec();
        sv.resize(n, -1.0);
        Self::sorted(m, n, &sv, &u, &v)
    }

    /// Orders singular triplets by decreasing value. `sv` may carry
    /// sentinel `-1` entries for null-space columns of `v` beyond `min(m, n)`.
    fn sorted(m: usize, n: usize, sv: &[f64], u: &DMatrix<f64>, v: &DMatrix<f64>) -> Self {
        let k = m.min(n);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]));
        let singular_values: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
        let mut uu = DMatrix::zeros(m, k);
        let mut vv = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            uu.set_column(dst, &u.column(src));
            vv.set_column(dst, &v.column(src));
        }
        for j in k..n {
            vv.set_column(j, &v.column(j));
        }
        Self {
            rows: m,
            cols: n,
            singular_values,
            u: uu,
            v: vv,
        }
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn rank(&self) -> usize {
        let thr = KERNEL_THRESHOLD * self.sigma_max();
        if self.sigma_max() == 0.0 {
            return 0;
        }
        self.singular_values.iter().filter(|&&s| s > thr).count()
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    /// Smallest singular value above the kernel threshold.
    pub fn smallest_nonzero(&self) -> Option<f64> {
        let r = self.rank();
        (r > 0).then(|| self.singular_values[r - 1])
    }

    /// Orthonormal basis of N(Â) as columns.
    pub fn null_space(&self) -> DMatrix<f64> {
        let r = self.rank();
        self.v.columns(r, self.cols - r).into_owned()
    }

    /// Orthonormal basis of R(Â).
    pub fn range_basis(&self) -> DMatrix<f64> {
        self.u.columns(0, self.rank()).into_owned()
    }

    /// Orthonormal basis of R(Âᵀ).
    pub fn row_range_basis(&self) -> DMatrix<f64> {
        self.v.columns(0, self.rank()).into_owned()
    }

    /// Minimum-norm least-squares solution `Â⁺ b`.
    pub fn pinv_apply(&self, b: &DVector<f64>) -> DVector<f64> {
        let r = self.rank();
        let mut out = DVector::zeros(self.cols);
        for i in 0..r {
            let c = self.u.column(i).dot(b) / self.singular_values[i];
            out.axpy(c, &self.v.column(i), 1.0);
        }
        out
    }
}

/// Orthogonal projection onto the span of the orthonormal columns of `q`.
pub fn project_onto(q: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return DVector::zeros(x.len());
    }
    q * (q.transpose() * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_grad(nodes: usize) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(nodes - 1, nodes);
        for e in 0..nodes - 1 {
            g[(e, e)] = -1.0;
            g[(e, e + 1)] = 1.0;
        }
        g
    }

    #[test]
    fn wide_factors_are_exact() {
        // Clustered singular values of a wide operator: the range basis
        // must stay inside the column space and V must stay orthogonal.
        let mut a = DMatrix::zeros(6, 12);
        for i in 0..6 {
            a[(i, 2 * i)] = 1.0;
            a[(i, 2 * i + 1)] = -1.0;
            a[(i, (2 * i + 2) % 12)] = 1.0;
        }
        let svd = DenseSvd::new(&a);
        let v = &svd.v;
        assert!((v.transpose() * v - DMatrix::identity(12, 12)).amax() < 1e-12);
        let ns = svd.null_space();
        assert_eq!(ns.ncols(), 12 - svd.rank());
        assert!((&a * &ns).amax() < 1e-12);
        let r = svd.range_basis();
        let mut rebuilt = DMatrix::zeros(6, 12);
        for i in 0..svd.rank() {
            rebuilt += r.column(i) * svd.singular_values[i] * v.column(i).transpose();
        }
        assert!((rebuilt - &a).amax() < 1e-12);
    }

    #[test]
    fn path_gradient_null_space_is_constants() {
        let svd = DenseSvd::new(&path_grad(4));
        let ns = svd.null_space();
        assert_eq!(ns.ncols(), 1);
        let c = ns.column(0);
        for i in 1..4 {
            assert!((c[i] - c[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn cycle_gradient_rank_four() {
        let mut g = DMatrix::zeros(5, 5);
        for e in 0..5 {
            g[(e, e)] = -1.0;
            g[(e, (e + 1) % 5)] = 1.0;
        }
        let svd = DenseSvd::new(&g);
        assert_eq!(svd.rank(), 4);
        assert!(svd.singular_values[4] < 1e-12);
    }

    #[test]
    fn zero_operator_has_zero_spectrum() {
        let svd = DenseSvd::new(&DMatrix::zeros(3, 2));
        assert!(svd.singular_values.iter().all(|&s| s == 0.0));
        assert_eq!(svd.rank(), 0);
        assert_eq!(svd.nullity(), 2);
    }

    #[test]
    fn pinv_matches_nalgebra_pseudo_inverse() {
        let a = path_grad(5);
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let x = DenseSvd::new(&a).pinv_apply(&b);
        let y = a.clone().pseudo_inverse(1e-12).unwrap() * &b;
        assert!((x - y).amax() < 1e-12);
    }

    #[test]
    fn weighted_matrix_diagonal_and_general_agree() {
        let a = SparseOperator::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, -1.0), (1, 1, 2.0)]).unwrap();
        let m_in = GramOperator::diagonal(vec![4.0, 9.0]).unwrap();
        let m_in_general = GramOperator::general(SparseOperator::from_diagonal(&[4.0, 9.0])).unwrap();
        let m_out = GramOperator::diagonal(vec![1.0, 0.25]).unwrap();
        let w1 = weighted_matrix(&a, &m_in, &m_out);
        let w2 = weighted_matrix(&a, &m_in_general, &m_out);
        assert!((w1 - w2).amax() < 1e-14);
    }

    #[test]
    fn weighted_roundtrip() {
        let m = GramOperator::general(
            SparseOperator::from_triplets(2, 2, &[(0, 0, 2.0), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 1.0)]).unwrap(),
        )
        .unwrap();
        let x = vec![0.3, -1.2];
        let back = from_weighted(&m, &to_weighted(&m, &x));
        assert!((back[0] - x[0]).abs() < 1e-14 && (back[1] - x[1]).abs() < 1e-14);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(check_cap(2000, DEFAULT_CAP).is_ok());
        assert!(matches!(check_cap(2001, DEFAULT_CAP), Err(Error::CapExceeded { .. })));
    }
}
