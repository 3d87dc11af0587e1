//! Gram (mass / weight) operators defining the inner product of a space.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::sparse::SparseOperator;
use super::vector::dot;
use crate::error::{Error, Result};

/// Anything that can serve as the inner product `⟨u, v⟩ = uᵀ M v` of a
/// coefficient space.
pub trait InnerProduct {
    fn dim(&self) -> usize;
    fn inner(&self, u: &[f64], v: &[f64]) -> f64;

    fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).max(0.0).sqrt()
    }
}

/// Symmetric positive definite Gram operator.
#[derive(Debug, Clone)]
pub enum GramOperator {
    /// Lumped weights, one positive entry per degree of freedom.
    Diagonal(Vec<f64>),
    /// General SPD matrix, applied through a dense Cholesky factor.
    General(GeneralGram),
}

#[derive(Debug, Clone)]
pub struct GeneralGram {
    matrix: SparseOperator,
    factor: Cholesky<f64, Dyn>,
}

impl GeneralGram {
    pub fn matrix(&self) -> &SparseOperator {
        &self.matrix
    }
}

impl GramOperator {
    pub fn identity(n: usize) -> Self {
        Self::Diagonal(vec![1.0; n])
    }

    pub fn diagonal(weights: Vec<f64>) -> Result<Self> {
        if let Some((i, w)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::NotPositiveDefinite(format!("diagonal entry {i} is {w}")));
        }
        Ok(Self::Diagonal(weights))
    }

    /// Factorizes a general SPD matrix; failure of the factorization is the
    /// SPD check.
    pub fn general(matrix: SparseOperator) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch {
                context: "gram matrix must be square",
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let dense = matrix.to_dense();
        let asym = (&dense - dense.transpose()).amax();
        if asym > 1e-12 * dense.amax().max(f64::MIN_POSITIVE) {
            return Err(Error::NotPositiveDefinite(format!("matrix is not symmetric (deviation {asym:e})")));
        }
        let factor = Cholesky::new(dense)
            .ok_or_else(|| Error::NotPositiveDefinite("cholesky factorization failed".into()))?;
        Ok(Self::General(GeneralGram { matrix, factor }))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Diagonal(d) => d.len(),
            Self::General(g) => g.matrix.rows(),
        }
    }

    pub fn as_diagonal(&self) -> Option<&[f64]> {
        match self {
            Self::Diagonal(d) => Some(d),
            Self::General(_) => None,
        }
    }

    /// y = M x
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Diagonal(d) => x.iter().zip(d).map(|(a, w)| a * w).collect(),
            Self::General(g) => g.matrix.mul_vec(x),
        }
    }

    /// y = M⁻¹ x
    pub fn solve(&self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::Diagonal(d) => x.iter().zip(d).map(|(a, w)| a / w).collect(),
            Self::General(g) => {
                let rhs = DVector::from_column_slice(x);
                g.factor.solve(&rhs).as_slice().to_vec()
            }
        }
    }

    /// Dense lower factor `L` with `M = L Lᵀ`.
    pub fn dense_factor(&self) -> DMatrix<f64> {
        match self {
            Self::Diagonal(d) => DMatrix::from_diagonal(&DVector::from_iterator(d.len(), d.iter().map(|w| w.sqrt()))),
            Self::General(g) => g.factor.l(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Diagonal(d) => DMatrix::from_diagonal(&DVector::from_column_slice(d)),
            Self::General(g) => g.matrix.to_dense(),
        }
    }

    /// Sparse representation of the Gram matrix itself.
    pub fn to_sparse(&self) -> SparseOperator {
        match self {
            Self::Diagonal(d) => SparseOperator::from_diagonal(d),
            Self::General(g) => g.matrix.clone(),
        }
    }
}

impl InnerProduct for GramOperator {
    fn dim(&self) -> usize {
        GramOperator::dim(self)
    }

    fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        match self {
            Self::Diagonal(d) => u.iter().zip(v).zip(d).map(|((a, b), w)| a * w * b).sum(),
            Self::General(g) => dot(u, &g.matrix.mul_vec(v)),
        }
    }
}

/// Block-diagonal inner product on a product space; `None` blocks use the
/// Euclidean inner product of the given size.
pub struct BlockInnerProduct<'a> {
    blocks: Vec<(usize, Option<&'a GramOperator>)>,
}

impl<'a> BlockInnerProduct<'a> {
    pub fn new(blocks: Vec<(usize, Option<&'a GramOperator>)>) -> Self {
        Self { blocks }
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut out = vec![0];
        for (n, _) in &self.blocks {
            out.push(out.last().unwrap() + n);
        }
        out
    }
}

impl InnerProduct for BlockInnerProduct<'_> {
    fn dim(&self) -> usize {
        self.blocks.iter().map(|(n, _)| n).sum()
    }

    fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut off = 0;
        let mut acc = 0.0;
        for (n, g) in &self.blocks {
            let (a, b) = (&u[off..off + n], &v[off..off + n]);
            acc += match g {
                Some(g) => g.inner(a, b),
                None => dot(a, b),
            };
            off += n;
        }
        acc
    }
}

/// Euclidean inner product of dimension `n`.
pub struct Euclidean(pub usize);

impl InnerProduct for Euclidean {
    fn dim(&self) -> usize {
        self.0
    }

    fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        dot(u, v)
    }
}

/// `⟨u, v⟩_M = uᵀ M v`, checking dimensions.
pub fn weighted_dot(m: &GramOperator, u: &[f64], v: &[f64]) -> Result<f64> {
    let n = m.dim();
    for len in [u.len(), v.len()] {
        if len != n {
            return Err(Error::DimensionMismatch {
                context: "weighted_dot",
                expected: n,
                found: len,
            });
        }
    }
    Ok(m.inner(u, v))
}
