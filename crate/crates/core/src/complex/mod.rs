//! Finite Hilbert complexes `H₀ → H₁ → … → H_L` with weighted spaces.

mod constants;
mod oracle;
mod toolbox;

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{GramOperator, SparseOperator};

pub use constants::{ConstantMethod, ConstantsReport};
pub use oracle::{dense_slice, DenseSlice};
pub use toolbox::{CohomologyBasis, CohomologyMethod, Helmholtz, Projection, RangeSide};

/// Default relative tolerance of the CG solves behind projections.
pub const PROJECTION_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct WeightedSpace {
    pub dim: usize,
    pub gram: GramOperator,
}

impl WeightedSpace {
    pub fn new(gram: GramOperator) -> Self {
        Self { dim: gram.dim(), gram }
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(GramOperator::identity(dim))
    }
}

/// Spaces `H₀ … H_L` and operators `Aₗ: Hₗ → Hₗ₊₁`. Levels outside
/// `0..=L` behave as zero-dimensional spaces joined by zero operators.
#[derive(Debug, Clone)]
pub struct HilbertComplex {
    spaces: Vec<WeightedSpace>,
    ops: Vec<SparseOperator>,
    names: Vec<Option<String>>,
    adjoints: Vec<OnceLock<SparseOperator>>,
    cohomology: Vec<OnceLock<CohomologyBasis>>,
    empty: GramOperator,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelCheck {
    /// Index ℓ of the pair `Aₗ₊₁Aₗ`.
    pub level: usize,
    pub primal_max: f64,
    pub adjoint_max: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexReport {
    pub levels: Vec<LevelCheck>,
    pub pass: bool,
}

impl ComplexReport {
    pub fn first_failure(&self) -> Option<usize> {
        self.levels.iter().find(|l| !l.pass).map(|l| l.level)
    }
}

/// Relative threshold of the complex-property check.
pub const COMPLEX_TOL: f64 = 1e-14;

impl HilbertComplex {
    pub fn new(spaces: Vec<WeightedSpace>, ops: Vec<SparseOperator>, names: Vec<Option<String>>) -> Result<Self> {
        if spaces.is_empty() {
            return Err(Error::InvalidComplex("a complex needs at least one space".into()));
        }
        if ops.len() + 1 != spaces.len() {
            return Err(Error::InvalidComplex(format!(
                "{} spaces need {} operators, got {}",
                spaces.len(),
                spaces.len() - 1,
                ops.len()
            )));
        }
        for (l, s) in spaces.iter().enumerate() {
            if s.dim != s.gram.dim() {
                return Err(Error::DimensionMismatch {
                    context: "space dimension vs gram",
                    expected: s.dim,
                    found: s.gram.dim(),
                });
            }
            if l < ops.len() {
                let a = &ops[l];
                if a.cols() != s.dim || a.rows() != spaces[l + 1].dim {
                    return Err(Error::InvalidComplex(format!(
                        "operator {l} is {}x{}, expected {}x{}",
                        a.rows(),
                        a.cols(),
                        spaces[l + 1].dim,
                        s.dim
                    )));
                }
            }
        }
        let mut names = names;
        names.resize(ops.len(), None);
        let n_ops = ops.len();
        let n_spaces = spaces.len();
        Ok(Self {
            spaces,
            ops,
            names,
            adjoints: (0..n_ops).map(|_| OnceLock::new()).collect(),
            cohomology: (0..n_spaces).map(|_| OnceLock::new()).collect(),
            empty: GramOperator::identity(0),
        })
    }

    /// Number of spaces, `L + 1`.
    pub fn num_spaces(&self) -> usize {
        self.spaces.len()
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    pub fn spaces(&self) -> &[WeightedSpace] {
        &self.spaces
    }

    pub fn ops(&self) -> &[SparseOperator] {
        &self.ops
    }

    pub fn names(&self) -> &[Option<String>] {
        &self.names
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level >= self.spaces.len() {
            return Err(Error::InvalidLevel {
                level,
                spaces: self.spaces.len(),
            });
        }
        Ok(())
    }

    pub fn dim(&self, level: isize) -> usize {
        if level < 0 {
            return 0;
        }
        self.spaces.get(level as usize).map_or(0, |s| s.dim)
    }

    pub fn total_dim(&self) -> usize {
        self.spaces.iter().map(|s| s.dim).sum()
    }

    pub fn gram(&self, level: isize) -> &GramOperator {
        if level < 0 {
            return &self.empty;
        }
        self.spaces.get(level as usize).map_or(&self.empty, |s| &s.gram)
    }

    /// `Aₗ`, or `None` for padded levels.
    pub fn op(&self, level: isize) -> Option<&SparseOperator> {
        if level < 0 {
            return None;
        }
        self.ops.get(level as usize)
    }

    pub fn op_or_zero(&self, level: isize) -> SparseOperator {
        self.op(level)
            .cloned()
            .unwrap_or_else(|| SparseOperator::zeros(self.dim(level + 1), self.dim(level)))
    }

    pub fn is_zero_op(&self, level: isize) -> bool {
        self.op(level).is_none_or(|a| a.is_zero())
    }

    /// `Aₗ x`.
    pub fn apply_op(&self, level: isize, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim(level));
        match self.op(level) {
            Some(a) => a.mul_vec(x),
            None => vec![0.0; self.dim(level + 1)],
        }
    }

    /// `Aₗ* y = Mₗ⁻¹ Aₗᵀ Mₗ₊₁ y`.
    pub fn apply_adjoint(&self, level: isize, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.dim(level + 1));
        match self.op(level) {
            Some(a) => {
                let my = self.gram(level + 1).apply(y);
                self.gram(level).solve(&a.mul_transpose_vec(&my))
            }
            None => vec![0.0; self.dim(level)],
        }
    }

    /// Explicit `Aₗ*`; needs diagonal Grams on both sides.
    pub fn adjoint(&self, level: usize) -> Result<&SparseOperator> {
        let a = self.ops.get(level).ok_or(Error::InvalidLevel {
            level,
            spaces: self.spaces.len(),
        })?;
        if let Some(adj) = self.adjoints[level].get() {
            return Ok(adj);
        }
        let (Some(m_in), Some(m_out)) = (
            self.spaces[level].gram.as_diagonal(),
            self.spaces[level + 1].gram.as_diagonal(),
        ) else {
            return Err(Error::ImplicitAdjoint { level });
        };
        let inv: Vec<f64> = m_in.iter().map(|w| 1.0 / w).collect();
        let adj = a.transpose().scale(&inv, m_out);
        Ok(self.adjoints[level].get_or_init(|| adj))
    }

    /// Max-norms of `Aₗ₊₁Aₗ` and `Aₗ*Aₗ₊₁*` for every consecutive pair.
    pub fn verify_complex(&self) -> ComplexReport {
        let mut levels = Vec::new();
        for l in 0..self.ops.len().saturating_sub(1) {
            let (a, b) = (&self.ops[l], &self.ops[l + 1]);
            let product = b.matmul(a).expect("dimensions checked at construction");
            let primal_max = product.max_abs();
            let adjoint_max = if product.is_zero() {
                0.0
            } else {
                match (self.adjoint(l), self.adjoint(l + 1)) {
                    (Ok(a_adj), Ok(b_adj)) => a_adj.matmul(b_adj).expect("dimensions checked").max_abs(),
                    _ => {
                        let pt = product.transpose().to_dense();
                        let m_out = self.spaces[l + 2].gram.to_dense();
                        let right = pt * m_out;
                        let m_in = &self.spaces[l].gram;
                        let mut worst = 0.0_f64;
                        for j in 0..right.ncols() {
                            let col: Vec<f64> = right.column(j).iter().copied().collect();
                            worst = worst.max(m_in.solve(&col).iter().fold(0.0_f64, |m, v| m.max(v.abs())));
                        }
                        worst
                    }
                }
            };
            let threshold = COMPLEX_TOL * a.max_abs() * b.max_abs();
            levels.push(LevelCheck {
                level: l,
                primal_max,
                adjoint_max,
                threshold,
                pass: primal_max <= threshold && adjoint_max <= threshold * self.adjoint_scale(l),
            });
        }
        let pass = levels.iter().all(|l| l.pass);
        ComplexReport { levels, pass }
    }

    // The adjoint product carries the Gram ratio M_{l+2}/M_l; its threshold
    // is scaled accordingly.
    fn adjoint_scale(&self, l: usize) -> f64 {
        let ratio = |g: &GramOperator| match g.as_diagonal() {
            Some(d) => {
                let max = d.iter().fold(0.0_f64, |m, v| m.max(*v));
                let min = d.iter().fold(f64::INFINITY, |m, v| m.min(*v));
                (max, min)
            }
            None => {
                let dense = g.to_dense();
                (dense.amax(), dense.diagonal().min())
            }
        };
        let (hi, _) = ratio(&self.spaces[l + 2].gram);
        let (_, lo) = ratio(&self.spaces[l].gram);
        if lo > 0.0 && lo.is_finite() {
            (hi / lo).max(1.0)
        } else {
            1.0
        }
    }

    /// The complex read backwards: spaces `H_L … H₀` with operators
    /// `A_{L−1}*, …, A₀*`. Level ℓ here is level `L − ℓ` of the dual.
    pub fn dual(&self) -> Result<HilbertComplex> {
        let spaces: Vec<WeightedSpace> = self.spaces.iter().rev().cloned().collect();
        let mut ops = Vec::with_capacity(self.ops.len());
        let mut names = Vec::with_capacity(self.ops.len());
        for l in (0..self.ops.len()).rev() {
            ops.push(self.adjoint(l)?.clone());
            names.push(self.names[l].as_ref().map(|n| format!("{n}*")));
        }
        HilbertComplex::new(spaces, ops, names)
    }

    pub(crate) fn cohomology_cache(&self, level: usize) -> &OnceLock<CohomologyBasis> {
        &self.cohomology[level]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector::{deterministic_vector, dot};

    pub(crate) fn cycle(n: usize) -> HilbertComplex {
        let mut t = Vec::new();
        for e in 0..n {
            t.push((e, e, -1.0));
            t.push((e, (e + 1) % n, 1.0));
        }
        let g = SparseOperator::from_triplets(n, n, &t).unwrap();
        HilbertComplex::new(vec![WeightedSpace::euclidean(n), WeightedSpace::euclidean(n)], vec![g], vec![]).unwrap()
    }

    #[test]
    fn padded_levels_are_zero() {
        let c = cycle(4);
        assert_eq!(c.dim(-1), 0);
        assert_eq!(c.dim(2), 0);
        assert_eq!(c.apply_op(1, &[1.0; 4]).len(), 0);
        assert_eq!(c.apply_adjoint(-1, &[1.0; 4]), Vec::<f64>::new());
        assert_eq!(c.apply_adjoint(1, &[]), vec![0.0; 4]);
    }

    #[test]
    fn identity_grams_make_adjoint_the_transpose() {
        let c = cycle(5);
        assert_eq!(c.adjoint(0).unwrap(), &c.ops()[0].transpose());
    }

    #[test]
    fn adjoint_identity_with_weights() {
        let g = SparseOperator::from_triplets(2, 3, &[(0, 0, -1.0), (0, 1, 1.0), (1, 1, -1.0), (1, 2, 1.0)]).unwrap();
        let c = HilbertComplex::new(
            vec![
                WeightedSpace::new(GramOperator::diagonal(vec![0.5, 1.0, 2.0]).unwrap()),
                WeightedSpace::new(GramOperator::diagonal(vec![3.0, 0.25]).unwrap()),
            ],
            vec![g],
            vec![],
        )
        .unwrap();
        let u = deterministic_vector(3, 1);
        let v = deterministic_vector(2, 2);
        let lhs = c.gram(1).apply(&c.apply_op(0, &u));
        let rhs = c.gram(0).apply(&c.apply_adjoint(0, &v));
        assert!((dot(&lhs, &v) - dot(&u, &rhs)).abs() < 1e-14);
        let explicit = c.adjoint(0).unwrap().mul_vec(&v);
        let implicit = c.apply_adjoint(0, &v);
        for (a, b) in explicit.iter().zip(&implicit) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn general_gram_has_no_explicit_adjoint() {
        let m = GramOperator::general(SparseOperator::identity(2)).unwrap();
        let c = HilbertComplex::new(
            vec![WeightedSpace::new(m), WeightedSpace::euclidean(1)],
            vec![SparseOperator::from_triplets(1, 2, &[(0, 0, 1.0)]).unwrap()],
            vec![],
        )
        .unwrap();
        assert!(matches!(c.adjoint(0), Err(Error::ImplicitAdjoint { level: 0 })));
    }

    #[test]
    fn mismatched_operator_rejected() {
        let r = HilbertComplex::new(
            vec![WeightedSpace::euclidean(2), WeightedSpace::euclidean(2)],
            vec![SparseOperator::zeros(3, 2)],
            vec![],
        );
        assert!(r.is_err());
    }
}
