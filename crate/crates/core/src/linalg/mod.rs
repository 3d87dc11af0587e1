//! Sparse and dense numerical kernels.

pub mod cg;
pub mod dense;
pub mod gram;
pub mod io;
pub mod lanczos;
pub mod minres;
pub mod sparse;
pub mod vector;

pub use cg::{cg, cg_solve, CgOptions, IterStats};
pub use dense::{DenseSvd, DEFAULT_CAP, KERNEL_THRESHOLD};
pub use gram::{weighted_dot, BlockInnerProduct, Euclidean, GramOperator, InnerProduct};
pub use lanczos::{lanczos_extremal, LanczosOptions, LanczosResult, Which};
pub use minres::minres;
pub use sparse::SparseOperator;
