//! Discrete Hilbert complexes: Helmholtz decompositions, Poincaré
//! constants, first- and second-order solvers and guaranteed two-sided
//! functional error bounds.

pub mod complex;
pub mod error;
pub mod estimator;
pub mod instances;
pub mod linalg;
pub mod manifest;
pub mod solver;

pub use error::{Error, Result};
