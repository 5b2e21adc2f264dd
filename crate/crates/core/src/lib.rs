mod assembly;
pub mod boolean;
pub mod catalog;
pub mod error;
pub mod format;
pub mod gadgets;
pub mod hom;
pub mod linalg;
pub mod qfun;
pub mod qhom;
pub mod reduce;
pub mod scalar;
pub mod structures;

pub use error::{Error, Result};

/// Exact rational matrices.
pub type QMat = linalg::Matrix<num_rational::BigRational>;
/// Quantum functions over exact rationals.
pub type QFun = qfun::QuantumFunction<num_rational::BigRational>;
