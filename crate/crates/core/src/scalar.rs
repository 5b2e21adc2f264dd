use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_traits::Num;

/// Entry type for matrices and quantum functions.
///
/// Every check in this crate is an exact zero test, so the intended
/// instances are exact fields such as `BigRational` or `Rational64`.
pub trait Scalar: Num + Neg<Output = Self> + Clone + Debug + Display + Send + Sync + 'static {}

impl<T> Scalar for T where T: Num + Neg<Output = T> + Clone + Debug + Display + Send + Sync + 'static {}
