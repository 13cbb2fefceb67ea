use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Floating-point type that agreement curves are computed in.
///
/// Rank arithmetic stays in exact integers; a `Scalar` is only involved in
/// the final division and square root, in averaging over Monte-Carlo
/// realizations, and in quantile/p-value summaries.
pub trait Scalar: Float + FromPrimitive + Sum + Default + Debug + Display + FromStr + Send + Sync + 'static {
    /// Exact ratio `num / den` rounded once into the scalar type.
    fn ratio(num: u128, den: u128) -> Self {
        Self::from_u128(num).expect("u128 fits in a float") / Self::from_u128(den).expect("u128 fits in a float")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in a float")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
