//! Exact integer and rational linear algebra.
//!
//! Everything here works over `BigInt` / `BigRational`, so no result depends
//! on floating-point rounding.

mod hnf;
mod matrix;
mod simplex;
mod span;

use num_bigint::BigInt;
use num_rational::BigRational;

pub use hnf::{hnf_lower_canonical, is_canonical_lower_hnf};
pub use matrix::{det, inverse_rational, IntMatrix, Matrix, RatMatrix, UnimodularMatrix};
pub use simplex::{simplex_max, LpOutcome};
pub use span::RowSpan;

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn int_vec(xs: &[i64]) -> Vec<Int> {
    xs.iter().map(|&x| Int::from(x)).collect()
}

pub fn to_rat_vec(xs: &[Int]) -> Vec<Rat> {
    xs.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

/// Returns the integer vector when every entry is integral.
pub fn to_int_vec(xs: &[Rat]) -> Option<Vec<Int>> {
    xs.iter()
        .map(|x| x.is_integer().then(|| x.to_integer()))
        .collect()
}
