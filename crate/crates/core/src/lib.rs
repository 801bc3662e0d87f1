//! Exact decomposition of shifted nested sums and multiple-integral families
//! into linear forms in generalized polylogarithms
//!
//! ```text
//! Le_s(z) = sum_{n1 >= n2 >= ... >= nl >= 1} z^n1 / (n1^s1 ... nl^sl)
//! ```
//!
//! together with the arithmetic (denominator) and height checks on the
//! resulting polynomial coefficients, brute-force series oracles that validate
//! every decomposition, and the numeric evaluation at `z = 1` where the forms
//! become rational combinations of odd zeta values.
//!
//! Module map:
//! - [`algebra`]: rationals, polynomials, integer-valued polynomials, `D_N`.
//! - [`polylog`]: `Le_s` series coefficients, numeric evaluation, `zeta`.
//! - [`elementary`]: shifted elementary sums and their linear forms.
//! - [`normal_reduction`]: Delta-normal factors and nested-sum reduction.
//! - [`linear_form`]: the integral family pipeline and the odd-zeta family.
//! - [`heights`]: factorial bounds, the `F` function and its maximum `M`.
//! - [`oracle`]: independent series engines and stabilized evaluation at 1.

pub mod algebra;
pub mod cache;
pub mod corpus;
pub mod elementary;
mod error;
pub mod form;
pub mod heights;
pub mod linear_form;
pub mod normal_reduction;
pub mod oracle;
pub mod polylog;
pub mod real;

pub use algebra::{Integer, Polynomial, Rational};
pub use elementary::ElementarySum;
pub use error::Error;
pub use form::{FormMeta, LinearForm};
pub use polylog::{MultiIndex, PrecisionContext};

pub type Result<T, E = Error> = std::result::Result<T, E>;
