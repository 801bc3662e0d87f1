//! Exact arithmetic substrate: rationals, dense polynomials, integer-valued
//! polynomials in the binomial basis and the lcm scale `D_N`.

mod ivp;
mod polynomial;

pub(crate) use ivp::divide_linear;
pub use ivp::{discrete_sum, discrete_sum_strict, ivp_divide_linear, IntegerValuedPolynomial};
pub use polynomial::Polynomial;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Integer = BigInt;
pub type Rational = BigRational;

/// `lcm(1, 2, ..., n)`, with the empty and singleton cases equal to 1.
pub fn lcm_upto(n: u32) -> Integer {
    (2..=n).fold(Integer::one(), |acc, k| acc.lcm(&Integer::from(k)))
}

/// Binomial coefficient `C(n, k)` for nonnegative arguments, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> Integer {
    if k > n {
        return Integer::zero();
    }
    let k = k.min(n - k);
    let mut acc = Integer::one();
    for i in 0..k {
        acc = acc * Integer::from(n - i) / Integer::from(i + 1);
    }
    acc
}

pub fn factorial(n: u64) -> Integer {
    (2..=n).fold(Integer::one(), |acc, k| acc * Integer::from(k))
}

pub fn rational_from_int(n: i64) -> Rational {
    Rational::from_integer(Integer::from(n))
}

pub fn is_integral(r: &Rational) -> bool {
    r.denom().is_one()
}

/// `n^(-e)` as an exact rational; `n` must be nonzero.
pub fn inverse_power(n: i64, e: u32) -> Rational {
    Rational::new(Integer::one(), Integer::from(n).pow(e))
}

/// Serialized form used in every JSON artifact: `"num/den"`, or `"num"` when the
/// denominator is 1.
pub fn rational_to_string(r: &Rational) -> String {
    r.to_string()
}

pub fn parse_rational(s: &str) -> Result<Rational, crate::Error> {
    s.trim()
        .parse::<Rational>()
        .map_err(|e| crate::Error::Parse(format!("rational {s:?}: {e}")))
}

pub(crate) mod serde_rational {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}
