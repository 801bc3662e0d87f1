use num_traits::{One, Zero};

use super::{binomial, factorial, Polynomial, Rational};
use crate::Error;

/// A polynomial written as `sum_k c_k * C(x, k)`.
///
/// The binomial basis makes integer-valuedness a coefficient check: the
/// polynomial maps integers to integers iff every `c_k` is an integer.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IntegerValuedPolynomial {
    binomial_coeffs: Vec<Rational>,
}

/// `C(x, k) = x (x - 1) ... (x - k + 1) / k!` in the power basis.
fn binomial_basis_poly(k: usize) -> Polynomial {
    let falling = (0..k as i64).fold(Polynomial::one(), |acc, t| &acc * &Polynomial::linear(-t));
    falling.scale(&Rational::new(One::one(), factorial(k as u64)))
}

impl IntegerValuedPolynomial {
    pub fn from_binomial_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self {
            binomial_coeffs: coeffs,
        }
    }

    pub fn binomial_coeffs(&self) -> &[Rational] {
        &self.binomial_coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.binomial_coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.binomial_coeffs.is_empty()
    }

    pub fn is_integer_valued(&self) -> bool {
        self.binomial_coeffs.iter().all(|c| c.is_integer())
    }

    /// Basis change via forward differences at 0: `c_k = (Delta^k P)(0)`.
    pub fn from_power_basis(p: &Polynomial) -> Self {
        let Some(deg) = p.degree() else {
            return Self::default();
        };
        let mut values: Vec<Rational> = (0..=deg as i64).map(|x| p.eval_int(x)).collect();
        let mut coeffs = Vec::with_capacity(deg + 1);
        for _ in 0..=deg {
            coeffs.push(values[0].clone());
            values = values.windows(2).map(|w| &w[1] - &w[0]).collect();
        }
        Self::from_binomial_coeffs(coeffs)
    }

    pub fn to_power_basis(&self) -> Polynomial {
        self.binomial_coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .fold(Polynomial::zero(), |acc, (k, c)| {
                &acc + &binomial_basis_poly(k).scale(c)
            })
    }

    pub fn eval_int(&self, x: i64) -> Rational {
        // C(x, k) for arbitrary integer x through the falling factorial.
        let mut acc = Rational::zero();
        let mut basis = Rational::one();
        for (k, c) in self.binomial_coeffs.iter().enumerate() {
            if k > 0 {
                basis = basis * Rational::from_integer((x - k as i64 + 1).into())
                    / Rational::from_integer((k as i64).into());
            }
            acc += c * &basis;
        }
        acc
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_binomial_coeffs(self.binomial_coeffs.iter().map(|a| a * c).collect())
    }

    /// `C(x + shift, k)` as an integer-valued polynomial (Vandermonde expansion).
    pub fn shifted_binomial(shift: u64, k: usize) -> Self {
        let coeffs = (0..=k)
            .map(|i| Rational::from_integer(binomial(shift, (k - i) as u64)))
            .collect();
        Self::from_binomial_coeffs(coeffs)
    }
}

/// `Q1` with `Q1(n) = sum_{k=1}^{n} P(k)` for every integer `n >= 1`.
///
/// Uses `sum_{k=1}^{n} C(k, j) = C(n, j + 1) + C(n, j) - [j = 0]`.
pub fn discrete_sum(p: &IntegerValuedPolynomial) -> IntegerValuedPolynomial {
    let c = p.binomial_coeffs();
    if c.is_empty() {
        return IntegerValuedPolynomial::default();
    }
    let mut out = vec![Rational::zero(); c.len() + 1];
    for (j, cj) in c.iter().enumerate() {
        out[j + 1] += cj;
        out[j] += cj;
    }
    out[0] -= &c[0];
    IntegerValuedPolynomial::from_binomial_coeffs(out)
}

/// `Q2` with `Q2(n) = sum_{k=1}^{n-1} P(k)`; in particular `Q2(1) = 0`.
pub fn discrete_sum_strict(p: &IntegerValuedPolynomial) -> IntegerValuedPolynomial {
    let c = p.binomial_coeffs();
    if c.is_empty() {
        return IntegerValuedPolynomial::default();
    }
    let mut out = vec![Rational::zero(); c.len() + 1];
    for (j, cj) in c.iter().enumerate() {
        out[j + 1] += cj;
    }
    out[0] -= &c[0];
    IntegerValuedPolynomial::from_binomial_coeffs(out)
}

/// Splits `T(x) / (x + alpha) = T(-alpha) / (x + alpha) + Q(x)`.
///
/// Requires `deg T <= delta`; then `D_delta * Q` is integer-valued whenever `T` is.
pub fn ivp_divide_linear(
    t: &IntegerValuedPolynomial,
    alpha: u32,
    delta: u32,
) -> Result<(Rational, Polynomial), Error> {
    if let Some(deg) = t.degree() {
        if deg > delta as usize {
            return Err(Error::DegreeBound {
                degree: deg,
                bound: delta as usize,
            });
        }
    }
    Ok(divide_linear(&t.to_power_basis(), alpha as i64))
}

/// Synthetic division by `x + alpha`: returns `(P(-alpha), Q)` with
/// `P(x) = (x + alpha) Q(x) + P(-alpha)`.
pub(crate) fn divide_linear(p: &Polynomial, alpha: i64) -> (Rational, Polynomial) {
    let coeffs = p.coeffs();
    if coeffs.is_empty() {
        return (Rational::zero(), Polynomial::zero());
    }
    let root = Rational::from_integer((-alpha).into());
    let n = coeffs.len();
    let mut quotient = vec![Rational::zero(); n - 1];
    let mut carry = Rational::zero();
    for k in (0..n).rev() {
        let val = &coeffs[k] + &carry * &root;
        if k == 0 {
            return (val, Polynomial::from_coeffs(quotient));
        }
        quotient[k - 1] = val.clone();
        carry = val;
    }
    unreachable!()
}
