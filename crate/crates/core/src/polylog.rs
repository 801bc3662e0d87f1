//! Generalized multiple polylogarithms with the non-strict summation order
//!
//! ```text
//! Le_s(z) = sum_{n1 >= n2 >= ... >= nl >= 1} z^n1 * n1^-s1 * ... * nl^-sl
//! ```
//!
//! Note the `>=`: these are not the strict-inequality multiple polylogarithms
//! that are also common. With this convention `Le_{2,1}(1) = 2 zeta(3)` and,
//! more generally, `Le_{2,...,2,1}(1) = 2 zeta(2k + 1)` for `k` twos.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{binomial, inverse_power, Rational};
use crate::oracle::{value_at_1_stabilized, Stabilized};
use crate::real::{self, Real};
use crate::Error;

/// Index vector `(s1, ..., sl)` of a polylogarithm. The empty index stands for
/// the constant slot `Le_() = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self, Error> {
        if entries.contains(&0) {
            return Err(Error::Domain(format!(
                "multi-index entries must be >= 1: {entries:?}"
            )));
        }
        Ok(Self(entries))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `(2, ..., 2, 1)` with `k` twos.
    pub fn twos_then_one(k: usize) -> Self {
        let mut v = vec![2; k];
        v.push(1);
        Self(v)
    }

    /// `(1, 2, ..., 2, 1)` with `k` twos.
    pub fn one_twos_one(k: usize) -> Self {
        let mut v = vec![1];
        v.extend(std::iter::repeat_n(2, k));
        v.push(1);
        Self(v)
    }
}

/// Canonical key order: by depth, then lexicographically.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.depth()
            .cmp(&other.depth())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Numeric settings shared by every evaluation at `z = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionContext {
    /// Working precision in decimal digits.
    pub digits: u32,
    /// First truncation point of the stabilization sequence.
    pub truncation_order: usize,
    /// Growth factor of the truncation between successive estimates.
    pub stabilization_factor: usize,
    /// Digits kept back from `digits` when deciding that two estimates agree.
    pub guard_digits: u32,
    /// Largest truncation the stabilization may reach.
    pub max_truncation: usize,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self {
            digits: 40,
            truncation_order: 200,
            stabilization_factor: 2,
            guard_digits: 10,
            max_truncation: 1 << 18,
        }
    }
}

impl PrecisionContext {
    pub fn with_digits(digits: u32) -> Result<Self, Error> {
        let ctx = Self {
            digits,
            ..Self::default()
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.digits < 10 {
            return Err(Error::Domain(format!(
                "precision must be >= 10 digits, got {}",
                self.digits
            )));
        }
        if self.truncation_order < 1 || self.stabilization_factor < 2 {
            return Err(Error::Domain(
                "truncation order >= 1 and growth factor >= 2 required".into(),
            ));
        }
        Ok(())
    }

    /// Binary precision used for internal arithmetic; twice the requested
    /// digits because extrapolation at `z = 1` is ill-conditioned.
    pub fn working_bits(&self) -> usize {
        real::bits_for_digits(2 * self.digits + 20)
    }

    /// Relative agreement that counts as stabilized.
    pub fn target_tolerance(&self) -> f64 {
        10f64.powi(-(self.digits.saturating_sub(self.guard_digits) as i32))
    }
}

/// Nested prefix-sum recursion shared by the exact and the floating versions:
/// returns `g_1(n)` for `n = 1..=count`, where `g_l(n) = n^-sl` and
/// `g_j(n) = n^-sj * sum_{k <= n} g_{j+1}(k)`.
fn nested_coefficients<T, P>(s: &[u32], count: usize, zero: T, pow_inv: P) -> Vec<T>
where
    T: Clone + for<'a> std::ops::AddAssign<&'a T> + for<'a> std::ops::Mul<&'a T, Output = T>,
    P: Fn(u64, u32) -> T,
{
    let mut level: Vec<T> = (1..=count as u64)
        .map(|n| pow_inv(n, s[s.len() - 1]))
        .collect();
    for &sj in s[..s.len() - 1].iter().rev() {
        let mut prefix = zero.clone();
        level = level
            .iter()
            .enumerate()
            .map(|(i, g)| {
                prefix += g;
                pow_inv(i as u64 + 1, sj) * &prefix
            })
            .collect();
    }
    level
}

/// Exact coefficients of `z^1 .. z^count` of `Le_s(z)`.
pub fn le_series(s: &MultiIndex, count: usize) -> Result<Vec<Rational>, Error> {
    if s.depth() == 0 {
        return Err(Error::Domain("le_series needs depth >= 1".into()));
    }
    Ok(nested_coefficients(
        s.entries(),
        count,
        Rational::zero(),
        |n, e| inverse_power(n as i64, e),
    ))
}

/// Floating coefficients of `z^1 .. z^count` of `Le_s(z)`.
pub fn le_series_real(s: &MultiIndex, count: usize, bits: usize) -> Vec<Real> {
    nested_coefficients(s.entries(), count, real::zero(bits), |n, e| {
        let one = real::one(bits);
        let mut acc = one.clone();
        let base = real::from_i64(n as i64, bits);
        for _ in 0..e {
            acc *= &base;
        }
        one / acc
    })
}

/// `Le_s(z)` for rational `z` in `[0, 1]`.
///
/// For `z < 1` the truncation point comes from the bound
/// `coefficient(n) <= (1 + ln n)^(l-1)` and a geometric tail estimate. At
/// `z = 1` (requires `s1 >= 2`) the value comes from the stabilized
/// extrapolation of partial sums.
pub fn le_numeric(s: &MultiIndex, z: &Rational, ctx: &PrecisionContext) -> Result<Real, Error> {
    ctx.validate()?;
    if s.depth() == 0 {
        return Err(Error::Domain("le_numeric needs depth >= 1".into()));
    }
    if z < &Rational::zero() || z > &Rational::one() {
        return Err(Error::Domain(format!("z = {z} outside [0, 1]")));
    }
    let bits = ctx.working_bits();
    if z.is_zero() {
        return Ok(real::zero(bits));
    }
    if z.is_one() {
        if s.entries()[0] < 2 {
            return Err(Error::Divergent(format!("Le{s}(1) with leading entry 1")));
        }
        let Stabilized { value, .. } = value_at_1_stabilized(
            |count, bits| le_series_real(s, count, bits),
            s.depth().saturating_sub(1),
            ctx,
        )?;
        return Ok(value);
    }
    let count = geometric_truncation(
        real::to_f64(&real::from_rational(z, 64)),
        s.depth(),
        ctx.digits + 5,
    );
    let coeffs = le_series_real(s, count, bits);
    let zr = real::from_rational(z, bits);
    let mut power = zr.clone();
    let mut acc = real::zero(bits);
    for c in &coeffs {
        acc += c * &power;
        power *= &zr;
    }
    Ok(acc)
}

/// Smallest `N` with `t(N+1) / (1 - rho) < 10^-digits`, where
/// `t(n) = (1 + ln n)^(l-1) z^n` and `rho = z (1 + 1/N)^(l-1)`.
fn geometric_truncation(z: f64, depth: usize, digits: u32) -> usize {
    let target = -(f64::from(digits)) * std::f64::consts::LN_10;
    let exp = depth.saturating_sub(1) as f64;
    let mut n = 1usize;
    loop {
        let nf = n as f64;
        let rho = z * (1.0 + 1.0 / nf).powf(exp);
        if rho < 1.0 {
            let next = nf + 1.0;
            let log_term = exp * (1.0 + next.ln()).ln() + next * z.ln() - (1.0 - rho).ln();
            if log_term < target {
                return n;
            }
        }
        n = (n + 1).max(n + n / 16);
    }
}

/// `Some(k)` when `s = (2, ..., 2, 1)` with `k` twos; `Le_s(1) = 2 zeta(2k + 1)`
/// for `k >= 1`.
pub fn special_value_form(s: &MultiIndex) -> Option<usize> {
    match s.entries().split_last() {
        Some((1, twos)) if twos.iter().all(|&e| e == 2) => Some(twos.len()),
        _ => None,
    }
}

/// Bernoulli numbers `B_0 .. B_{count-1}` (with `B_1 = -1/2`).
fn bernoulli_numbers(count: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(count);
    for m in 0..count {
        if m == 0 {
            b.push(Rational::one());
            continue;
        }
        let acc: Rational = (0..m)
            .map(|k| Rational::from_integer(binomial(m as u64 + 1, k as u64)) * &b[k])
            .sum();
        b.push(-acc / Rational::from_integer((m as i64 + 1).into()));
    }
    b
}

/// `zeta(k)` by Euler-Maclaurin summation.
///
/// With cut-off `N`, `zeta(k) = sum_{n<N} n^-k + N^(1-k)/(k-1) + N^-k/2
/// + sum_j B_2j/(2j)! (k)_(2j-1) N^(-k-2j+1) + R`, and for real `k > 1` the
/// remainder is bounded by the first omitted correction term. Corrections are
/// added until that term is below `10^-(digits + 10)`.
pub fn zeta_numeric(k: u32, ctx: &PrecisionContext) -> Result<Real, Error> {
    ctx.validate()?;
    if k < 2 {
        return Err(Error::Domain(format!("zeta({k}) needs k >= 2")));
    }
    let bits = ctx.working_bits();
    let cutoff = u64::from(ctx.digits.max(10));
    let n_real = real::from_i64(cutoff as i64, bits);
    let mut acc = real::zero(bits);
    for n in 1..cutoff {
        acc += real::one(bits) / real::from_i64(n as i64, bits).powi(k.into());
    }
    let n_pow_k = n_real.clone().powi(k.into());
    acc += &n_real / (&n_pow_k * real::from_i64(i64::from(k) - 1, bits));
    acc += real::one(bits) / (n_pow_k.clone() * real::from_i64(2, bits));

    let eps = real::from_rational(
        &Rational::new(1.into(), num_bigint::BigInt::from(10).pow(ctx.digits + 10)),
        bits,
    );
    let bern = bernoulli_numbers(2 * ctx.digits as usize + 40);
    // running factor (k)_(2j-1) / N^(k+2j-1)
    let mut rising = real::from_i64(k.into(), bits) / (&n_pow_k * &n_real);
    let mut factorial = Rational::one();
    let n_sq = &n_real * &n_real;
    for j in 1.. {
        let two_j = 2 * j;
        if two_j >= bern.len() {
            return Err(Error::NotStabilized {
                agreement: f64::NAN,
                truncation: two_j,
            });
        }
        factorial *= Rational::from_integer(((two_j - 1) * two_j).into());
        let coef = real::from_rational(&(&bern[two_j] / &factorial), bits);
        let term = coef * &rising;
        if real::abs(&term) < eps {
            break;
        }
        acc += term;
        let k_real = i64::from(k);
        rising = rising
            * real::from_i64((k_real + two_j as i64 - 1) * (k_real + two_j as i64), bits)
            / &n_sq;
    }
    Ok(acc)
}
