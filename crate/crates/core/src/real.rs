//! High-precision binary floating point (dashu `FBig`) and the few helpers the
//! numeric side needs: conversions from exact values, logarithms and a dense
//! linear solve.

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::{IBig, UBig};
use num_bigint::Sign;

use crate::algebra::{Integer, Rational};
use crate::Error;

pub type Real = FBig<HalfEven, 2>;

/// Binary precision carrying `digits` decimal digits plus a few guard bits.
pub fn bits_for_digits(digits: u32) -> usize {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as usize + 8
}

pub fn from_i64(n: i64, bits: usize) -> Real {
    Real::from(n).with_precision(bits).value()
}

pub fn from_integer(n: &Integer, bits: usize) -> Real {
    let (sign, bytes) = n.to_bytes_le();
    let mag = IBig::from(UBig::from_le_bytes(&bytes));
    let signed = if sign == Sign::Minus { -mag } else { mag };
    Real::from(signed).with_precision(bits).value()
}

pub fn from_rational(r: &Rational, bits: usize) -> Real {
    from_integer(r.numer(), bits) / from_integer(r.denom(), bits)
}

pub fn zero(bits: usize) -> Real {
    Real::ZERO.with_precision(bits).value()
}

pub fn one(bits: usize) -> Real {
    Real::ONE.with_precision(bits).value()
}

pub fn abs(x: &Real) -> Real {
    if x < &Real::ZERO {
        -x.clone()
    } else {
        x.clone()
    }
}

pub fn to_f64(x: &Real) -> f64 {
    x.to_f64().value()
}

/// Decimal rendering with `digits` significant digits.
pub fn to_decimal_string(x: &Real, digits: usize) -> String {
    let dec = x
        .clone()
        .with_base_and_precision::<10>(digits.max(1))
        .value();
    dec.to_string()
}

/// `|a - b| / max(|b|, tiny)` as an `f64`, computed at full precision first.
pub fn relative_difference(a: &Real, b: &Real) -> f64 {
    let diff = abs(&(a - b));
    if b.repr().is_zero() {
        return to_f64(&diff);
    }
    to_f64(&(diff / abs(b)))
}

/// Exact conversion of a plain decimal literal such as `"-1.25"`.
pub fn parse_decimal(text: &str, bits: usize) -> Result<Real, Error> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits = format!("{int}{frac}");
    let num: Integer = digits
        .parse()
        .map_err(|e| Error::Parse(format!("decimal {text:?}: {e}")))?;
    let den = Integer::from(10).pow(frac.len() as u32);
    let r = Rational::new(if neg { -num } else { num }, den);
    Ok(from_rational(&r, bits))
}

/// Natural logarithm of a positive integer at the given precision.
pub fn ln_int(n: u64, bits: usize) -> Real {
    from_i64(n as i64, bits).ln()
}

/// Gaussian elimination with partial pivoting on a dense square system.
pub fn solve_dense(mut a: Vec<Vec<Real>>, mut b: Vec<Real>) -> Result<Vec<Real>, Error> {
    let n = b.len();
    if a.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(Error::Domain("linear system must be square".into()));
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| abs(&a[i][col]).cmp(&abs(&a[j][col])))
            .expect("non-empty column");
        if a[pivot][col].repr().is_zero() {
            return Err(Error::Domain("singular extrapolation system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = &a[row][col] / &a[col][col];
            if factor.repr().is_zero() {
                continue;
            }
            for k in col..n {
                let delta = &factor * &a[col][k];
                a[row][k] -= delta;
            }
            let delta = &factor * &b[col];
            b[row] -= delta;
        }
    }
    let mut x = vec![Real::ZERO; n];
    for row in (0..n).rev() {
        let mut acc = b[row].clone();
        for k in row + 1..n {
            acc -= &a[row][k] * &x[k];
        }
        x[row] = acc / &a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_rational;

    #[test]
    fn conversions() {
        let bits = bits_for_digits(40);
        let r = from_rational(&parse_rational("-7/3").unwrap(), bits);
        assert!((to_f64(&r) + 7.0 / 3.0).abs() < 1e-15);
        let big = Integer::from(10).pow(50u32);
        let x = from_integer(&big, bits);
        assert!(to_decimal_string(&x, 5).contains("1"));
        assert!((to_f64(&ln_int(2, bits)) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn solves_small_system() {
        let bits = 200;
        let a = vec![
            vec![from_i64(0, bits), from_i64(2, bits)],
            vec![from_i64(3, bits), from_i64(1, bits)],
        ];
        let b = vec![from_i64(4, bits), from_i64(5, bits)];
        let x = solve_dense(a, b).unwrap();
        assert_eq!(to_f64(&x[0]), 1.0);
        assert_eq!(to_f64(&x[1]), 2.0);
    }
}
