//! Brute-force series engines used to check every decomposition, and the
//! stabilized evaluation of convergent series at `z = 1`.
//!
//! The engines here never call the decomposition code: elementary sums,
//! nested sums and the coupled integral sums are expanded directly by prefix
//! sums over the summation levels.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    binomial, factorial, inverse_power, rational_to_string, Polynomial, Rational,
};
use crate::elementary::ElementarySum;
use crate::form::LinearForm;
use crate::linear_form::IntegralParams;
use crate::normal_reduction::NestedSum;
use crate::polylog::{le_series, PrecisionContext};
use crate::real::{self, Real};
use crate::Error;

/// Exact coefficients of `z^0 .. z^order`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesWindow {
    #[serde(with = "rational_vec")]
    coeffs: Vec<Rational>,
}

mod rational_vec {
    use super::Rational;
    use crate::algebra::parse_rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(ToString::to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl SeriesWindow {
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![Rational::zero(); order + 1],
        }
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Result<Self, Error> {
        if coeffs.is_empty() {
            return Err(Error::Domain("a series window holds at least z^0".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `self += c * other` over the common window.
    pub fn add_scaled(&mut self, other: &SeriesWindow, c: &Rational) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * c;
        }
    }

    /// Product truncated to the shorter window.
    pub fn mul(&self, other: &SeriesWindow) -> SeriesWindow {
        let n = self.coeffs.len().min(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                (0..=k)
                    .map(|i| &self.coeffs[i] * &other.coeffs[k - i])
                    .sum()
            })
            .collect();
        SeriesWindow { coeffs }
    }
}

/// Compares two windows exactly; `Some(k)` is the first differing power.
pub fn series_equal(a: &SeriesWindow, b: &SeriesWindow) -> Result<Option<usize>, Error> {
    if a.order() != b.order() {
        return Err(Error::WindowMismatch(a.order(), b.order()));
    }
    Ok(a.coeffs.iter().zip(&b.coeffs).position(|(x, y)| x != y))
}

/// `out[n-1] = f_1(n)` where `f_l = g_l` and `f_j(n) = g_j(n) * sum_{k<=n} f_{j+1}(k)`.
fn nested_dp(levels: &[Vec<Rational>]) -> Vec<Rational> {
    let mut acc = levels[levels.len() - 1].clone();
    for g in levels[..levels.len() - 1].iter().rev() {
        let mut prefix = Rational::zero();
        acc = g
            .iter()
            .zip(&acc)
            .map(|(gn, f)| {
                prefix += f;
                gn * &prefix
            })
            .collect();
    }
    acc
}

/// Direct expansion of `sum z^(n1-1) prod (n_j + p_j)^-u_j`.
pub fn elementary_sum_series(e: &ElementarySum, order: usize) -> SeriesWindow {
    let levels: Vec<Vec<Rational>> = e
        .u()
        .iter()
        .zip(e.p())
        .map(|(&u, &p)| {
            (1..=order as i64 + 1)
                .map(|n| inverse_power(n + i64::from(p), u))
                .collect()
        })
        .collect();
    SeriesWindow {
        coeffs: nested_dp(&levels),
    }
}

/// Direct expansion of a nested sum by evaluating each factor at the integers.
pub fn nested_sum_series(s: &NestedSum, order: usize) -> Result<SeriesWindow, Error> {
    let levels = s
        .factors()
        .iter()
        .map(|f| {
            (1..=order as i64 + 1)
                .map(|n| f.eval_int(n))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SeriesWindow {
        coeffs: nested_dp(&levels),
    })
}

/// Weight `C(k + c - 1, c - 1)` of the coupling between consecutive levels,
/// `k = n_j - n_(j+1)`; for `c = 0` the levels are forced equal.
fn coupling(c: u32, k: usize) -> Rational {
    if c == 0 {
        return if k == 0 {
            Rational::one()
        } else {
            Rational::zero()
        };
    }
    Rational::from_integer(binomial(k as u64 + u64::from(c) - 1, u64::from(c) - 1))
}

/// Per-level denominator factor
/// `prod_i (b_i - a_i - 1)! / ((n + a_i - 1) ... (n + b_i - 2))`.
fn group_factor(params: &IntegralParams, group: usize, n: i64) -> Rational {
    params
        .group_range(group)
        .map(|i| {
            let (a, b) = (i64::from(params.a[i]), i64::from(params.b[i]));
            let den = Polynomial::rising(a - 1, (b - a) as usize).eval_int(n);
            Rational::from_integer(factorial((b - a - 1) as u64)) / den
        })
        .product()
}

/// Direct expansion of the coupled sum representation of the integral,
/// `O(l N^2)` exact operations.
pub fn coupled_sum_series(params: &IntegralParams, order: usize) -> SeriesWindow {
    let count = order + 1;
    let l = params.c.len();
    let mut f: Vec<Rational> = (1..=count)
        .map(|n| group_factor(params, l - 1, n as i64) * coupling(params.c[l - 1], n - 1))
        .collect();
    for j in (0..l - 1).rev() {
        let c = params.c[j];
        f = (1..=count)
            .map(|n| {
                let inner: Rational = (1..=n).map(|m| coupling(c, n - m) * &f[m - 1]).sum();
                group_factor(params, j, n as i64) * inner
            })
            .collect();
    }
    SeriesWindow { coeffs: f }
}

/// Floating-point terms `t_n`, `n = 1..=count`, of the coupled sum at `z = 1`.
///
/// The coupling polynomial is expanded in monomials of the inner variable so
/// each level costs `O(c^2 N)` instead of `O(N^2)`.
pub fn coupled_sum_terms(params: &IntegralParams, count: usize, bits: usize) -> Vec<Real> {
    let l = params.c.len();
    let factor = |group: usize| -> Vec<Real> {
        let consts: Vec<(Real, i64, i64)> = params
            .group_range(group)
            .map(|i| {
                let (a, b) = (i64::from(params.a[i]), i64::from(params.b[i]));
                (
                    real::from_integer(&factorial((b - a - 1) as u64), bits),
                    a - 1,
                    b - 2,
                )
            })
            .collect();
        (1..=count as i64)
            .map(|n| {
                let mut acc = real::one(bits);
                for (c, lo, hi) in &consts {
                    let mut den = real::one(bits);
                    for t in *lo..=*hi {
                        den *= real::from_i64(n + t, bits);
                    }
                    acc *= c / den;
                }
                acc
            })
            .collect()
    };
    let coupling_poly = |c: u32| -> Vec<Real> {
        // C(x + c - 1, c - 1) in powers of x
        let p = Polynomial::rising(1, c as usize - 1)
            .scale(&Rational::new(1.into(), factorial(u64::from(c) - 1)));
        (0..c as usize)
            .map(|t| real::from_rational(&p.coeff(t), bits))
            .collect()
    };

    let last_c = params.c[l - 1];
    let g = factor(l - 1);
    let mut f: Vec<Real> = if last_c == 0 {
        let mut v = vec![real::zero(bits); count];
        v[0] = g[0].clone();
        v
    } else {
        let poly = coupling_poly(last_c);
        g.iter()
            .enumerate()
            .map(|(idx, gn)| {
                let k = real::from_i64(idx as i64, bits);
                let mut val = real::zero(bits);
                for coef in poly.iter().rev() {
                    val = val * &k + coef;
                }
                gn * val
            })
            .collect()
    };

    for j in (0..l - 1).rev() {
        let g = factor(j);
        let c = params.c[j];
        if c == 0 {
            f = g.iter().zip(&f).map(|(a, b)| a * b).collect();
            continue;
        }
        let poly = coupling_poly(c);
        let deg = poly.len() - 1;
        // weights[e][t] = pi_t * C(t, e) * (-1)^e, so that
        // sum_m P(n - m) f(m) = sum_e sum_t weights[e][t] n^(t-e) S_e(n).
        let mut weights = vec![vec![real::zero(bits); deg + 1]; deg + 1];
        for t in 0..=deg {
            for e in 0..=t {
                let mut w = &poly[t] * real::from_integer(&binomial(t as u64, e as u64), bits);
                if e % 2 == 1 {
                    w = -w;
                }
                weights[e][t] = w;
            }
        }
        let mut sums = vec![real::zero(bits); deg + 1];
        let mut next = Vec::with_capacity(count);
        for (idx, (gn, fm)) in g.iter().zip(&f).enumerate() {
            let n = real::from_i64(idx as i64 + 1, bits);
            let mut mpow = fm.clone();
            for s in sums.iter_mut() {
                *s += &mpow;
                mpow *= &n;
            }
            let mut npow = vec![real::one(bits); deg + 1];
            for k in 1..=deg {
                npow[k] = &npow[k - 1] * &n;
            }
            let mut inner = real::zero(bits);
            for e in 0..=deg {
                for t in e..=deg {
                    inner += &weights[e][t] * &npow[t - e] * &sums[e];
                }
            }
            next.push(gn * inner);
        }
        f = next;
    }
    f
}

/// Expands `sum_s P_s(1/z) Le_s(z) + free(1/z)` through `z^order`. Every
/// negative power of `z` must cancel exactly; a leftover one means the form
/// cannot equal a power series.
pub fn linear_form_series(form: &LinearForm, order: usize) -> Result<SeriesWindow, Error> {
    let mut window = SeriesWindow::zero(order);
    let mut negative: BTreeMap<i64, Rational> = BTreeMap::new();
    let mut put = |power: i64, value: Rational| {
        if power < 0 {
            *negative.entry(power).or_insert_with(Rational::zero) += value;
        } else if power as usize <= order {
            window.coeffs[power as usize] += value;
        }
    };
    for (s, p) in form.terms() {
        let shift = p.degree().unwrap_or(0);
        let le = le_series(s, order + shift)?;
        for (k, c) in p.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            for (idx, v) in le.iter().enumerate() {
                put(idx as i64 + 1 - k as i64, c * v);
            }
        }
    }
    for (k, c) in form.free().coeffs().iter().enumerate() {
        put(-(k as i64), c.clone());
    }
    if let Some((&power, c)) = negative.iter().find(|(_, c)| !c.is_zero()) {
        return Err(Error::NegativePower {
            power,
            coefficient: rational_to_string(c),
        });
    }
    Ok(window)
}

/// A value obtained from partial sums at `z = 1`.
#[derive(Clone, Debug)]
pub struct Stabilized {
    pub value: Real,
    /// Relative difference between the last two estimates.
    pub agreement: f64,
    /// Number of terms behind the accepted estimate.
    pub truncation: usize,
}

/// Powers `N^-k` in the tail model.
const TAIL_POWERS: usize = 16;
/// Ratio between consecutive sample points.
const SAMPLE_RATIO: f64 = 1.1;

fn sample_points(n0: usize, count: usize) -> Vec<usize> {
    let mut points: Vec<usize> = Vec::with_capacity(count);
    let mut x = n0 as f64;
    while points.len() < count {
        let n = x.round() as usize;
        if points.last().is_none_or(|&p| n > p) {
            points.push(n);
        }
        x *= SAMPLE_RATIO;
    }
    points
}

/// Fits `A(N) = S + sum_{k>=1, j<=J} c_kj (N0/N)^k ln(N/N0)^j` to partial sums
/// `A(N)` at geometric sample points from `n0` and returns `S`.
fn extrapolate(partial: &[Real], n0: usize, log_powers: usize, bits: usize) -> Result<Real, Error> {
    let unknowns = 1 + TAIL_POWERS * (log_powers + 1);
    let points = sample_points(n0, unknowns);
    let base = real::from_i64(n0 as i64, bits);
    let ln_base = real::ln_int(n0 as u64, bits);
    let mut rows = Vec::with_capacity(unknowns);
    let mut rhs = Vec::with_capacity(unknowns);
    for &n in &points {
        let ratio = &base / real::from_i64(n as i64, bits);
        let log = real::ln_int(n as u64, bits) - &ln_base;
        let mut row = vec![real::one(bits)];
        let mut rpow = real::one(bits);
        for _ in 0..TAIL_POWERS {
            rpow *= &ratio;
            let mut lpow = rpow.clone();
            for _ in 0..=log_powers {
                row.push(lpow.clone());
                lpow *= &log;
            }
        }
        rows.push(row);
        rhs.push(partial[n - 1].clone());
    }
    Ok(real::solve_dense(rows, rhs)?.swap_remove(0))
}

/// Value of `sum_{n>=1} t_n` for a convergent series whose tail behaves like
/// `sum_k N^-k P_k(ln N)` with `deg P_k <= log_powers`.
///
/// `terms(count, bits)` must return `t_1 .. t_count`. Estimates are formed by
/// extrapolating partial sums from successively larger starting truncations
/// (growing by the context's factor) until two consecutive estimates agree to
/// the context's tolerance or the truncation budget is exhausted.
pub fn value_at_1_stabilized<F>(
    mut terms: F,
    log_powers: usize,
    ctx: &PrecisionContext,
) -> Result<Stabilized, Error>
where
    F: FnMut(usize, usize) -> Vec<Real>,
{
    ctx.validate()?;
    let bits = ctx.working_bits();
    let unknowns = 1 + TAIL_POWERS * (log_powers + 1);
    let tol = ctx.target_tolerance();
    let mut n0 = ctx.truncation_order;
    let mut previous: Option<Real> = None;
    let mut agreement = f64::NAN;
    loop {
        let next = n0 * ctx.stabilization_factor;
        let needed = *sample_points(next, unknowns).last().expect("nonempty");
        if needed > ctx.max_truncation {
            return Err(Error::NotStabilized {
                agreement,
                truncation: needed,
            });
        }
        let t = terms(needed, bits);
        let mut partial = Vec::with_capacity(t.len());
        let mut acc = real::zero(bits);
        for x in t {
            acc += x;
            partial.push(acc.clone());
        }
        let prev = match previous.take() {
            Some(p) => p,
            None => extrapolate(&partial, n0, log_powers, bits)?,
        };
        let current = extrapolate(&partial, next, log_powers, bits)?;
        agreement = real::relative_difference(&prev, &current);
        if agreement < tol {
            return Ok(Stabilized {
                value: current,
                agreement,
                truncation: needed,
            });
        }
        previous = Some(current);
        n0 = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_rational;
    use crate::polylog::MultiIndex;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn params(group_ends: &[usize], a: &[u32], b: &[u32], c: &[u32]) -> IntegralParams {
        IntegralParams {
            m: a.len(),
            group_ends: group_ends.to_vec(),
            a: a.to_vec(),
            b: b.to_vec(),
            c: c.to_vec(),
        }
    }

    /// Naive enumeration over all `n1 >= ... >= nl >= 1` with `n1 = n`.
    fn naive_coupled(p: &IntegralParams, n: usize) -> Rational {
        fn rec(p: &IntegralParams, level: usize, prev: usize, acc: Rational) -> Rational {
            let l = p.c.len();
            if level == l {
                return acc * coupling(p.c[l - 1], prev - 1);
            }
            (1..=prev)
                .map(|m| {
                    let w = coupling(p.c[level - 1], prev - m) * group_factor(p, level, m as i64);
                    rec(p, level + 1, m, &acc * w)
                })
                .sum()
        }
        rec(p, 1, n, group_factor(p, 0, n as i64))
    }

    #[test]
    fn window_basics() {
        let a = SeriesWindow::from_coeffs(vec![q("1"), q("2"), q("3")]).unwrap();
        let mut b = a.clone();
        assert_eq!(series_equal(&a, &b).unwrap(), None);
        b.coeffs[2] = q("4");
        assert_eq!(series_equal(&a, &b).unwrap(), Some(2));
        assert!(series_equal(&a, &SeriesWindow::zero(5)).is_err());
        assert_eq!(a.mul(&a).coeffs(), &[q("1"), q("4"), q("10")]);
    }

    #[test]
    fn differing_at_five() {
        let a = SeriesWindow::zero(8);
        let mut b = SeriesWindow::zero(8);
        b.coeffs[5] = q("1/7");
        assert_eq!(series_equal(&a, &b).unwrap(), Some(5));
    }

    #[test]
    fn coupled_examples() {
        let w = coupled_sum_series(&params(&[1], &[1], &[2], &[1]), 5);
        assert_eq!(
            w.coeffs(),
            &[q("1"), q("1/2"), q("1/3"), q("1/4"), q("1/5"), q("1/6")]
        );
        let w = coupled_sum_series(&params(&[1], &[1], &[3], &[2]), 4);
        for (k, c) in w.coeffs().iter().enumerate() {
            assert_eq!(*c, Rational::new(1.into(), (k as i64 + 2).into()));
        }
    }

    #[test]
    fn coupled_matches_naive() {
        let cases = [
            params(&[2, 3], &[1, 2, 1], &[3, 3, 2], &[1, 2]),
            params(&[1, 2], &[2, 1], &[4, 3], &[0, 2]),
            params(&[1, 2], &[1, 1], &[3, 2], &[2, 0]),
            params(&[2, 3], &[1, 1, 1], &[2, 2, 2], &[1, 1]),
        ];
        for p in &cases {
            let w = coupled_sum_series(p, 11);
            for n in 1..=12 {
                assert_eq!(w.coeffs()[n - 1], naive_coupled(p, n), "{p:?} n = {n}");
            }
        }
    }

    #[test]
    fn coupled_terms_match_exact() {
        let p = params(&[2, 3], &[2, 2, 2], &[4, 4, 4], &[3, 3]);
        let exact = coupled_sum_series(&p, 30);
        let approx = coupled_sum_terms(&p, 31, 300);
        for (e, a) in exact.coeffs().iter().zip(&approx) {
            assert!(real::relative_difference(a, &real::from_rational(e, 300)) < 1e-70);
        }
        let p = params(&[1, 2], &[1, 1], &[3, 2], &[0, 0]);
        let exact = coupled_sum_series(&p, 6);
        let approx = coupled_sum_terms(&p, 7, 200);
        for (e, a) in exact.coeffs().iter().zip(&approx) {
            assert_eq!(real::to_f64(a), real::to_f64(&real::from_rational(e, 200)));
        }
    }

    #[test]
    fn nested_engine_matches_naive() {
        let e = ElementarySum::new(vec![2, 1], vec![1, 3]).unwrap();
        let w = elementary_sum_series(&e, 11);
        for n in 1..=12i64 {
            let direct: Rational = (1..=n)
                .map(|m| inverse_power(n + 1, 2) * inverse_power(m + 3, 1))
                .sum();
            assert_eq!(w.coeffs()[n as usize - 1], direct);
        }
    }

    #[test]
    fn form_series_examples() {
        let text = r#"{"terms":[{"s":[1],"poly_w":["0","0","1"]}],"free":["0","-1"],"meta":{"m":1,"P":1}}"#;
        let form = LinearForm::from_json(text).unwrap();
        let w = linear_form_series(&form, 3).unwrap();
        assert_eq!(w.coeffs(), &[q("1/2"), q("1/3"), q("1/4"), q("1/5")]);

        let text = r#"{"terms":[{"s":[2],"poly_w":["0","1"]}],"free":[],"meta":{"m":2,"P":0}}"#;
        let w = linear_form_series(&LinearForm::from_json(text).unwrap(), 2).unwrap();
        assert_eq!(w.coeffs(), &[q("1"), q("1/4"), q("1/9")]);

        let text = r#"{"terms":[{"s":[1],"poly_w":["0","0","1"]}],"free":["0","-2"],"meta":{"m":1,"P":1}}"#;
        let err = linear_form_series(&LinearForm::from_json(text).unwrap(), 3).unwrap_err();
        assert!(matches!(err, Error::NegativePower { power: -1, .. }));
    }

    #[test]
    fn stabilizes_basel() {
        let ctx = PrecisionContext {
            digits: 30,
            ..PrecisionContext::default()
        };
        let s = MultiIndex::new(vec![2]).unwrap();
        let out = value_at_1_stabilized(
            |n, bits| crate::polylog::le_series_real(&s, n, bits),
            0,
            &ctx,
        )
        .unwrap();
        let expected = real::parse_decimal(
            "1.64493406684822643647241516664602518921894990120679843773556",
            400,
        )
        .unwrap();
        assert!(real::relative_difference(&out.value, &expected) < 1e-25);
        assert!(out.agreement < 1e-20);
    }

    #[test]
    fn harmonic_series_does_not_stabilize() {
        let ctx = PrecisionContext {
            digits: 20,
            max_truncation: 40_000,
            ..PrecisionContext::default()
        };
        let s = MultiIndex::new(vec![1]).unwrap();
        let out = value_at_1_stabilized(
            |n, bits| crate::polylog::le_series_real(&s, n, bits),
            0,
            &ctx,
        );
        assert!(matches!(out, Err(Error::NotStabilized { .. })));
    }
}
