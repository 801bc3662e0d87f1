//! Height growth: the two-sided factorial bound, the functions `phi` and `F`,
//! a deterministic maximizer of `F` on the unit cube, and tables of exact
//! heights against `M^n`.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{binomial, Integer, Rational};
use crate::elementary::Decomposer;
use crate::linear_form::{decompose_integral_with, vasilyev_params, IntegralParams};
use crate::Error;

/// A family whose parameters grow linearly in `n`:
/// `a_i = alpha_i n + alpha'_i`, `b_i = beta_i n + beta'_i`, `c_j = gamma_j n + gamma'_j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub group_ends: Vec<usize>,
    pub alpha: Vec<u32>,
    pub alpha_shift: Vec<u32>,
    pub beta: Vec<u32>,
    pub beta_shift: Vec<u32>,
    pub gamma: Vec<u32>,
    pub gamma_shift: Vec<u32>,
}

impl AsymptoticParams {
    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn groups(&self) -> usize {
        self.group_ends.len()
    }

    fn group_range(&self, j: usize) -> std::ops::Range<usize> {
        let start = if j == 0 { 0 } else { self.group_ends[j - 1] };
        start..self.group_ends[j]
    }

    pub fn check(&self) -> Result<(), Error> {
        let m = self.m();
        let per_var = [&self.alpha_shift, &self.beta, &self.beta_shift];
        if m == 0 || per_var.iter().any(|v| v.len() != m) {
            return Err(Error::Validation(format!("need {m} entries per variable")));
        }
        let l = self.groups();
        if l == 0 || self.gamma.len() != l || self.gamma_shift.len() != l {
            return Err(Error::Validation(format!(
                "need one gamma per group ({l} groups)"
            )));
        }
        if self.group_ends.last() != Some(&m)
            || self.group_ends[0] == 0
            || self.group_ends.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::Validation(format!(
                "bad group ends {:?}",
                self.group_ends
            )));
        }
        if self
            .alpha
            .iter()
            .chain(&self.beta)
            .chain(&self.gamma)
            .any(|&v| v == 0)
        {
            return Err(Error::Validation(
                "alpha, beta, gamma must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `h_j = min alpha_i` over group `j`.
    pub fn h(&self, j: usize) -> u32 {
        self.group_range(j)
            .map(|i| self.alpha[i])
            .min()
            .unwrap_or(0)
    }

    /// `H_j = max beta_i` over group `j`.
    pub fn big_h(&self, j: usize) -> u32 {
        self.group_range(j).map(|i| self.beta[i]).max().unwrap_or(0)
    }

    pub fn instantiate(&self, n: u32) -> Result<IntegralParams, Error> {
        self.check()?;
        let lin = |k: &[u32], c: &[u32]| {
            k.iter()
                .zip(c)
                .map(|(&k, &c)| k * n + c)
                .collect::<Vec<_>>()
        };
        let params = IntegralParams {
            m: self.m(),
            group_ends: self.group_ends.clone(),
            a: lin(&self.alpha, &self.alpha_shift),
            b: lin(&self.beta, &self.beta_shift),
            c: lin(&self.gamma, &self.gamma_shift),
        };
        params.check_structure()?;
        Ok(params)
    }
}

/// Profile of the odd-zeta family: `a = n+1`, `b = 2n+2`, `c = n+1`.
pub fn vasilyev_asymptotic(l: usize) -> AsymptoticParams {
    let m = 2 * l + 1;
    let mut group_ends: Vec<usize> = (1..=l).map(|j| 2 * j).collect();
    group_ends.push(m);
    AsymptoticParams {
        group_ends,
        alpha: vec![1; m],
        alpha_shift: vec![1; m],
        beta: vec![2; m],
        beta_shift: vec![2; m],
        gamma: vec![1; l + 1],
        gamma_shift: vec![1; l + 1],
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorialBounds {
    pub lower: Rational,
    pub upper: Rational,
    pub exact: Integer,
}

impl FactorialBounds {
    pub fn holds(&self) -> bool {
        let exact = Rational::from_integer(self.exact.clone());
        self.lower <= exact && exact <= self.upper
    }
}

/// `x^x` with `0^0 = 1`.
fn self_power(x: u64) -> Integer {
    num_traits::pow(BigInt::from(x), x as usize)
}

/// Bounds on `C(a+b, a)` from `(a+b)^(a+b) / (a^a b^b)`, exact rationals.
pub fn factorial_power_bounds(a: u64, b: u64) -> FactorialBounds {
    let upper = Rational::new(self_power(a + b), self_power(a) * self_power(b));
    let lower = &upper / Rational::from_integer(BigInt::from(a + b + 1));
    FactorialBounds {
        lower,
        upper,
        exact: binomial(a + b, a),
    }
}

/// `|t|^t` with the value 1 at `t = 0`.
fn abs_pow(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        t.abs().powf(t)
    }
}

/// `phi(x, y) = |x+y|^(x+y) |x|^(-x)`.
pub fn phi(x: f64, y: f64) -> f64 {
    abs_pow(x + y) / abs_pow(x)
}

/// The function whose maximum over `[0,1]^l` gives the growth constant `M`.
pub fn f_value(x: &[f64], p: &AsymptoticParams) -> Result<f64, Error> {
    let l = p.groups();
    if x.len() != l {
        return Err(Error::Domain(format!(
            "F takes {l} coordinates, got {}",
            x.len()
        )));
    }
    if let Some(t) = x.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::Domain(format!("coordinate {t} outside [0, 1]")));
    }
    Ok(f_unchecked(x, p))
}

fn f_unchecked(x: &[f64], p: &AsymptoticParams) -> f64 {
    let l = p.groups();
    // y_j = h_j + (H_j - h_j) x_j
    let y: Vec<f64> = (0..l)
        .map(|j| {
            let (h, big_h) = (f64::from(p.h(j)), f64::from(p.big_h(j)));
            h + (big_h - h) * x[j]
        })
        .collect();
    let mut value = 1.0;
    for j in 0..l {
        for i in p.group_range(j) {
            let q = f64::from(p.beta[i]) - f64::from(p.alpha[i]);
            value *= abs_pow(q) / phi(f64::from(p.alpha[i]) - y[j], q);
        }
        let g = f64::from(p.gamma[j]);
        let next = if j + 1 < l { y[j + 1] - y[j] } else { y[j] - g };
        value *= phi(next, g) / abs_pow(g);
    }
    value
}

/// Hypotheses of the coefficient bound at a given `n`: `c_1 <= q_1` and
/// `c_(j-1) + c_j <= q_j`. Returns `(j, lhs, rhs)` for every group (1-based).
pub fn upper_bound_conditions(params: &IntegralParams) -> Vec<(usize, i64, i64)> {
    (0..params.groups())
        .map(|j| {
            let c = |k: usize| i64::from(params.c[k]);
            let lhs = if j == 0 { c(0) } else { c(j - 1) + c(j) };
            (j + 1, lhs, params.q(j))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Maximum {
    pub value: f64,
    pub argmax: Vec<f64>,
}

fn grid_points(grid: usize, dims: usize) -> impl Iterator<Item = Vec<f64>> {
    let total = grid.pow(dims as u32);
    let step = 1.0 / (grid - 1) as f64;
    (0..total).map(move |mut k| {
        (0..dims)
            .map(|_| {
                let t = (k % grid) as f64 * step;
                k /= grid;
                t
            })
            .collect()
    })
}

/// Best value over the regular grid with `grid` points per axis, ties going
/// to the first point in enumeration order.
pub fn brute_force_grid(p: &AsymptoticParams, grid: usize) -> Result<Maximum, Error> {
    p.check()?;
    if grid < 2 {
        return Err(Error::Domain(
            "grid needs at least 2 points per axis".into(),
        ));
    }
    let mut best = Maximum {
        value: f64::NEG_INFINITY,
        argmax: vec![0.0; p.groups()],
    };
    for x in grid_points(grid, p.groups()) {
        let v = f_unchecked(&x, p);
        if v > best.value {
            best = Maximum {
                value: v,
                argmax: x,
            };
        }
    }
    Ok(best)
}

/// Grid search followed by coordinate pattern search with step halving down
/// to `tol`. Deterministic, and never below the grid maximum.
pub fn maximize_f(p: &AsymptoticParams, grid: usize, tol: f64) -> Result<Maximum, Error> {
    if grid < 8 {
        return Err(Error::Domain(format!("grid must be >= 8, got {grid}")));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let mut best = brute_force_grid(p, grid)?;
    let mut step = 1.0 / (grid - 1) as f64;
    while step >= tol {
        let mut improved = false;
        for j in 0..p.groups() {
            for dir in [1.0, -1.0] {
                let mut x = best.argmax.clone();
                x[j] = (x[j] + dir * step).clamp(0.0, 1.0);
                let v = f_unchecked(&x, p);
                if v > best.value {
                    best = Maximum {
                        value: v,
                        argmax: x,
                    };
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeightRow {
    pub n: u32,
    #[serde(with = "crate::algebra::serde_rational")]
    pub height: Rational,
    pub height_nth_root: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub ratio_log: f64,
}

fn ln_rational(r: &Rational) -> f64 {
    let ln = |i: &Integer| {
        // keep the leading 60 bits to stay within f64 range
        let bits = i.bits();
        let shift = bits.saturating_sub(60);
        (i >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
    };
    ln(&r.numer().abs()) - ln(r.denom())
}

pub fn height_row(n: u32, height: Rational, m: f64) -> HeightRow {
    let ln_h = if height.is_zero() {
        f64::NEG_INFINITY
    } else {
        ln_rational(&height)
    };
    let nf = f64::from(n);
    let (root, ratio) = if n == 0 {
        (f64::NAN, f64::NAN)
    } else {
        ((ln_h / nf).exp(), ln_h / (nf * m.ln()))
    };
    HeightRow {
        n,
        height,
        height_nth_root: root,
        m,
        ratio_log: ratio,
    }
}

/// Exact heights of the odd-zeta linear forms for each `n`, beside `M`.
pub fn empirical_height_growth(l: usize, ns: &[u32], m: f64) -> Result<Vec<HeightRow>, Error> {
    let mut engine = Decomposer::new();
    ns.iter()
        .map(|&n| {
            let (params, d) = vasilyev_params(l, n)?;
            let form = decompose_integral_with(&params, &d, &mut engine)?;
            Ok(height_row(n, form.max_height(), m))
        })
        .collect()
}

pub fn rows_to_csv(rows: &[HeightRow]) -> String {
    let mut out = String::from("n,height,height_nth_root,M,ratio_log\n");
    for r in rows {
        out += &format!(
            "{},{},{},{},{}\n",
            r.n,
            crate::algebra::rational_to_string(&r.height),
            r.height_nth_root,
            r.m,
            r.ratio_log
        );
    }
    out
}

/// Whether `ratio_log` stays below `cap` from `from_n` on and does not rise by
/// more than `slack` between consecutive rows there.
pub fn trend_holds(rows: &[HeightRow], from_n: u32, cap: f64, slack: f64) -> bool {
    let tail: Vec<f64> = rows
        .iter()
        .filter(|r| r.n >= from_n)
        .map(|r| r.ratio_log)
        .collect();
    tail.iter().all(|&r| r.is_finite() && r <= cap) && tail.windows(2).all(|w| w[1] <= w[0] + slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_rational;
    use num_traits::One;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn factorial_bound_examples() {
        let b = factorial_power_bounds(1, 1);
        assert_eq!((b.lower.clone(), b.upper.clone()), (q("4/3"), q("4")));
        assert_eq!(b.exact, BigInt::from(2));
        let b = factorial_power_bounds(0, 5);
        assert_eq!((b.lower.clone(), b.upper.clone()), (q("1/6"), q("1")));
        assert_eq!(b.exact, BigInt::one());
        let b = factorial_power_bounds(7, 11);
        assert_eq!(b.exact, BigInt::from(31824));
        assert!(b.holds());
        assert!(factorial_power_bounds(0, 0).holds());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(0.0, 2.0), 4.0);
        assert_eq!(phi(-1.0, 1.0), 1.0);
        assert!((phi(2.0, 1.0) - 6.75).abs() < 1e-14);
        assert_eq!(phi(0.0, 3.0), 27.0);
        assert!((phi(0.5, -0.5) - 0.5f64.powf(-0.5)).abs() < 1e-14);
    }

    #[test]
    fn f_vasilyev_corner() {
        let p = vasilyev_asymptotic(1);
        // x = (0,0): y = (1,1); groups give 1/phi(0,1)^3 = 1, couplings phi(0,1) phi(0,1) = 1
        assert!((f_value(&[0.0, 0.0], &p).unwrap() - 1.0).abs() < 1e-14);
        // x = (1,1): y = (2,2); each variable gives 1/phi(-1,1) = 1, couplings phi(0,1) phi(1,1) = 4
        assert!((f_value(&[1.0, 1.0], &p).unwrap() - 4.0).abs() < 1e-14);
        assert!(f_value(&[1.5, 0.0], &p).is_err());
        assert!(f_value(&[0.5], &p).is_err());
    }

    #[test]
    fn f_is_continuous_inside() {
        let p = vasilyev_asymptotic(1);
        let x = [0.3, 0.7];
        let f0 = f_value(&x, &p).unwrap();
        for delta in [1e-4, 1e-6, 1e-8] {
            let f1 = f_value(&[0.3 + delta, 0.7], &p).unwrap();
            assert!((f1 - f0).abs() < 1e3 * delta);
        }
    }

    #[test]
    fn maximizer_dominates_random_points() {
        let p = vasilyev_asymptotic(1);
        let best = maximize_f(&p, 64, 1e-12).unwrap();
        assert!((best.value - 51.98).abs() < 0.01, "{}", best.value);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            assert!(f_value(&x, &p).unwrap() <= best.value);
        }
        let grid = brute_force_grid(&p, 64).unwrap();
        assert!(best.value >= grid.value);
        assert_eq!(best, maximize_f(&p, 64, 1e-12).unwrap());
    }

    #[test]
    fn constant_f_stays_at_origin() {
        // alpha = beta, so every factor is 1
        let p = AsymptoticParams {
            group_ends: vec![1],
            alpha: vec![1],
            alpha_shift: vec![1],
            beta: vec![1],
            beta_shift: vec![3],
            gamma: vec![1],
            gamma_shift: vec![1],
        };
        let best = maximize_f(&p, 8, 1e-6).unwrap();
        assert_eq!(best.argmax, vec![0.0]);
        assert!((best.value - f_value(&[0.5], &p).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn conditions_report_for_odd_zeta_family() {
        let p = vasilyev_asymptotic(1);
        // the last group has one variable, so c_1 + c_2 = 2n+2 exceeds q_2 = n+1
        let params = p.instantiate(0).unwrap();
        assert_eq!(upper_bound_conditions(&params), vec![(1, 1, 2), (2, 2, 1)]);
        let params = p.instantiate(2).unwrap();
        let conds = upper_bound_conditions(&params);
        assert_eq!(conds[1], (2, 6, 3));
    }

    #[test]
    fn height_rows() {
        let row = height_row(3, Rational::one(), 50.0);
        assert_eq!(row.height_nth_root, 1.0);
        assert_eq!(row.ratio_log, 0.0);
        let big = Rational::from_integer(num_traits::pow(BigInt::from(10), 400));
        let row = height_row(100, big, 10.0);
        assert!((row.ratio_log - 4.0).abs() < 1e-12);
        let rows = empirical_height_growth(1, &[1, 2], 52.0).unwrap();
        assert!(rows.iter().all(|r| r.height >= Rational::one()));
        let csv = rows_to_csv(&rows);
        assert!(csv.starts_with("n,height,height_nth_root,M,ratio_log\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
