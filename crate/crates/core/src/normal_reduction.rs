//! Delta-normal rational functions and the reduction of nested sums with
//! improper factors to sums whose factors are all proper.
//!
//! A Delta-normal function is
//!
//! ```text
//! R(x) = sum_{alpha, m} A_{m,alpha} / (x + alpha)^m + P(x)
//! ```
//!
//! with `D_Delta^(M-m) A_{m,alpha}` integral and `D_Delta^M P` integer-valued,
//! where `M` is the pole cap carried with the function.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    binomial, discrete_sum, discrete_sum_strict, divide_linear, lcm_upto, serde_rational, Integer,
    IntegerValuedPolynomial, Polynomial, Rational,
};
use crate::elementary::ElementarySum;
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DeltaNormalJson", into = "DeltaNormalJson")]
pub struct DeltaNormal {
    delta: u32,
    pole_cap: u32,
    fractions: BTreeMap<(u32, u32), Rational>,
    poly: Polynomial,
}

#[derive(Serialize, Deserialize)]
struct FractionJson {
    alpha: u32,
    m: u32,
    #[serde(with = "serde_rational")]
    coef: Rational,
}

#[derive(Serialize, Deserialize)]
struct DeltaNormalJson {
    delta: u32,
    pole_cap: u32,
    fractions: Vec<FractionJson>,
    poly: Polynomial,
}

impl From<DeltaNormal> for DeltaNormalJson {
    fn from(r: DeltaNormal) -> Self {
        Self {
            delta: r.delta,
            pole_cap: r.pole_cap,
            fractions: r
                .fractions
                .into_iter()
                .map(|((alpha, m), coef)| FractionJson { alpha, m, coef })
                .collect(),
            poly: r.poly,
        }
    }
}

impl TryFrom<DeltaNormalJson> for DeltaNormal {
    type Error = Error;

    fn try_from(raw: DeltaNormalJson) -> Result<Self, Error> {
        let fractions = raw
            .fractions
            .into_iter()
            .map(|f| ((f.alpha, f.m), f.coef))
            .collect();
        DeltaNormal::new(raw.delta, raw.pole_cap, fractions, raw.poly)
    }
}

/// `(y + d)^-nu` as a power series in `y`, truncated to `len` terms.
fn inverse_linear_series(d: i64, nu: u32, len: usize) -> Vec<Rational> {
    let d = Rational::from_integer(d.into());
    let mut out = Vec::with_capacity(len);
    let mut dpow = Rational::one();
    for _ in 0..nu {
        dpow /= &d;
    }
    for k in 0..len {
        let mag = Rational::from_integer(binomial(u64::from(nu) + k as u64 - 1, k as u64));
        let sign = if k % 2 == 0 {
            Rational::one()
        } else {
            -Rational::one()
        };
        out.push(sign * mag * &dpow);
        dpow /= &d;
    }
    out
}

fn truncated_product(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let len = a.len().min(b.len());
    (0..len)
        .map(|k| (0..=k).map(|i| &a[i] * &b[k - i]).sum())
        .collect()
}

impl DeltaNormal {
    pub fn new(
        delta: u32,
        pole_cap: u32,
        fractions: BTreeMap<(u32, u32), Rational>,
        poly: Polynomial,
    ) -> Result<Self, Error> {
        if pole_cap == 0 {
            return Err(Error::Domain("pole cap must be >= 1".into()));
        }
        if let Some(&(alpha, m)) = fractions.keys().find(|&&(_, m)| m == 0 || m > pole_cap) {
            return Err(Error::Domain(format!(
                "pole order {m} at x = -{alpha} outside 1..={pole_cap}"
            )));
        }
        let fractions = fractions
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .collect();
        Ok(Self {
            delta,
            pole_cap,
            fractions,
            poly,
        })
    }

    pub fn polynomial(delta: u32, pole_cap: u32, poly: Polynomial) -> Result<Self, Error> {
        Self::new(delta, pole_cap, BTreeMap::new(), poly)
    }

    /// Partial fractions of `constant / prod_alpha (x + alpha)^mult_alpha`,
    /// with the pole cap set to the largest multiplicity.
    pub fn from_linear_factors(
        delta: u32,
        constant: &Rational,
        mults: &BTreeMap<u32, u32>,
    ) -> Result<Self, Error> {
        let cap = mults.values().copied().max().unwrap_or(1).max(1);
        let mut fractions = BTreeMap::new();
        for (&alpha, &mu) in mults.iter().filter(|(_, &mu)| mu > 0) {
            let len = mu as usize;
            let mut series = vec![Rational::zero(); len];
            series[0] = constant.clone();
            for (&beta, &nu) in mults.iter().filter(|(&b, &nu)| b != alpha && nu > 0) {
                let d = i64::from(beta) - i64::from(alpha);
                series = truncated_product(&series, &inverse_linear_series(d, nu, len));
            }
            for m in 1..=mu {
                fractions.insert((alpha, m), series[(mu - m) as usize].clone());
            }
        }
        let poly = if mults.values().all(|&mu| mu == 0) {
            Polynomial::constant(constant.clone())
        } else {
            Polynomial::zero()
        };
        Self::new(delta, cap, fractions, poly)
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn pole_cap(&self) -> u32 {
        self.pole_cap
    }

    pub fn fractions(&self) -> &BTreeMap<(u32, u32), Rational> {
        &self.fractions
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.fractions.is_empty() && self.poly.is_zero()
    }

    pub fn fraction_part(&self) -> Self {
        Self {
            poly: Polynomial::zero(),
            ..self.clone()
        }
    }

    pub fn eval(&self, x: &Rational) -> Result<Rational, Error> {
        let mut acc = self.poly.eval(x);
        for (&(alpha, m), a) in &self.fractions {
            let base = x + Rational::from_integer(alpha.into());
            if base.is_zero() {
                return Err(Error::Pole(-i64::from(alpha)));
            }
            acc += a / num_traits::pow(base, m as usize);
        }
        Ok(acc)
    }

    pub fn eval_int(&self, x: i64) -> Result<Rational, Error> {
        self.eval(&Rational::from_integer(x.into()))
    }

    /// Common-denominator form `(N, D)` with `D = prod (x + alpha)^(max order at alpha)`.
    pub fn to_rational_function(&self) -> (Polynomial, Polynomial) {
        let mut orders: BTreeMap<u32, u32> = BTreeMap::new();
        for &(alpha, m) in self.fractions.keys() {
            let e = orders.entry(alpha).or_insert(0);
            *e = (*e).max(m);
        }
        let power = |alpha: u32, e: u32| {
            (0..e).fold(Polynomial::one(), |acc, _| {
                &acc * &Polynomial::linear(alpha.into())
            })
        };
        let den = orders
            .iter()
            .fold(Polynomial::one(), |acc, (&a, &e)| &acc * &power(a, e));
        let mut num = &self.poly * &den;
        for (&(alpha, m), c) in &self.fractions {
            let cofactor = orders.iter().fold(Polynomial::one(), |acc, (&b, &e)| {
                let e = if b == alpha { e - m } else { e };
                &acc * &power(b, e)
            });
            num = &num + &cofactor.scale(c);
        }
        (num, den)
    }

    /// `deg N - deg D` of the normalized quotient; `None` for the zero function.
    pub fn index(&self) -> Option<i64> {
        if let Some(d) = self.poly.degree() {
            return Some(d as i64);
        }
        let (num, den) = self.to_rational_function();
        Some(num.degree()? as i64 - den.degree().unwrap_or(0) as i64)
    }

    pub fn is_proper(&self) -> bool {
        self.index().is_none_or(|i| i < 0)
    }

    /// Whether the stored coefficients meet the `D_Delta` denominator contract.
    pub fn contract_holds(&self) -> bool {
        let d = lcm_upto(self.delta);
        let fractions_ok = self.fractions.iter().all(|(&(_, m), a)| {
            (a * Rational::from_integer(d.pow(self.pole_cap - m))).is_integer()
        });
        let scaled = self
            .poly
            .scale(&Rational::from_integer(d.pow(self.pole_cap)));
        fractions_ok && IntegerValuedPolynomial::from_power_basis(&scaled).is_integer_valued()
    }

    /// `R * T` for an integer-valued `T` of degree at most `Delta`, keeping the
    /// pole cap. Each fraction is split by repeated division by `x + alpha`.
    pub fn multiply_by_ivp(&self, t: &IntegerValuedPolynomial) -> Result<Self, Error> {
        if let Some(deg) = t.degree() {
            if deg > self.delta as usize {
                return Err(Error::DegreeBound {
                    degree: deg,
                    bound: self.delta as usize,
                });
            }
        }
        let tp = t.to_power_basis();
        let mut fractions: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        let mut poly = &self.poly * &tp;
        for (&(alpha, m), a) in &self.fractions {
            let mut rest = tp.clone();
            for order in (1..=m).rev() {
                let (value, quotient) = divide_linear(&rest, i64::from(alpha));
                *fractions
                    .entry((alpha, order))
                    .or_insert_with(Rational::zero) += a * value;
                rest = quotient;
            }
            poly = &poly + &rest.scale(a);
        }
        Self::new(self.delta, self.pole_cap, fractions, poly)
    }
}

/// `sum_{n1>=1} z^(n1-1) R_1(n1) sum_{n2=1}^{n1} R_2(n2) ... sum_{nl=1}^{n(l-1)} R_l(nl)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NestedSum {
    factors: Vec<DeltaNormal>,
}

impl NestedSum {
    pub fn new(factors: Vec<DeltaNormal>) -> Result<Self, Error> {
        let Some(first) = factors.first() else {
            return Err(Error::Domain("nested sum needs at least one factor".into()));
        };
        let delta = first.delta;
        if let Some(bad) = factors.iter().find(|f| f.delta != delta) {
            return Err(Error::DeltaMismatch {
                expected: delta,
                found: bad.delta,
            });
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[DeltaNormal] {
        &self.factors
    }

    pub fn depth(&self) -> usize {
        self.factors.len()
    }

    pub fn delta(&self) -> u32 {
        self.factors[0].delta
    }

    pub fn indices(&self) -> Vec<Option<i64>> {
        self.factors.iter().map(DeltaNormal::index).collect()
    }

    /// Checks that every prefix of `I(R_j) + 1` sums to at most 0 and every
    /// window to at most `Delta`. Windows containing a zero factor are vacuous.
    pub fn check_index_conditions(&self) -> Result<(), Error> {
        let idx = self.indices();
        let delta = i64::from(self.delta());
        for j1 in 0..idx.len() {
            let mut sum = 0i64;
            for (j2, i) in idx.iter().enumerate().skip(j1) {
                let Some(i) = i else { break };
                sum += i + 1;
                let bound = if j1 == 0 { 0 } else { delta };
                if sum > bound {
                    return Err(Error::IndexCondition {
                        j1: j1 + 1,
                        j2: j2 + 1,
                        sum,
                        bound,
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReducedTerm {
    #[serde(with = "serde_rational")]
    pub lambda: Rational,
    pub sum: NestedSum,
    pub weight_drop: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The improper factor replaced by its fraction part.
    Fraction,
    /// Polynomial part summed out and absorbed into the factor above.
    Upper,
    /// Polynomial part summed out and absorbed into the factor below.
    Lower,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionNode {
    #[serde(with = "serde_rational")]
    pub lambda: Rational,
    pub factors: Vec<DeltaNormal>,
    /// Position of the factor that was split, if any.
    pub split: Option<usize>,
    pub children: Vec<(Branch, ReductionNode)>,
}

impl ReductionNode {
    fn leaves<'a>(&'a self, out: &mut Vec<&'a ReductionNode>) {
        if self.split.is_none() {
            out.push(self);
        }
        for (_, child) in &self.children {
            child.leaves(out);
        }
    }
}

fn expand(lambda: Rational, factors: Vec<DeltaNormal>) -> Result<ReductionNode, Error> {
    let Some(j) = factors.iter().position(|f| !f.is_proper()) else {
        return Ok(ReductionNode {
            lambda,
            factors,
            split: None,
            children: vec![],
        });
    };
    if j == 0 {
        return Err(Error::IndexCondition {
            j1: 1,
            j2: 1,
            sum: factors[0].index().unwrap_or(0) + 1,
            bound: 0,
        });
    }
    let mut children = Vec::new();

    let frac = factors[j].fraction_part();
    if !frac.is_zero() {
        let mut next = factors.clone();
        next[j] = frac;
        children.push((Branch::Fraction, expand(lambda.clone(), next)?));
    }

    let r = &factors[j];
    let scale = Rational::from_integer(lcm_upto(r.delta).pow(r.pole_cap));
    let t = IntegerValuedPolynomial::from_power_basis(&r.poly.scale(&scale));
    let lam = &lambda / &scale;
    let mut rest = factors.clone();
    rest.remove(j);

    let mut upper = rest.clone();
    upper[j - 1] = upper[j - 1].multiply_by_ivp(&discrete_sum(&t))?;
    children.push((Branch::Upper, expand(lam.clone(), upper)?));

    if j + 1 < factors.len() {
        let mut lower = rest;
        lower[j] = lower[j].multiply_by_ivp(&discrete_sum_strict(&t))?;
        children.push((Branch::Lower, expand(-lam, lower)?));
    }

    Ok(ReductionNode {
        lambda,
        factors,
        split: Some(j),
        children,
    })
}

/// Full reduction tree, mainly for inspection (serializes to JSON).
pub fn reduce_tree(s: &NestedSum) -> Result<ReductionNode, Error> {
    s.check_index_conditions()?;
    expand(Rational::one(), s.factors.clone())
}

/// Rewrites `s` as `sum_i lambda_i F_i` with every factor of every `F_i` proper.
pub fn reduce(s: &NestedSum) -> Result<Vec<ReducedTerm>, Error> {
    let tree = reduce_tree(s)?;
    let total_cap: u32 = s.factors.iter().map(|f| f.pole_cap).sum();
    let mut leaves = Vec::new();
    tree.leaves(&mut leaves);
    let mut out = Vec::new();
    for leaf in leaves {
        if leaf.factors.iter().any(DeltaNormal::is_zero) {
            continue;
        }
        let cap: u32 = leaf.factors.iter().map(|f| f.pole_cap).sum();
        out.push(ReducedTerm {
            lambda: leaf.lambda.clone(),
            sum: NestedSum {
                factors: leaf.factors.clone(),
            },
            weight_drop: total_cap - cap,
        });
    }
    Ok(out)
}

/// Expands the product of proper factors into elementary sums with their
/// coefficients (products of the stored `A_{m,alpha}`).
pub fn to_elementary(term: &ReducedTerm) -> Result<Vec<(Rational, ElementarySum)>, Error> {
    let factors = term.sum.factors();
    if let Some(j) = factors.iter().position(|f| !f.poly.is_zero()) {
        return Err(Error::Structure(format!(
            "factor {} still has a polynomial part",
            j + 1
        )));
    }
    let mut partial: Vec<(Rational, Vec<u32>, Vec<u32>)> = vec![(Rational::one(), vec![], vec![])];
    for f in factors {
        let mut next = Vec::with_capacity(partial.len() * f.fractions.len());
        for (coef, u, p) in &partial {
            for (&(alpha, m), a) in &f.fractions {
                let mut u = u.clone();
                let mut p = p.clone();
                u.push(m);
                p.push(alpha);
                next.push((coef * a, u, p));
            }
        }
        partial = next;
    }
    let mut merged: BTreeMap<ElementarySum, Rational> = BTreeMap::new();
    for (coef, u, p) in partial {
        *merged
            .entry(ElementarySum::new(u, p)?)
            .or_insert_with(Rational::zero) += coef;
    }
    Ok(merged
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (c, e))
        .collect())
}

/// `D_Delta^w * x` integral.
pub fn clears(d: &Integer, w: u32, x: &Rational) -> bool {
    (x * Rational::from_integer(d.pow(w))).is_integer()
}
