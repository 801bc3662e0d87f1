//! The multiple-integral family
//!
//! ```text
//! S(z) = int_[0,1]^m prod_i x_i^(a_i-1) (1-x_i)^(b_i-a_i-1)
//!        / prod_j (1 - z x_1...x_(r_j))^(c_j) dx
//! ```
//!
//! and its exact decomposition: shift trick, coupled nested-sum
//! representation, reduction to proper factors, elementary sums, linear form.
//! Also the odd-zeta family with `a_i = n+1`, `b_i = 2n+2`, `c_j = n+1`.

use std::collections::BTreeMap;
use std::ops::Range;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{
    binomial, factorial, lcm_upto, IntegerValuedPolynomial, Polynomial, Rational,
};
use crate::elementary::{Decomposer, ElementarySum};
use crate::form::{FormMeta, LinearForm};
use crate::normal_reduction::{reduce, to_elementary, DeltaNormal, NestedSum};
use crate::oracle::{coupled_sum_terms, value_at_1_stabilized, Stabilized};
use crate::polylog::{zeta_numeric, MultiIndex, PrecisionContext};
use crate::real::{self, Real};
use crate::Error;

/// Parameters of `S(z)`. Variables are 0-based; group `j` holds the variables
/// `group_ends[j-1] .. group_ends[j]` (with an implicit leading 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegralParams {
    pub m: usize,
    pub group_ends: Vec<usize>,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub c: Vec<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShiftVector {
    pub d: Vec<u32>,
}

impl ShiftVector {
    pub fn zero(groups: usize) -> Self {
        Self { d: vec![0; groups] }
    }
}

/// The on-disk parameter file: the integral parameters plus an optional shift.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsFile {
    #[serde(flatten)]
    pub params: IntegralParams,
    #[serde(default)]
    pub d: Vec<u32>,
}

impl ParamsFile {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        let mut file: ParamsFile = serde_json::from_str(text)?;
        file.params.check_structure()?;
        if file.d.is_empty() {
            file.d = vec![0; file.params.groups()];
        }
        Ok(file)
    }

    pub fn shift(&self) -> ShiftVector {
        ShiftVector { d: self.d.clone() }
    }
}

impl IntegralParams {
    pub fn check_structure(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::Validation(msg));
        if self.m == 0 || self.a.len() != self.m || self.b.len() != self.m {
            return bad(format!("need m >= 1 and {} entries in a and b", self.m));
        }
        if self.group_ends.is_empty() || self.group_ends.last() != Some(&self.m) {
            return bad(format!(
                "group ends {:?} must finish at m = {}",
                self.group_ends, self.m
            ));
        }
        if self.group_ends.windows(2).any(|w| w[0] >= w[1]) || self.group_ends[0] == 0 {
            return bad(format!(
                "group ends {:?} must be strictly increasing from >= 1",
                self.group_ends
            ));
        }
        if self.c.len() != self.group_ends.len() {
            return bad(format!(
                "need one c per group, got {} for {}",
                self.c.len(),
                self.group_ends.len()
            ));
        }
        if let Some(i) = (0..self.m).find(|&i| self.a[i] < 1 || self.b[i] <= self.a[i]) {
            return bad(format!(
                "variable {}: need b > a >= 1, got a = {}, b = {}",
                i + 1,
                self.a[i],
                self.b[i]
            ));
        }
        Ok(())
    }

    pub fn groups(&self) -> usize {
        self.group_ends.len()
    }

    pub fn group_range(&self, j: usize) -> Range<usize> {
        let start = if j == 0 { 0 } else { self.group_ends[j - 1] };
        start..self.group_ends[j]
    }

    /// `q_j = sum over group j of (b_i - a_i)`.
    pub fn q(&self, j: usize) -> i64 {
        self.group_range(j)
            .map(|i| i64::from(self.b[i]) - i64::from(self.a[i]))
            .sum()
    }

    /// `P = max b_i - 2`.
    pub fn max_shift(&self) -> i64 {
        self.b.iter().map(|&b| i64::from(b) - 2).max().unwrap_or(0)
    }

    /// `D_j = sum_{k >= j} d_k` per group.
    fn suffix_shifts(&self, d: &ShiftVector) -> Vec<u32> {
        let mut out = vec![0; self.groups()];
        let mut acc = 0;
        for j in (0..self.groups()).rev() {
            acc += d.d.get(j).copied().unwrap_or(0);
            out[j] = acc;
        }
        out
    }

    /// `Delta = max_i (b_i - D_(group of i) - 2)`.
    pub fn shifted_delta(&self, d: &ShiftVector) -> i64 {
        let suffix = self.suffix_shifts(d);
        (0..self.groups())
            .flat_map(|j| self.group_range(j).map(move |i| (i, j)))
            .map(|(i, j)| i64::from(self.b[i]) - i64::from(suffix[j]) - 2)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidationMode {
    Unshifted,
    Shifted(ShiftVector),
}

/// One inequality `lhs <= rhs`, with the groups `j1..=j2` (1-based) it concerns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub j1: usize,
    pub j2: usize,
    pub lhs: i64,
    pub rhs: i64,
    pub ok: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub delta: i64,
    pub checks: Vec<Check>,
    pub structure: Option<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.structure.is_none() && self.checks.iter().all(|c| c.ok)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.ok).collect()
    }

    fn push(&mut self, name: &'static str, (j1, j2): (usize, usize), lhs: i64, rhs: i64) {
        self.checks.push(Check {
            name,
            j1,
            j2,
            lhs,
            rhs,
            ok: lhs <= rhs,
        });
    }

    fn summary(&self) -> String {
        if let Some(s) = &self.structure {
            return s.clone();
        }
        self.failures()
            .iter()
            .map(|c| format!("{} at ({}, {}): {} > {}", c.name, c.j1, c.j2, c.lhs, c.rhs))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Checks every hypothesis individually. In `Unshifted` mode the scale is
/// `Delta = P` and `c_j = 0` is allowed; in `Shifted` mode the scale is the
/// shifted `Delta`, `c_j >= 1` is required and the shift itself is checked.
pub fn validate(params: &IntegralParams, mode: &ValidationMode) -> ValidationReport {
    let mut report = ValidationReport::default();
    if let Err(e) = params.check_structure() {
        report.structure = Some(e.to_string());
        return report;
    }
    let l = params.groups();
    let delta = match mode {
        ValidationMode::Unshifted => params.max_shift(),
        ValidationMode::Shifted(d) => {
            if d.d.len() != l {
                report.structure = Some(format!("shift has {} entries for {l} groups", d.d.len()));
                return report;
            }
            params.shifted_delta(d)
        }
    };
    report.delta = delta;
    let c = |j: usize| i64::from(params.c[j]);

    for j in 0..l {
        if matches!(mode, ValidationMode::Shifted(_)) {
            report.push("c_lower", (j + 1, j + 1), 1, c(j));
        }
        report.push("c_upper", (j + 1, j + 1), c(j), delta + 1);
    }
    let (mut cs, mut qs) = (0, 0);
    for j in 0..l {
        cs += c(j);
        qs += params.q(j);
        report.push("prefix", (1, j + 1), cs, qs);
    }
    for j1 in 1..l {
        let mut lhs = c(j1 - 1);
        for j2 in j1..l {
            lhs += c(j2) - params.q(j2);
            report.push("window", (j1 + 1, j2 + 1), lhs, delta + 1);
        }
    }
    if let ValidationMode::Shifted(d) = mode {
        let suffix = params.suffix_shifts(d);
        for j in 0..l {
            report.push("shift_cap", (j + 1, j + 1), i64::from(d.d[j]), c(j));
            for i in params.group_range(j) {
                report.push(
                    "shift_exponent",
                    (j + 1, j + 1),
                    i64::from(suffix[j]),
                    i64::from(params.a[i]) - 1,
                );
            }
        }
    }
    report
}

/// `S(z)` as `constant + sum_i scalar_i * NestedSum_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumRepresentation {
    pub delta: u32,
    pub constant: Rational,
    pub branches: Vec<(Rational, NestedSum)>,
}

/// `Gamma(b - a) Gamma(a) / Gamma(b)`: a group evaluated at `n = 1`.
fn beta_at_one(params: &IntegralParams, group: usize) -> Rational {
    params
        .group_range(group)
        .map(|i| {
            let (a, b) = (u64::from(params.a[i]), u64::from(params.b[i]));
            Rational::new(factorial(b - a - 1) * factorial(a - 1), factorial(b - 1))
        })
        .product()
}

/// Nested-sum form of `S(z)` with `Delta = P`.
///
/// Each coupling weight `C(k + c - 1, c - 1)` between consecutive levels is
/// split by the binomial identity into products `p1(n_j) p2(n_(j+1))` of
/// integer-valued polynomials, so each branch has factors in one variable.
/// A group with `c_j = 0` forces `n_j = n_(j+1)` and merges into the next
/// level; a trailing such block is evaluated at `n = 1`.
pub fn sum_representation(params: &IntegralParams) -> Result<SumRepresentation, Error> {
    let report = validate(params, &ValidationMode::Unshifted);
    if !report.passed() {
        return Err(Error::Validation(report.summary()));
    }
    let delta = u32::try_from(params.max_shift()).expect("b > a >= 1");

    let mut blocks: Vec<(Vec<usize>, u32)> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for j in 0..params.groups() {
        open.push(j);
        if params.c[j] > 0 {
            blocks.push((std::mem::take(&mut open), params.c[j]));
        }
    }
    let kappa: Rational = open.iter().map(|&g| beta_at_one(params, g)).product();
    if blocks.is_empty() {
        return Ok(SumRepresentation {
            delta,
            constant: kappa,
            branches: vec![],
        });
    }

    let bases = blocks
        .iter()
        .map(|(groups, _)| {
            let mut mults = BTreeMap::new();
            let mut constant = Rational::one();
            for &g in groups {
                for i in params.group_range(g) {
                    let (a, b) = (params.a[i], params.b[i]);
                    constant *= Rational::from_integer(factorial(u64::from(b - a - 1)));
                    for t in a - 1..=b - 2 {
                        *mults.entry(t).or_insert(0u32) += 1;
                    }
                }
            }
            DeltaNormal::from_linear_factors(delta, &constant, &mults)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let cs: Vec<u32> = blocks.iter().map(|(_, c)| *c).collect();
    let mut branches = Vec::new();
    let mut k = vec![0u32; cs.len()];
    loop {
        let mut factors = Vec::with_capacity(cs.len());
        for t in 0..cs.len() {
            let p1 = IntegerValuedPolynomial::shifted_binomial(
                u64::from(cs[t] - 1),
                (cs[t] - 1 - k[t]) as usize,
            );
            let mut r = bases[t].multiply_by_ivp(&p1)?;
            if t > 0 && k[t - 1] > 0 {
                let p2 = IntegerValuedPolynomial::shifted_binomial(
                    u64::from(k[t - 1] - 1),
                    k[t - 1] as usize,
                );
                r = r.multiply_by_ivp(&p2)?;
            }
            factors.push(r);
        }
        let sign = if k.iter().sum::<u32>() % 2 == 0 {
            kappa.clone()
        } else {
            -kappa.clone()
        };
        branches.push((sign, NestedSum::new(factors)?));

        // odometer over k_t in 0..c_t
        let mut t = 0;
        loop {
            if t == k.len() {
                return Ok(SumRepresentation {
                    delta,
                    constant: Rational::zero(),
                    branches,
                });
            }
            k[t] += 1;
            if k[t] < cs[t] {
                break;
            }
            k[t] = 0;
            t += 1;
        }
    }
}

/// One term `coef * w^w_power * S(params)` of the shift expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftedTerm {
    pub coef: Rational,
    pub w_power: u32,
    pub params: IntegralParams,
}

/// Expands `(x_1 ... x_(r_j))^(d_j) = ((1 - (1 - z x_1 ... x_(r_j))) / z)^(d_j)`
/// binomially; each term lowers `a_i, b_i` by the shifts of the enclosing
/// products and `c_j` by the chosen power.
pub fn apply_shift(params: &IntegralParams, d: &ShiftVector) -> Result<Vec<ShiftedTerm>, Error> {
    params.check_structure()?;
    let l = params.groups();
    if d.d.len() != l {
        return Err(Error::Validation(format!(
            "shift has {} entries for {l} groups",
            d.d.len()
        )));
    }
    if let Some(j) = (0..l).find(|&j| d.d[j] > params.c[j]) {
        return Err(Error::Validation(format!(
            "d_{} = {} exceeds c = {}",
            j + 1,
            d.d[j],
            params.c[j]
        )));
    }
    let suffix = params.suffix_shifts(d);
    let mut a = params.a.clone();
    let mut b = params.b.clone();
    for j in 0..l {
        for i in params.group_range(j) {
            if suffix[j] >= a[i] {
                return Err(Error::Validation(format!(
                    "shift {} on group {} reaches a_{} = {}",
                    suffix[j],
                    j + 1,
                    i + 1,
                    a[i]
                )));
            }
            a[i] -= suffix[j];
            b[i] -= suffix[j];
        }
    }
    let w_power = d.d.iter().sum();
    let mut out = Vec::new();
    let mut e = vec![0u32; l];
    loop {
        let mut coef = Rational::one();
        for j in 0..l {
            let mut term = Rational::from_integer(binomial(u64::from(d.d[j]), u64::from(e[j])));
            if e[j] % 2 == 1 {
                term = -term;
            }
            coef *= term;
        }
        let c = params.c.iter().zip(&e).map(|(c, e)| c - e).collect();
        out.push(ShiftedTerm {
            coef,
            w_power,
            params: IntegralParams {
                m: params.m,
                group_ends: params.group_ends.clone(),
                a: a.clone(),
                b: b.clone(),
                c,
            },
        });
        let mut j = 0;
        loop {
            if j == l {
                return Ok(out);
            }
            e[j] += 1;
            if e[j] <= d.d[j] {
                break;
            }
            e[j] = 0;
            j += 1;
        }
    }
}

/// Full pipeline with a caller-provided elementary-sum engine.
pub fn decompose_integral_with(
    params: &IntegralParams,
    d: &ShiftVector,
    engine: &mut Decomposer,
) -> Result<LinearForm, Error> {
    let report = validate(params, &ValidationMode::Shifted(d.clone()));
    if !report.passed() {
        return Err(Error::Validation(report.summary()));
    }
    let delta = u32::try_from(report.delta).map_err(|_| Error::Validation("Delta < 0".into()))?;
    // Every shifted term carries the same power w^(sum d), so coefficients of
    // identical elementary sums can be pooled before decomposing.
    let mut pooled: BTreeMap<ElementarySum, Rational> = BTreeMap::new();
    let mut constant = Rational::zero();
    let mut w_power = 0;
    for shifted in apply_shift(params, d)? {
        w_power = shifted.w_power as usize;
        let rep = sum_representation(&shifted.params)?;
        constant += &rep.constant * &shifted.coef;
        for (scalar, sum) in &rep.branches {
            let outer = scalar * &shifted.coef;
            for term in reduce(sum)? {
                let lam = &outer * &term.lambda;
                for (coef, e) in to_elementary(&term)? {
                    *pooled.entry(e).or_insert_with(Rational::zero) += &lam * coef;
                }
            }
        }
    }
    let mut form = LinearForm::new(FormMeta {
        m: params.m as u32,
        p: delta,
    });
    form.add_free(&Polynomial::monomial(constant, w_power));
    for (e, coef) in pooled.iter().filter(|(_, c)| !c.is_zero()) {
        form.add_scaled(&engine.decompose(e), coef, w_power);
    }
    Ok(form)
}

/// `S(z)` as a linear form in `Le_s(z)`; requires the shifted hypotheses.
pub fn decompose_integral(params: &IntegralParams, d: &ShiftVector) -> Result<LinearForm, Error> {
    decompose_integral_with(params, d, &mut Decomposer::new())
}

/// Parameters of the `(2l+1)`-fold odd-zeta integral with `l + 1` denominator
/// groups ending at `2, 4, ..., 2l, 2l+1`, and the shift `(0, ..., 0, n)`.
pub fn vasilyev_params(l: usize, n: u32) -> Result<(IntegralParams, ShiftVector), Error> {
    if l == 0 {
        return Err(Error::Domain("the odd-zeta family needs l >= 1".into()));
    }
    let m = 2 * l + 1;
    let mut group_ends: Vec<usize> = (1..=l).map(|j| 2 * j).collect();
    group_ends.push(m);
    let params = IntegralParams {
        m,
        group_ends,
        a: vec![n + 1; m],
        b: vec![2 * n + 2; m],
        c: vec![n + 1; l + 1],
    };
    let mut d = vec![0; l + 1];
    d[l] = n;
    Ok((params, ShiftVector { d }))
}

pub fn vasilyev_form(l: usize, n: u32) -> Result<LinearForm, Error> {
    let (params, d) = vasilyev_params(l, n)?;
    decompose_integral(&params, &d)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    /// Every index is `(2,...,2,1)` with at most `l` twos or `(1,2,...,2,1)`
    /// with at most `l - 1` twos.
    pub indices: bool,
    /// The coefficients of the divergent indices vanish at `w = 1`.
    pub divergent_vanish: bool,
    /// `D_n^(2l+1)` clears every polynomial.
    pub uniform_clearing: bool,
    /// `D_n^(m - w(s))` clears each polynomial.
    pub graded_clearing: bool,
    pub failures: Vec<String>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.indices && self.divergent_vanish && self.uniform_clearing && self.graded_clearing
    }
}

pub fn vasilyev_structure_check(form: &LinearForm, l: usize, n: u32) -> StructureReport {
    let mut report = StructureReport {
        indices: true,
        divergent_vanish: true,
        uniform_clearing: true,
        graded_clearing: true,
        failures: vec![],
    };
    let allowed: Vec<MultiIndex> = (0..=l)
        .map(MultiIndex::twos_then_one)
        .chain((0..l).map(MultiIndex::one_twos_one))
        .collect();
    let one = Rational::one();
    for (s, p) in form.terms() {
        if !allowed.contains(s) {
            report.indices = false;
            report.failures.push(format!("unexpected index {s}"));
        }
        if s.entries()[0] == 1 {
            let at_one = p.eval(&one);
            if !at_one.is_zero() {
                report.divergent_vanish = false;
                report
                    .failures
                    .push(format!("coefficient of Le{s} is {at_one} at w = 1"));
            }
        }
    }
    let d = lcm_upto(n);
    if let Err(f) = form.check_uniform_clearing(&d, 2 * l as u32 + 1) {
        report.uniform_clearing = false;
        report
            .failures
            .push(format!("D_{n}^{} fails on {:?}", f.exponent, f.index));
    }
    let mut graded = form.clone();
    graded.set_meta(FormMeta {
        m: 2 * l as u32 + 1,
        p: n,
    });
    if let Err(f) = graded.check_graded_clearing(&d) {
        report.graded_clearing = false;
        report
            .failures
            .push(format!("D_{n}^{} fails on {:?}", f.exponent, f.index));
    }
    report
}

/// Value of the odd-zeta integral at `z = 1`.
#[derive(Clone, Debug)]
pub struct VasilyevValue {
    pub form: LinearForm,
    /// `(k, r)`: the value contains `r * zeta(2k + 1)`.
    pub zeta_coefficients: Vec<(u32, Rational)>,
    /// The free polynomial at `w = 1`.
    pub free_value: Rational,
    pub numeric: Real,
}

/// Limit `z -> 1-` of the form: `sum_k 2 P_k(1) zeta(2k+1) + free(1)`, using
/// `Le_(2,...,2,1)(1) = 2 zeta(2k+1)`.
pub fn value_at_one(
    form: &LinearForm,
    l: usize,
    n: u32,
    ctx: &PrecisionContext,
) -> Result<VasilyevValue, Error> {
    let report = vasilyev_structure_check(form, l, n);
    if !report.indices || !report.divergent_vanish {
        return Err(Error::Structure(report.failures.join("; ")));
    }
    let one = Rational::one();
    let bits = ctx.working_bits();
    let free_value = form.free().eval(&one);
    let mut numeric = real::from_rational(&free_value, bits);
    let mut zeta_coefficients = Vec::new();
    for k in 1..=l {
        let s = MultiIndex::twos_then_one(k);
        let coef = form.get(&s).map_or_else(Rational::zero, |p| p.eval(&one))
            * Rational::from_integer(2.into());
        if !coef.is_zero() {
            numeric += real::from_rational(&coef, bits) * zeta_numeric(2 * k as u32 + 1, ctx)?;
        }
        zeta_coefficients.push((k as u32, coef));
    }
    Ok(VasilyevValue {
        form: form.clone(),
        zeta_coefficients,
        free_value,
        numeric,
    })
}

pub fn vasilyev_value(l: usize, n: u32, ctx: &PrecisionContext) -> Result<VasilyevValue, Error> {
    value_at_one(&vasilyev_form(l, n)?, l, n, ctx)
}

/// Independent numeric value of `S(1)` from the coupled sum itself.
pub fn integral_value_at_1(
    params: &IntegralParams,
    ctx: &PrecisionContext,
) -> Result<Stabilized, Error> {
    params.check_structure()?;
    value_at_1_stabilized(
        |count, bits| coupled_sum_terms(params, count, bits),
        params.groups() - 1,
        ctx,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_rational;
    use crate::oracle::{
        coupled_sum_series, linear_form_series, nested_sum_series, series_equal, SeriesWindow,
    };

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

    fn representation_series(rep: &SumRepresentation, order: usize) -> SeriesWindow {
        let mut acc = SeriesWindow::zero(order);
        let mut constant = SeriesWindow::zero(order);
        constant_set(&mut constant, &rep.constant);
        acc.add_scaled(&constant, &Rational::one());
        for (s, sum) in &rep.branches {
            acc.add_scaled(&nested_sum_series(sum, order).unwrap(), s);
        }
        acc
    }

    fn constant_set(w: &mut SeriesWindow, c: &Rational) {
        let mut coeffs = w.coeffs().to_vec();
        coeffs[0] = c.clone();
        *w = SeriesWindow::from_coeffs(coeffs).unwrap();
    }

    #[test]
    fn validation_examples() {
        let (p, d) = vasilyev_params(1, 1).unwrap();
        assert_eq!(d.d, vec![0, 1]);
        assert!(validate(&p, &ValidationMode::Shifted(d)).passed());

        let p = params(&[1], &[1], &[2], &[2]);
        let r = validate(&p, &ValidationMode::Unshifted);
        let f = r.failures();
        assert!(f.iter().any(|c| c.name == "prefix" && c.j2 == 1));

        let p = params(&[1, 2], &[1, 2], &[3, 4], &[0, 0]);
        assert!(validate(&p, &ValidationMode::Unshifted).passed());
    }

    #[test]
    fn vasilyev_parameter_shapes() {
        let (p, d) = vasilyev_params(1, 0).unwrap();
        assert_eq!((p.m, p.group_ends.clone()), (3, vec![2, 3]));
        assert_eq!(p.shifted_delta(&d), 0);
        let (p, d) = vasilyev_params(2, 1).unwrap();
        assert_eq!((p.m, p.group_ends.clone()), (5, vec![2, 4, 5]));
        assert_eq!(p.shifted_delta(&d), 1);
        let (p, d) = vasilyev_params(1, 3).unwrap();
        assert_eq!(p.shifted_delta(&d), 3);
        assert_eq!((p.q(0), p.q(1)), (8, 4));
        assert_eq!(p.c, vec![4, 4]);
        assert!(validate(&p, &ValidationMode::Shifted(d)).passed());
    }

    #[test]
    fn representation_examples() {
        let p = params(&[1], &[1], &[2], &[1]);
        let rep = sum_representation(&p).unwrap();
        assert_eq!(rep.branches.len(), 1);
        assert_eq!(rep.branches[0].0, q("1"));
        assert_eq!(
            nested_sum_series(&rep.branches[0].1, 4).unwrap(),
            coupled_sum_series(&p, 4)
        );

        let p = params(&[1], &[1], &[3], &[2]);
        let rep = sum_representation(&p).unwrap();
        let signs: Vec<_> = rep.branches.iter().map(|(s, _)| s.clone()).collect();
        assert_eq!(signs, vec![q("1"), q("-1")]);
        assert_eq!(representation_series(&rep, 30), coupled_sum_series(&p, 30));

        let (p, _) = vasilyev_params(1, 0).unwrap();
        let rep = sum_representation(&p).unwrap();
        assert_eq!(representation_series(&rep, 30), coupled_sum_series(&p, 30));
        for (s, _) in &rep.branches {
            assert!(s == &q("1") || s == &q("-1"));
        }
    }

    #[test]
    fn representation_with_zero_couplings() {
        for p in [
            params(&[1], &[2], &[4], &[0]),
            params(&[1, 2], &[1, 2], &[3, 4], &[0, 1]),
            params(&[1, 2], &[2, 1], &[4, 3], &[1, 0]),
            params(&[1, 2, 3], &[1, 1, 2], &[3, 2, 4], &[1, 0, 1]),
        ] {
            let rep = sum_representation(&p).unwrap();
            assert_eq!(
                representation_series(&rep, 25),
                coupled_sum_series(&p, 25),
                "{p:?}"
            );
        }
    }

    #[test]
    fn shift_examples() {
        let p = params(&[1], &[2], &[4], &[1]);
        let id = apply_shift(&p, &ShiftVector::zero(1)).unwrap();
        assert_eq!(
            id,
            vec![ShiftedTerm {
                coef: q("1"),
                w_power: 0,
                params: p.clone()
            }]
        );

        let out = apply_shift(&p, &ShiftVector { d: vec![1] }).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(
            out.iter().map(|t| t.params.c[0]).collect::<Vec<_>>(),
            vec![1, 0]
        );
        assert_eq!(
            out.iter().map(|t| t.coef.clone()).collect::<Vec<_>>(),
            vec![q("1"), q("-1")]
        );
        assert!(out
            .iter()
            .all(|t| t.params.a == vec![1] && t.params.b == vec![3] && t.w_power == 1));

        let (p, d) = vasilyev_params(2, 2).unwrap();
        for t in apply_shift(&p, &d).unwrap() {
            assert!(t.params.a.iter().all(|&a| a == 1));
            assert!(t.params.b.iter().all(|&b| b == 4));
            assert_eq!(t.params.max_shift(), 2);
        }
        assert!(apply_shift(&p, &ShiftVector { d: vec![0, 0, 3] }).is_err());
    }

    /// `sum coef * w^k * series(S')` must equal `series(S)`: multiply both
    /// sides by `z^k` and compare.
    fn check_shift_consistency(p: &IntegralParams, d: &ShiftVector, order: usize) {
        let k = d.d.iter().sum::<u32>() as usize;
        let lhs_full = coupled_sum_series(p, order + k);
        let mut lhs = SeriesWindow::zero(order + k);
        let shifted: Vec<Rational> = (0..=order + k)
            .map(|i| {
                if i < k {
                    Rational::zero()
                } else {
                    lhs_full.coeffs()[i - k].clone()
                }
            })
            .collect();
        lhs.add_scaled(
            &SeriesWindow::from_coeffs(shifted).unwrap(),
            &Rational::one(),
        );
        let mut rhs = SeriesWindow::zero(order + k);
        for t in apply_shift(p, d).unwrap() {
            rhs.add_scaled(&coupled_sum_series(&t.params, order + k), &t.coef);
        }
        assert_eq!(series_equal(&lhs, &rhs).unwrap(), None, "{p:?} {d:?}");
    }

    #[test]
    fn shift_consistency() {
        check_shift_consistency(
            &params(&[1], &[2], &[4], &[1]),
            &ShiftVector { d: vec![1] },
            30,
        );
        let (p, d) = vasilyev_params(1, 2).unwrap();
        check_shift_consistency(&p, &d, 20);
        let p = params(&[1, 3], &[3, 2, 3], &[5, 4, 4], &[2, 2]);
        check_shift_consistency(&p, &ShiftVector { d: vec![1, 1] }, 20);
    }

    #[test]
    fn trivial_integral() {
        let p = params(&[1], &[1], &[2], &[1]);
        let f = decompose_integral(&p, &ShiftVector::zero(1)).unwrap();
        assert_eq!(f.terms().len(), 1);
        assert_eq!(
            f.get(&MultiIndex::new(vec![1]).unwrap()),
            Some(&Polynomial::from_ints(&[0, 1]))
        );
        assert!(f.free().is_zero());
    }

    #[test]
    fn toy_shift_pipeline() {
        let p = params(&[1], &[2], &[4], &[1]);
        let f = decompose_integral(&p, &ShiftVector { d: vec![1] }).unwrap();
        assert_eq!(
            linear_form_series(&f, 30).unwrap(),
            coupled_sum_series(&p, 30)
        );
    }

    #[test]
    fn vasilyev_small_forms() {
        for (l, n) in [(1, 0), (1, 1), (1, 2)] {
            let (p, d) = vasilyev_params(l, n).unwrap();
            let f = decompose_integral(&p, &d).unwrap();
            assert_eq!(
                linear_form_series(&f, 30).unwrap(),
                coupled_sum_series(&p, 30),
                "({l},{n})"
            );
            let report = vasilyev_structure_check(&f, l, n);
            assert!(report.passed(), "({l},{n}): {:?}", report.failures);
        }
    }

    #[test]
    fn vasilyev_l1_n0_value() {
        let ctx = PrecisionContext::default();
        let v = vasilyev_value(1, 0, &ctx).unwrap();
        let direct = integral_value_at_1(&vasilyev_params(1, 0).unwrap().0, &ctx).unwrap();
        assert!(real::relative_difference(&v.numeric, &direct.value) < 1e-25);
    }
}
