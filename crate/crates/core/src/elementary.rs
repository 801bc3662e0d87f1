//! Shifted elementary sums
//!
//! ```text
//! I(u; p) = sum_{n1 >= ... >= nl >= 1} z^(n1-1) prod_j (n_j + p_j)^-u_j
//! ```
//!
//! and their exact decomposition into linear forms in `Le_s(z)` with
//! polynomial coefficients in `w = 1/z`.

use std::collections::HashMap;
use std::fmt;

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::algebra::{binomial, factorial, inverse_power, lcm_upto, Integer, Polynomial, Rational};
use crate::form::{FormMeta, LinearForm};
use crate::oracle::{elementary_sum_series, linear_form_series, series_equal};
use crate::polylog::MultiIndex;
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementarySum {
    u: Vec<u32>,
    p: Vec<u32>,
}

impl ElementarySum {
    pub fn new(u: Vec<u32>, p: Vec<u32>) -> Result<Self, Error> {
        if u.is_empty() || u.len() != p.len() {
            return Err(Error::InvalidElementarySum(format!(
                "need equal nonzero lengths, got u = {u:?}, p = {p:?}"
            )));
        }
        if u.contains(&0) {
            return Err(Error::InvalidElementarySum(format!(
                "exponents must be >= 1: {u:?}"
            )));
        }
        Ok(Self { u, p })
    }

    pub fn u(&self) -> &[u32] {
        &self.u
    }

    pub fn p(&self) -> &[u32] {
        &self.p
    }

    pub fn depth(&self) -> usize {
        self.u.len()
    }

    /// `m = w(u)`.
    pub fn weight(&self) -> u32 {
        self.u.iter().sum()
    }

    /// `P = max p_j`.
    pub fn max_shift(&self) -> u32 {
        self.p.iter().copied().max().unwrap_or(0)
    }

    fn meta(&self) -> FormMeta {
        FormMeta {
            m: self.weight(),
            p: self.max_shift(),
        }
    }
}

impl fmt::Display for ElementarySum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I(u={:?}; p={:?})", self.u, self.p)
    }
}

/// Coefficients of
/// `1/((x+p1)^u1 (x+p2)^u2) = sum_k A_k/(x+p1)^k + sum_k B_k/(x+p2)^k`,
/// returned as `A_1..A_u1` and `B_1..B_u2`.
pub fn partial_fraction_pair(
    u1: u32,
    u2: u32,
    p1: u32,
    p2: u32,
) -> Result<(Vec<Rational>, Vec<Rational>), Error> {
    if p1 == p2 {
        return Err(Error::CoincidentShifts(p1));
    }
    let diff = i64::from(p2) - i64::from(p1);
    let side = |own: u32, other: u32, d: i64| -> Vec<Rational> {
        (1..=own)
            .map(|k| {
                let sign = if (own - k).is_multiple_of(2) { 1 } else { -1 };
                let num = binomial(u64::from(own + other - k - 1), u64::from(own - k)) * sign;
                Rational::new(num, Integer::from(d).pow(own + other - k))
            })
            .collect()
    };
    Ok((side(u1, u2, diff), side(u2, u1, -diff)))
}

/// Closed-form bound `max(l! (m 2^m)^(l-1) P^l, 1)` on the heights of the
/// decomposition polynomials.
pub fn height_bound(e: &ElementarySum) -> Rational {
    let l = e.depth() as u32;
    let m = Integer::from(e.weight());
    let base = m * Integer::from(2).pow(e.weight());
    let value = factorial(u64::from(l)) * base.pow(l - 1) * Integer::from(e.max_shift()).pow(l);
    Rational::from_integer(value.max(Integer::one()))
}

/// Memoized decomposition engine. One instance may be reused across many sums
/// (the integral pipeline does this); the memo only grows.
#[derive(Default)]
pub struct Decomposer {
    memo: HashMap<(Vec<u32>, Vec<u32>), LinearForm>,
    trace: Option<Vec<(usize, u32, usize, u32)>>,
}

impl Decomposer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `(l, sum p)` of every call and of each recursive callee, as
    /// `(parent_l, parent_sum, child_l, child_sum)`.
    pub fn with_trace() -> Self {
        Self {
            memo: HashMap::new(),
            trace: Some(Vec::new()),
        }
    }

    pub fn trace(&self) -> &[(usize, u32, usize, u32)] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn decompose(&mut self, e: &ElementarySum) -> LinearForm {
        let mut form = self.rec(&e.u, &e.p);
        form.set_meta(e.meta());
        form
    }

    fn child(&mut self, parent: (&[u32], &[u32]), u: &[u32], p: &[u32]) -> LinearForm {
        if let Some(trace) = self.trace.as_mut() {
            trace.push((
                parent.0.len(),
                parent.1.iter().sum(),
                u.len(),
                p.iter().sum(),
            ));
        }
        self.rec(u, p)
    }

    fn rec(&mut self, u: &[u32], p: &[u32]) -> LinearForm {
        let key = (u.to_vec(), p.to_vec());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let form = self.compute(u, p);
        self.memo.insert(key, form.clone());
        form
    }

    /// Sum with level `h` merged into a neighbour: the merged level carries
    /// `(n + q1)^-v1 (n + q2)^-v2`, written back as elementary sums.
    fn merged(
        &mut self,
        parent: (&[u32], &[u32]),
        u: &[u32],
        p: &[u32],
        at: usize,
        (v1, q1): (u32, u32),
        (v2, q2): (u32, u32),
    ) -> LinearForm {
        let mut out = LinearForm::default();
        let mut with = |this: &mut Self, coef: &Rational, exp: u32, shift: u32| {
            let mut nu = u.to_vec();
            let mut np = p.to_vec();
            nu[at] = exp;
            np[at] = shift;
            let sub = this.child(parent, &nu, &np);
            out.add_scaled(&sub, coef, 0);
        };
        if q1 == q2 {
            with(self, &Rational::one(), v1 + v2, q1);
        } else {
            let (a, b) = partial_fraction_pair(v1, v2, q1, q2).expect("distinct shifts");
            for (k, c) in a.iter().enumerate() {
                with(self, c, k as u32 + 1, q1);
            }
            for (k, c) in b.iter().enumerate() {
                with(self, c, k as u32 + 1, q2);
            }
        }
        out
    }

    fn compute(&mut self, u: &[u32], p: &[u32]) -> LinearForm {
        let l = u.len();
        let parent = (u, p);
        if p.iter().all(|&x| x == 0) {
            return LinearForm::single(
                MultiIndex::new(u.to_vec()).expect("u >= 1"),
                FormMeta::default(),
            );
        }
        let one = Rational::one();
        if let Some(h) = (1..l).rev().find(|&h| p[h] > 0) {
            // Shift the level-h variable by one; the two boundary terms merge
            // level h into its neighbours.
            let mut lowered = p.to_vec();
            lowered[h] -= 1;
            let mut out = self.child(parent, u, &lowered);

            let mut ru = u.to_vec();
            let mut rp = p.to_vec();
            ru.remove(h);
            rp.remove(h);
            let upper = self.merged(parent, &ru, &rp, h - 1, (u[h - 1], p[h - 1]), (u[h], p[h]));
            out.add_scaled(&upper, &one, 0);

            if h + 1 < l {
                let lower =
                    self.merged(parent, &ru, &rp, h, (u[h], p[h] - 1), (u[h + 1], p[h + 1]));
                out.add_scaled(&lower, &-one, 0);
            } else {
                let rest = self.child(parent, &ru, &rp);
                out.add_scaled(&rest, &-inverse_power(i64::from(p[h]), u[h]), 0);
            }
            return out;
        }
        // Only the outermost shift is positive: n1 -> n1 - 1 trades it for a
        // factor w.
        let mut lowered = p.to_vec();
        lowered[0] -= 1;
        let mut out = LinearForm::default();
        let sub = self.child(parent, u, &lowered);
        out.add_scaled(&sub, &one, 1);
        if l == 1 {
            let c = inverse_power(i64::from(p[0]), u[0]);
            out.add_free(&Polynomial::monomial(-c, 1));
        } else {
            let ru = u[1..].to_vec();
            let rp = p[1..].to_vec();
            let diag = self.merged(parent, &ru, &rp, 0, (u[0], p[0] - 1), (u[1], p[1]));
            out.add_scaled(&diag, &-one, 1);
        }
        out
    }
}

/// Decomposes `I(u; p)` into `sum_s P_s(w) Le_s(z) + free(w)`.
pub fn decompose(e: &ElementarySum) -> LinearForm {
    Decomposer::new().decompose(e)
}

/// Outcome of the three checks on one decomposition.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub denominators: bool,
    pub heights: bool,
    pub series: bool,
    pub failures: Vec<String>,
}

impl DecompositionReport {
    pub fn passed(&self) -> bool {
        self.denominators && self.heights && self.series
    }
}

/// Checks a decomposition: graded `D_P` clearing, the height bound and exact
/// series agreement with the direct expansion through `z^order`.
pub fn check_form(e: &ElementarySum, form: &LinearForm, order: usize) -> DecompositionReport {
    let mut report = DecompositionReport {
        denominators: true,
        heights: true,
        series: true,
        failures: vec![],
    };
    let d = lcm_upto(e.max_shift());
    if let Err(fail) = form.check_graded_clearing(&d) {
        report.denominators = false;
        report.failures.push(format!(
            "D_{}^{} does not clear the polynomial of {}",
            e.max_shift(),
            fail.exponent,
            fail.index
                .map_or("the free term".to_string(), |s| s.to_string())
        ));
    }
    let bound = height_bound(e);
    let height = form.max_height();
    if height > bound {
        report.heights = false;
        report
            .failures
            .push(format!("height {height} exceeds bound {bound}"));
    }
    let direct = elementary_sum_series(e, order);
    match linear_form_series(form, order).and_then(|s| series_equal(&s, &direct)) {
        Ok(None) => {}
        Ok(Some(k)) => {
            report.series = false;
            report.failures.push(format!("series differ at z^{k}"));
        }
        Err(err) => {
            report.series = false;
            report.failures.push(err.to_string());
        }
    }
    report
}

pub fn verify_decomposition(e: &ElementarySum, order: usize) -> DecompositionReport {
    check_form(e, &decompose(e), order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_rational;
    use num_traits::Zero;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn es(u: &[u32], p: &[u32]) -> ElementarySum {
        ElementarySum::new(u.to_vec(), p.to_vec()).unwrap()
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn partial_fraction_examples() {
        assert_eq!(
            partial_fraction_pair(1, 1, 3, 4).unwrap(),
            (vec![q("1")], vec![q("-1")])
        );
        assert_eq!(
            partial_fraction_pair(2, 1, 0, 1).unwrap(),
            (vec![q("-1"), q("1")], vec![q("1")])
        );
        assert_eq!(
            partial_fraction_pair(1, 1, 0, 2).unwrap(),
            (vec![q("1/2")], vec![q("-1/2")])
        );
        assert!(matches!(
            partial_fraction_pair(1, 2, 3, 3),
            Err(Error::CoincidentShifts(3))
        ));
    }

    #[test]
    fn partial_fractions_reconstruct() {
        for (u1, u2, p1, p2) in [(3, 2, 0, 4), (1, 3, 2, 1), (2, 2, 5, 0)] {
            let (a, b) = partial_fraction_pair(u1, u2, p1, p2).unwrap();
            for x in 1..8i64 {
                let lhs =
                    inverse_power(x + i64::from(p1), u1) * inverse_power(x + i64::from(p2), u2);
                let mut rhs = Rational::zero();
                for (k, c) in a.iter().enumerate() {
                    rhs += c * inverse_power(x + i64::from(p1), k as u32 + 1);
                }
                for (k, c) in b.iter().enumerate() {
                    rhs += c * inverse_power(x + i64::from(p2), k as u32 + 1);
                }
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn decompose_examples() {
        let f = decompose(&es(&[2], &[0]));
        assert_eq!(f.terms().len(), 1);
        assert_eq!(f.get(&mi(&[2])), Some(&Polynomial::from_ints(&[0, 1])));
        assert!(f.free().is_zero());

        let f = decompose(&es(&[1], &[1]));
        assert_eq!(f.get(&mi(&[1])), Some(&Polynomial::from_ints(&[0, 0, 1])));
        assert_eq!(f.free(), &Polynomial::from_ints(&[0, -1]));

        let f = decompose(&es(&[1, 1], &[0, 0]));
        assert_eq!(f.get(&mi(&[1, 1])), Some(&Polynomial::from_ints(&[0, 1])));
        assert_eq!(f.terms().len(), 1);
    }

    #[test]
    fn height_bound_examples() {
        assert_eq!(height_bound(&es(&[1], &[1])), q("1"));
        assert_eq!(height_bound(&es(&[3, 1], &[0, 0])), q("1"));
        assert_eq!(height_bound(&es(&[2, 1], &[2, 1])), q("192"));
    }

    #[test]
    fn decomposition_examples() {
        assert!(verify_decomposition(&es(&[1], &[1]), 40).passed());
        assert!(verify_decomposition(&es(&[2, 1], &[3, 1]), 60).passed());
        assert!(verify_decomposition(&es(&[1, 2, 1], &[2, 0, 3]), 40).passed());
    }

    #[test]
    fn measure_decreases() {
        let mut d = Decomposer::with_trace();
        d.decompose(&es(&[2, 1, 3], &[1, 4, 2]));
        assert!(!d.trace().is_empty());
        for &(l, s, cl, cs) in d.trace() {
            assert!((cl, cs) < (l, s), "({l},{s}) -> ({cl},{cs})");
        }
    }

    #[test]
    fn indices_respect_depth_and_weight() {
        let e = es(&[3, 2], &[2, 3]);
        let f = decompose(&e);
        for s in f.terms().keys() {
            assert!(s.depth() <= 2 && s.weight() <= 5);
        }
    }

    #[test]
    fn rejects_invalid() {
        assert!(ElementarySum::new(vec![1], vec![]).is_err());
        assert!(ElementarySum::new(vec![0], vec![1]).is_err());
        assert!(ElementarySum::new(vec![], vec![]).is_err());
    }
}
