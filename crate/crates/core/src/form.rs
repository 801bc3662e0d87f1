//! Linear forms `sum_s P_s(w) Le_s(z) + free(w)` with `w = 1/z`.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{Integer, Polynomial, Rational};
use crate::polylog::MultiIndex;
use crate::Error;

/// Context the form was produced in: the total weight `m` and the
/// denominator scale parameter (`D_P`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormMeta {
    pub m: u32,
    #[serde(rename = "P")]
    pub p: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearForm {
    terms: BTreeMap<MultiIndex, Polynomial>,
    free: Polynomial,
    meta: FormMeta,
}

/// A failed denominator check: which polynomial (`None` = free term) and the
/// exponent that was tried.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClearingFailure {
    pub index: Option<MultiIndex>,
    pub exponent: u32,
}

impl LinearForm {
    pub fn new(meta: FormMeta) -> Self {
        Self {
            terms: BTreeMap::new(),
            free: Polynomial::zero(),
            meta,
        }
    }

    /// `w * Le_s`, the form of `z^-1 Le_s(z)`.
    pub fn single(s: MultiIndex, meta: FormMeta) -> Self {
        let mut f = Self::new(meta);
        f.add_term(
            s,
            &Polynomial::monomial(Rational::from_integer(1.into()), 1),
        );
        f
    }

    pub fn constant(c: Rational, meta: FormMeta) -> Self {
        let mut f = Self::new(meta);
        f.free = Polynomial::constant(c);
        f
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Polynomial> {
        &self.terms
    }

    pub fn free(&self) -> &Polynomial {
        &self.free
    }

    pub fn meta(&self) -> FormMeta {
        self.meta
    }

    pub fn set_meta(&mut self, meta: FormMeta) {
        self.meta = meta;
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.free.is_zero()
    }

    pub fn get(&self, s: &MultiIndex) -> Option<&Polynomial> {
        self.terms.get(s)
    }

    /// Adds `poly * Le_s`; the empty index feeds the free term.
    pub fn add_term(&mut self, s: MultiIndex, poly: &Polynomial) {
        if poly.is_zero() {
            return;
        }
        if s.depth() == 0 {
            self.free = &self.free + poly;
            return;
        }
        let sum = match self.terms.get(&s) {
            Some(old) => old + poly,
            None => poly.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&s);
        } else {
            self.terms.insert(s, sum);
        }
    }

    pub fn add_free(&mut self, poly: &Polynomial) {
        self.free = &self.free + poly;
    }

    /// `self += c * w^k * other`.
    pub fn add_scaled(&mut self, other: &LinearForm, c: &Rational, k: usize) {
        if c.is_zero() {
            return;
        }
        for (s, p) in &other.terms {
            self.add_term(s.clone(), &p.scale(c).shift_up(k));
        }
        self.add_free(&other.free.scale(c).shift_up(k));
    }

    /// Every stored polynomial with its index weight; the free term has weight 0.
    pub fn polynomials(&self) -> impl Iterator<Item = (Option<&MultiIndex>, &Polynomial, u32)> {
        self.terms
            .iter()
            .map(|(s, p)| (Some(s), p, s.weight()))
            .chain(std::iter::once((None, &self.free, 0)))
            .filter(|(_, p, _)| !p.is_zero())
    }

    pub fn max_height(&self) -> Rational {
        self.polynomials()
            .map(|(_, p, _)| p.height())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Checks `d^(m - w(s)) * P_s` integral for every polynomial, including the
    /// free term (weight 0). Fails when some weight exceeds `m`.
    pub fn check_graded_clearing(&self, d: &Integer) -> Result<(), ClearingFailure> {
        for (s, p, w) in self.polynomials() {
            let Some(e) = self.meta.m.checked_sub(w) else {
                return Err(ClearingFailure {
                    index: s.cloned(),
                    exponent: 0,
                });
            };
            if !p.clears_denominator(d, e) {
                return Err(ClearingFailure {
                    index: s.cloned(),
                    exponent: e,
                });
            }
        }
        Ok(())
    }

    /// Checks `d^e * P` integral for every polynomial with one fixed exponent.
    pub fn check_uniform_clearing(&self, d: &Integer, e: u32) -> Result<(), ClearingFailure> {
        for (s, p, _) in self.polynomials() {
            if !p.clears_denominator(d, e) {
                return Err(ClearingFailure {
                    index: s.cloned(),
                    exponent: e,
                });
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, Error> {
        Ok(serde_json::to_string_pretty(&FormJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let raw: FormJson = serde_json::from_str(text)?;
        Ok(raw.into())
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    s: MultiIndex,
    poly_w: Polynomial,
}

#[derive(Serialize, Deserialize)]
struct FormJson {
    terms: Vec<TermJson>,
    free: Polynomial,
    meta: FormMeta,
}

impl From<&LinearForm> for FormJson {
    fn from(f: &LinearForm) -> Self {
        Self {
            terms: f
                .terms
                .iter()
                .map(|(s, p)| TermJson {
                    s: s.clone(),
                    poly_w: p.clone(),
                })
                .collect(),
            free: f.free.clone(),
            meta: f.meta,
        }
    }
}

impl From<FormJson> for LinearForm {
    fn from(raw: FormJson) -> Self {
        let mut f = LinearForm::new(raw.meta);
        for t in raw.terms {
            f.add_term(t.s, &t.poly_w);
        }
        f.add_free(&raw.free);
        f
    }
}

impl Serialize for LinearForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FormJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        FormJson::deserialize(d).map(Into::into)
    }
}
