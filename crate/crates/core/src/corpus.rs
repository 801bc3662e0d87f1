//! Seeded random corpora of elementary sums and valid nested sums.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{lcm_upto, IntegerValuedPolynomial, Rational};
use crate::elementary::ElementarySum;
use crate::normal_reduction::{DeltaNormal, NestedSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryBounds {
    pub max_depth: usize,
    pub max_u: u32,
    pub max_p: u32,
}

impl Default for ElementaryBounds {
    fn default() -> Self {
        Self {
            max_depth: 3,
            max_u: 3,
            max_p: 4,
        }
    }
}

pub fn elementary_corpus(seed: u64, count: usize, bounds: ElementaryBounds) -> Vec<ElementarySum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let depth = rng.gen_range(1..=bounds.max_depth.max(1));
            let u = (0..depth)
                .map(|_| rng.gen_range(1..=bounds.max_u.max(1)))
                .collect();
            let p = (0..depth)
                .map(|_| rng.gen_range(0..=bounds.max_p))
                .collect();
            ElementarySum::new(u, p).expect("exponents are >= 1")
        })
        .collect()
}

/// `k / D^e` with a small random integer `k`; `e = 0` about half the time.
fn coefficient(rng: &mut ChaCha8Rng, d: &BigInt, max_e: u32) -> Rational {
    let k = loop {
        let k: i64 = rng.gen_range(-3..=3);
        if k != 0 {
            break k;
        }
    };
    let e = if max_e > 0 && rng.gen_bool(0.5) {
        rng.gen_range(1..=max_e)
    } else {
        0
    };
    Rational::new(BigInt::from(k), d.pow(e))
}

fn random_factor(rng: &mut ChaCha8Rng, delta: u32, proper: bool) -> DeltaNormal {
    let d = lcm_upto(delta);
    let cap = rng.gen_range(1..=2u32);
    let mut fractions = BTreeMap::new();
    let poles = rng.gen_range(usize::from(proper)..=2);
    for _ in 0..poles {
        let alpha = rng.gen_range(0..=3u32);
        let m = rng.gen_range(1..=cap);
        fractions.insert((alpha, m), coefficient(rng, &d, cap - m));
    }
    let poly = if proper {
        crate::algebra::Polynomial::zero()
    } else {
        let deg = rng.gen_range(0..=delta as usize);
        let mut coeffs: Vec<Rational> = (0..deg)
            .map(|_| Rational::from_integer(rng.gen_range(-2..=2).into()))
            .collect();
        coeffs.push(coefficient(rng, &d, cap));
        IntegerValuedPolynomial::from_binomial_coeffs(coeffs).to_power_basis()
    };
    DeltaNormal::new(delta, cap, fractions, poly).expect("orders lie in 1..=cap")
}

/// Random nested sums with `l <= 3`, poles of order at most 2 at `x = 0..=-3`
/// and `Delta` in `1..=3`, kept only when the index conditions hold.
pub fn nested_sum_corpus(seed: u64, count: usize) -> Vec<NestedSum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let delta = rng.gen_range(1..=3u32);
        let l = rng.gen_range(1..=3usize);
        let factors: Vec<DeltaNormal> = (0..l)
            .map(|j| {
                let proper = j == 0 || rng.gen_bool(0.5);
                random_factor(&mut rng, delta, proper)
            })
            .collect();
        if factors.iter().any(DeltaNormal::is_zero) {
            continue;
        }
        let sum = NestedSum::new(factors).expect("shared Delta");
        if sum.check_index_conditions().is_ok() {
            out.push(sum);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpora_are_deterministic() {
        let b = ElementaryBounds::default();
        assert_eq!(elementary_corpus(3, 50, b), elementary_corpus(3, 50, b));
        assert_ne!(elementary_corpus(3, 50, b), elementary_corpus(4, 50, b));
        let e = elementary_corpus(1, 200, b);
        assert!(e.iter().all(|e| e.depth() <= 3
            && e.u().iter().all(|&u| u <= 3)
            && e.p().iter().all(|&p| p <= 4)));
        assert_eq!(nested_sum_corpus(9, 20), nested_sum_corpus(9, 20));
    }

    #[test]
    fn nested_sums_are_valid_and_varied() {
        let corpus = nested_sum_corpus(11, 100);
        assert!(corpus.iter().all(|s| s.check_index_conditions().is_ok()));
        assert!(corpus
            .iter()
            .all(|s| s.factors().iter().all(DeltaNormal::contract_holds)));
        assert!(corpus
            .iter()
            .any(|s| s.factors().iter().any(|f| !f.is_proper())));
        assert!(corpus.iter().any(|s| s.depth() == 3));
    }
}
