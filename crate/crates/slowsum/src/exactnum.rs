//! Exact rational arithmetic: Bernoulli numbers and the boundary-correction
//! coefficients used by the centered Euler-Maclaurin engine.
//!
//! Everything in this module is computed in exact arbitrary-size rational
//! arithmetic; no rounding happens before a value is converted to a
//! floating-point [`Real`](crate::hpreal::Real) by the caller.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use std::sync::Mutex;

use crate::error::{Error, Result};

/// Exact rational number, always stored in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Memoized Bernoulli numbers `B_0, B_1, B_2, ...` (signed convention,
/// `B_1 = -1/2`).
static BERNOULLI: Lazy<Mutex<Vec<Rational>>> = Lazy::new(|| Mutex::new(vec![Rational::one()]));

pub(crate) fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub(crate) fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Extends the memo table up to index `m` using the defining recurrence
/// `sum_{j=0}^{m} C(m+1, j) * B_j = 0` solved for `B_m`.
fn ensure_bernoulli(m: u32) {
    let mut table = BERNOULLI.lock().expect("bernoulli memo poisoned");
    while table.len() <= m as usize {
        let m_next = table.len() as u64;
        let mut sum = Rational::zero();
        for (j, b) in table.iter().enumerate() {
            sum += Rational::from_integer(binomial(m_next + 1, j as u64)) * b;
        }
        let value = -sum / Rational::from_integer(BigInt::from(m_next + 1));
        table.push(value);
    }
}

/// Returns the Bernoulli number `B_m` for even `m`.
///
/// Only even indices are exposed; the odd Bernoulli numbers vanish from
/// `B_3` on and `B_1` is an internal detail of the recurrence.
pub fn bernoulli_even(m: u32) -> Result<Rational> {
    if !m.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "bernoulli_even requires an even index, got {m}"
        )));
    }
    ensure_bernoulli(m);
    let table = BERNOULLI.lock().expect("bernoulli memo poisoned");
    Ok(table[m as usize].clone())
}

/// Coefficient `beta(s) = (2^(2s-1) - 1) * B_{2s} / (2s)!` attached to the
/// odd-order derivative of order `2s-1` in the centered Euler-Maclaurin
/// formula (the engine multiplies it by a further `2^-(2s-1)`).
pub fn beta(s: u32) -> Result<Rational> {
    if s < 1 {
        return Err(Error::domain(format!("beta requires s >= 1, got {s}")));
    }
    let b = bernoulli_even(2 * s)?;
    let factor = (BigInt::one() << (2 * s - 1)) - BigInt::one();
    Ok(Rational::from_integer(factor) * b / Rational::from_integer(factorial(2 * s as u64)))
}

/// Evaluates `beta(s)` by brute-force enumeration of all compositions
/// (ordered partitions) of `s`: each composition `(j_1, ..., j_r)`
/// contributes the product of `-1 / (4^j * (2j+1)!)` over its parts, and
/// the total is scaled by `2^(2s-1)`.
///
/// This is a cross-check oracle for [`beta`]; the two routes agree in
/// absolute value, while their sign conventions differ. Cost is
/// exponential in `s`, so the enumeration is capped at `s <= 20`.
pub fn beta_via_compositions(s: u32) -> Result<Rational> {
    if s < 1 {
        return Err(Error::domain(format!(
            "beta_via_compositions requires s >= 1, got {s}"
        )));
    }
    if s > 20 {
        return Err(Error::domain(format!(
            "beta_via_compositions enumerates 2^(s-1) compositions; s = {s} is too large"
        )));
    }
    // part_value[j] = -1 / (4^j * (2j+1)!) for part size j (1-based).
    let mut part_value = vec![Rational::zero()];
    for j in 1..=s as u64 {
        let denom = (BigInt::one() << (2 * j)) * factorial(2 * j + 1);
        part_value.push(-Rational::new(BigInt::one(), denom));
    }

    fn recurse(remaining: u32, product: Rational, part_value: &[Rational], total: &mut Rational) {
        if remaining == 0 {
            *total += product;
            return;
        }
        for first in 1..=remaining {
            recurse(
                remaining - first,
                &product * &part_value[first as usize],
                part_value,
                total,
            );
        }
    }

    let mut total = Rational::zero();
    recurse(s, Rational::one(), &part_value, &mut total);
    Ok(total * Rational::from_integer(BigInt::one() << (2 * s - 1)))
}
