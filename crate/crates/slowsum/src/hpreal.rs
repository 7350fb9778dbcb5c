//! Arbitrary-precision real arithmetic with a configurable decimal error
//! budget.
//!
//! [`PrecisionContext`] fixes the number of carried decimal digits
//! (working digits plus guard digits) and every [`Real`] operation rounds
//! to that budget. The backing representation is binary; the contract is
//! digit accuracy, not a particular radix. Final decimal strings are
//! produced by exact integer arithmetic on the raw mantissa, rounding
//! half-to-even, so printed tables do not depend on any intermediate
//! formatting path.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::exactnum::Rational;

const RM: RoundingMode = RoundingMode::ToEven;
const LOG2_10: f64 = std::f64::consts::LOG2_10;

pub const DEFAULT_WORKING_DIGITS: u32 = 50;
pub const DEFAULT_GUARD_DIGITS: u32 = 10;

thread_local! {
    // Cache of engine constants (pi, ln 2, ...) used internally by ln/exp.
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache allocation"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Working-precision configuration: `working_digits` significant decimal
/// digits are guaranteed in results, `guard_digits` extra digits are
/// carried internally to absorb rounding and cancellation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionContext {
    working_digits: u32,
    guard_digits: u32,
}

impl PrecisionContext {
    /// Context with the default guard of 10 extra digits.
    pub fn new(working_digits: u32) -> Self {
        Self::with_guard(working_digits, DEFAULT_GUARD_DIGITS)
    }

    pub fn with_guard(working_digits: u32, guard_digits: u32) -> Self {
        assert!(
            working_digits >= 1,
            "working precision must be at least one digit"
        );
        PrecisionContext {
            working_digits,
            guard_digits,
        }
    }

    pub fn working_digits(&self) -> u32 {
        self.working_digits
    }

    pub fn guard_digits(&self) -> u32 {
        self.guard_digits
    }

    /// Carried precision in bits.
    pub(crate) fn bits(&self) -> usize {
        (((self.working_digits + self.guard_digits) as f64) * LOG2_10).ceil() as usize + 1
    }

    pub fn pi(&self) -> Real {
        Real {
            value: with_consts(|cc| cc.pi(self.bits(), RM)),
        }
    }

    /// Euler's number at context precision.
    pub fn e(&self) -> Real {
        Real::from_u64(1, self).exp(self).expect("exp(1) is finite")
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext::new(DEFAULT_WORKING_DIGITS)
    }
}

/// Arbitrary-precision real value. Immutable; all operations take the
/// context that fixes the precision of the result.
#[derive(Clone, Debug, PartialEq)]
pub struct Real {
    value: BigFloat,
}

impl Real {
    pub fn zero(ctx: &PrecisionContext) -> Real {
        Real {
            value: BigFloat::from_u64(0, ctx.bits()),
        }
    }

    pub fn one(ctx: &PrecisionContext) -> Real {
        Real {
            value: BigFloat::from_u64(1, ctx.bits()),
        }
    }

    /// Exactly 1/2 at context precision.
    pub fn half(ctx: &PrecisionContext) -> Real {
        Real::from_u64(1, ctx).div(&Real::from_u64(2, ctx), ctx)
    }

    pub fn from_u64(n: u64, ctx: &PrecisionContext) -> Real {
        Real {
            value: BigFloat::from_u64(n, ctx.bits()),
        }
    }

    pub fn from_i64(n: i64, ctx: &PrecisionContext) -> Real {
        Real {
            value: BigFloat::from_i64(n, ctx.bits()),
        }
    }

    /// Parses a decimal literal such as `"20.5"` or `"1e-10"`.
    pub fn from_str(s: &str, ctx: &PrecisionContext) -> Result<Real> {
        let value = with_consts(|cc| BigFloat::parse(s, Radix::Dec, ctx.bits(), RM, cc));
        if value.is_nan() {
            return Err(Error::domain(format!(
                "cannot parse {s:?} as a decimal number"
            )));
        }
        Ok(Real { value })
    }

    /// Correctly rounded conversion of an exact rational.
    pub fn from_rational(q: &Rational, ctx: &PrecisionContext) -> Real {
        // Numerator and denominator carry 64 extra bits so the final
        // division is the only rounding that matters.
        let bits = ctx.bits() + 64;
        let numer =
            with_consts(|cc| BigFloat::parse(&q.numer().to_string(), Radix::Dec, bits, RM, cc));
        let denom =
            with_consts(|cc| BigFloat::parse(&q.denom().to_string(), Radix::Dec, bits, RM, cc));
        Real {
            value: numer.div(&denom, ctx.bits(), RM),
        }
    }

    pub fn add(&self, other: &Real, ctx: &PrecisionContext) -> Real {
        Real {
            value: self.value.add(&other.value, ctx.bits(), RM),
        }
    }

    pub fn sub(&self, other: &Real, ctx: &PrecisionContext) -> Real {
        Real {
            value: self.value.sub(&other.value, ctx.bits(), RM),
        }
    }

    pub fn mul(&self, other: &Real, ctx: &PrecisionContext) -> Real {
        Real {
            value: self.value.mul(&other.value, ctx.bits(), RM),
        }
    }

    pub fn div(&self, other: &Real, ctx: &PrecisionContext) -> Real {
        Real {
            value: self.value.div(&other.value, ctx.bits(), RM),
        }
    }

    pub fn neg(&self) -> Real {
        Real {
            value: self.value.neg(),
        }
    }

    pub fn abs(&self) -> Real {
        Real {
            value: self.value.abs(),
        }
    }

    pub fn recip(&self, ctx: &PrecisionContext) -> Real {
        Real {
            value: self.value.reciprocal(ctx.bits(), RM),
        }
    }

    /// Integer power; negative exponents go through the reciprocal.
    pub fn powi(&self, exponent: i64, ctx: &PrecisionContext) -> Real {
        let p = self
            .value
            .powi(exponent.unsigned_abs() as usize, ctx.bits(), RM);
        if exponent < 0 {
            Real {
                value: p.reciprocal(ctx.bits(), RM),
            }
        } else {
            Real { value: p }
        }
    }

    /// Natural logarithm; the argument must be strictly positive.
    pub fn ln(&self, ctx: &PrecisionContext) -> Result<Real> {
        if self.is_zero() || self.is_negative() {
            return Err(Error::domain(format!(
                "ln requires a positive argument, got {self}"
            )));
        }
        let value = with_consts(|cc| self.value.ln(ctx.bits(), RM, cc));
        Ok(Real { value })
    }

    /// Exponential; fails if the result overflows the representable range.
    pub fn exp(&self, ctx: &PrecisionContext) -> Result<Real> {
        let value = with_consts(|cc| self.value.exp(ctx.bits(), RM, cc));
        if value.is_inf() || value.is_nan() {
            return Err(Error::domain(
                "exp overflows the representable exponent range".to_string(),
            ));
        }
        Ok(Real { value })
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative() && !self.value.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.value.is_positive() && !self.value.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.value.is_nan() && !self.value.is_inf()
    }

    /// Binary exponent of the leading mantissa bit; `None` for zero or
    /// non-finite values. Used internally for convergence cutoffs.
    pub(crate) fn binary_exponent(&self) -> Option<i32> {
        if self.is_zero() || !self.is_finite() {
            return None;
        }
        self.value.exponent()
    }

    /// Exact decomposition `value = m * 2^shift`; `None` for non-finite
    /// values. Zero yields `(0, 0)`.
    fn to_exact_parts(&self) -> Option<(BigInt, i64)> {
        if !self.is_finite() {
            return None;
        }
        if self.is_zero() {
            return Some((BigInt::zero(), 0));
        }
        let (words, precision, sign, exponent, _inexact) = self.value.as_raw_parts()?;
        let bytes: Vec<u8> = words.iter().flat_map(|w| w.to_le_bytes()).collect();
        let mut m = BigInt::from_bytes_le(num_bigint::Sign::Plus, &bytes);
        if sign == Sign::Neg {
            m = -m;
        }
        Some((m, exponent as i64 - precision as i64))
    }

    /// Largest integer not exceeding the value, as a big integer.
    pub fn floor_bigint(&self) -> Result<BigInt> {
        let (m, shift) = self
            .to_exact_parts()
            .ok_or_else(|| Error::domain("floor of a non-finite value".to_string()))?;
        if shift >= 0 {
            Ok(m << shift as usize)
        } else {
            let den = BigInt::from(1u32) << (-shift) as usize;
            Ok(m.div_floor(&den))
        }
    }

    /// Exponent `e` with `10^e <= |value| < 10^(e+1)`.
    pub fn decimal_exponent(&self) -> Result<i64> {
        let (m, shift) = self
            .to_exact_parts()
            .ok_or_else(|| Error::domain("decimal exponent of a non-finite value".to_string()))?;
        if m.is_zero() {
            return Err(Error::domain("decimal exponent of zero".to_string()));
        }
        let mag = m.magnitude().clone();
        let bits = mag.bits() as i64 + shift; // 2^(bits-1) <= |value| < 2^bits
        let mut e = ((bits as f64 - 0.5) / LOG2_10).floor() as i64;
        // |value| >= 10^t  <=>  mag * 2^max(shift,0) * 10^max(-t,0) >= 10^max(t,0) * 2^max(-shift,0)
        let ge_pow10 = |t: i64| -> bool {
            let mut lhs = BigInt::from(mag.clone());
            let mut rhs = BigInt::from(1u32);
            if shift >= 0 {
                lhs <<= shift as usize;
            } else {
                rhs <<= (-shift) as usize;
            }
            if t >= 0 {
                rhs *= BigInt::from(10u32).pow(t as u32);
            } else {
                lhs *= BigInt::from(10u32).pow((-t) as u32);
            }
            lhs >= rhs
        };
        while !ge_pow10(e) {
            e -= 1;
        }
        while ge_pow10(e + 1) {
            e += 1;
        }
        Ok(e)
    }

    /// Fixed-point decimal rendering with `decimals` digits after the
    /// point (a negative count rounds to the left of the point), rounding
    /// half-to-even from the exact stored value.
    pub fn to_fixed_string(&self, decimals: i32) -> String {
        let (m, shift) = match self.to_exact_parts() {
            Some(parts) => parts,
            None => return format!("{}", self.value),
        };
        // scaled = value * 10^decimals = (m * num) / den as an exact fraction
        let mut num = m;
        let mut den = BigInt::from(1u32);
        if shift >= 0 {
            num <<= shift as usize;
        } else {
            den <<= (-shift) as usize;
        }
        if decimals >= 0 {
            num *= BigInt::from(10u32).pow(decimals as u32);
        } else {
            den *= BigInt::from(10u32).pow((-decimals) as u32);
        }
        let rounded = round_half_even(&num, &den);
        let negative = rounded.is_negative();
        let mut digits = rounded.magnitude().to_string();
        let mut out = String::new();
        if negative && !rounded.is_zero() {
            out.push('-');
        }
        if decimals > 0 {
            let f = decimals as usize;
            if digits.len() <= f {
                let pad = f + 1 - digits.len();
                digits.insert_str(0, &"0".repeat(pad));
            }
            let split = digits.len() - f;
            out.push_str(&digits[..split]);
            out.push('.');
            out.push_str(&digits[split..]);
        } else {
            out.push_str(&digits);
            if decimals < 0 && digits != "0" {
                out.push_str(&"0".repeat((-decimals) as usize));
            }
        }
        out
    }

    /// Decimal rendering with `digits` significant digits, rounding
    /// half-to-even.
    pub fn to_sig_string(&self, digits: u32) -> String {
        assert!(digits >= 1, "at least one significant digit");
        if self.is_zero() {
            return if digits == 1 {
                "0".to_string()
            } else {
                format!("0.{}", "0".repeat(digits as usize - 1))
            };
        }
        let e = match self.decimal_exponent() {
            Ok(e) => e,
            Err(_) => return format!("{}", self.value),
        };
        let mut decimals = digits as i64 - 1 - e;
        loop {
            let s = self.to_fixed_string(decimals.clamp(i32::MIN as i64, i32::MAX as i64) as i32);
            let count = significant_digits(&s);
            if count > digits as usize && decimals > i64::MIN {
                // Rounding carried into a new leading digit (e.g. 9.99 -> 10.0).
                decimals -= 1;
                continue;
            }
            return s;
        }
    }
}

/// Number of significant decimal digits in a fixed-point rendering.
fn significant_digits(s: &str) -> usize {
    let digits: Vec<u8> = s.bytes().filter(|b| b.is_ascii_digit()).collect();
    let leading_zeros = digits.iter().take_while(|&&b| b == b'0').count();
    if leading_zeros == digits.len() {
        0
    } else {
        digits.len() - leading_zeros
    }
}

/// Rounds the exact fraction `num / den` (with `den > 0`) to the nearest
/// integer, ties to even.
fn round_half_even(num: &BigInt, den: &BigInt) -> BigInt {
    let negative = num.is_negative();
    let mag = num.magnitude().clone();
    let den_mag = den.magnitude().clone();
    let (q, r) = mag.div_rem(&den_mag);
    let twice = &r * 2u32;
    let rounded = match twice.cmp(&den_mag) {
        Ordering::Less => q,
        Ordering::Greater => q + 1u32,
        Ordering::Equal => {
            if (&q % 2u32).is_zero() {
                q
            } else {
                q + 1u32
            }
        }
    };
    let rounded = BigInt::from(rounded);
    if negative {
        -rounded
    } else {
        rounded
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Real) -> Option<Ordering> {
        self.value.partial_cmp(&other.value)
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}
