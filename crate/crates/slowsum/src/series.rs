//! The two series families under study, their term functions, closed-form
//! tail integrals, and direct partial summation.
//!
//! Family `C` is `sum_{k>=3} 1 / (k log k (log log k)^alpha)`; family `D`
//! is `sum_{k>=2} 1 / (k (log k)^alpha)`. Both converge only through the
//! outermost logarithm power, which makes direct summation hopeless and a
//! tail-integral replacement mandatory.

use crate::atoms::{Atom, AtomExpression, CompiledExpression};
use crate::error::{Error, Result};
use crate::hpreal::{PrecisionContext, Real};
use num_traits::ToPrimitive;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Terms `1 / (k log k (log log k)^alpha)`, summed from `k = 3`.
    C,
    /// Terms `1 / (k (log k)^alpha)`, summed from `k = 2`.
    D,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::C => write!(f, "c"),
            Family::D => write!(f, "d"),
        }
    }
}

/// Which series to evaluate: a family plus a concrete exponent
/// `alpha >= 2` (the closed-form tail integral needs `alpha > 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SeriesSpec {
    family: Family,
    alpha: u32,
}

impl SeriesSpec {
    pub fn new(family: Family, alpha: u32) -> Result<SeriesSpec> {
        if alpha < 2 {
            return Err(Error::domain(format!(
                "alpha must be at least 2 for a convergent closed-form tail, got {alpha}"
            )));
        }
        Ok(SeriesSpec { family, alpha })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// First summed index: 3 for the C family (`log log k` must be
    /// positive), 2 for the D family.
    pub fn start_index(&self) -> u64 {
        match self.family {
            Family::C => 3,
            Family::D => 2,
        }
    }

    /// The term function as an atom expression: `g(1, 1, alpha)` for the
    /// C family and `g(1, alpha, 0)` for the D family.
    pub fn base_expression(&self) -> AtomExpression {
        match self.family {
            Family::C => AtomExpression::atom(Atom::new(1, 1, self.alpha)),
            Family::D => AtomExpression::atom(Atom::new(1, self.alpha, 0)),
        }
    }
}

/// The series term at index `k`, at context precision.
pub fn term(spec: &SeriesSpec, k: u64, ctx: &PrecisionContext) -> Result<Real> {
    if k < spec.start_index() {
        return Err(Error::domain(format!(
            "term index {k} precedes the series start {}",
            spec.start_index()
        )));
    }
    let compiled = CompiledExpression::new(&spec.base_expression(), ctx);
    compiled.evaluate_at(&Real::from_u64(k, ctx), ctx)
}

/// Direct partial sum of the terms from the start index through `n`,
/// accumulated in ascending order.
pub fn partial_sum(spec: &SeriesSpec, n: u64, ctx: &PrecisionContext) -> Result<Real> {
    if n < spec.start_index() {
        return Err(Error::domain(format!(
            "partial sum bound {n} precedes the series start {}",
            spec.start_index()
        )));
    }
    let compiled = CompiledExpression::new(&spec.base_expression(), ctx);
    let mut acc = Real::zero(ctx);
    for k in spec.start_index()..=n {
        let t = compiled.evaluate_at(&Real::from_u64(k, ctx), ctx)?;
        acc = acc.add(&t, ctx);
    }
    Ok(acc)
}

/// Closed form of the tail integral of the interpolating function from
/// `n + 1/2` to infinity:
/// `1 / ((alpha-1) (log log(n+1/2))^(alpha-1))` for the C family and
/// `1 / ((alpha-1) (log(n+1/2))^(alpha-1))` for the D family.
pub fn tail_integral(spec: &SeriesSpec, n: u64, ctx: &PrecisionContext) -> Result<Real> {
    if n < spec.start_index() {
        return Err(Error::domain(format!(
            "tail integral cut {n} precedes the series start {}",
            spec.start_index()
        )));
    }
    let x = half_point(n, ctx);
    let log_x = x.ln(ctx)?;
    let w = match spec.family {
        Family::C => log_x.ln(ctx)?,
        Family::D => log_x,
    };
    if w.is_zero() || w.is_negative() {
        return Err(Error::domain(format!(
            "tail integrand is singular at the cut {n}"
        )));
    }
    let alpha = spec.alpha;
    let denom = Real::from_u64((alpha - 1) as u64, ctx).mul(&w.powi((alpha - 1) as i64, ctx), ctx);
    Ok(denom.recip(ctx))
}

/// The abscissa `n + 1/2`, exactly.
pub(crate) fn half_point(n: u64, ctx: &PrecisionContext) -> Real {
    Real::from_u64(2 * n + 1, ctx).mul(&Real::half(ctx), ctx)
}

/// Estimated cost of reaching an absolute accuracy `delta` of the C-family
/// limit by direct summation alone: the required number of terms is
/// `N ~ exp(exp(1/delta))`, returned as `log10 N = exp(1/delta) / ln 10`
/// because `N` itself overflows any fixed-width integer already for
/// moderate accuracy targets.
pub fn estimate_direct_terms(delta: &Real, ctx: &PrecisionContext) -> Result<Real> {
    if delta.is_zero() || delta.is_negative() {
        return Err(Error::domain(
            "accuracy target must be positive".to_string(),
        ));
    }
    let inner = delta.recip(ctx).exp(ctx)?;
    let ln10 = Real::from_u64(10, ctx).ln(ctx)?;
    Ok(inner.div(&ln10, ctx))
}

/// Splits a `log10 N` estimate into `(mantissa, exponent)` with
/// `N = mantissa * 10^exponent` and `1 <= mantissa < 10`.
pub fn mantissa_exponent(log10_n: &Real, ctx: &PrecisionContext) -> Result<(Real, i64)> {
    let floor = log10_n.floor_bigint()?;
    let exponent = floor
        .to_i64()
        .ok_or_else(|| Error::domain("estimate exponent exceeds the i64 range".to_string()))?;
    let frac = log10_n.sub(&Real::from_i64(exponent, ctx), ctx);
    let ln10 = Real::from_u64(10, ctx).ln(ctx)?;
    let mantissa = frac.mul(&ln10, ctx).exp(ctx)?;
    Ok((mantissa, exponent))
}

/// Renders a `log10 N` estimate as `m×10^e` with a one-digit mantissa.
pub fn render_estimate(log10_n: &Real, ctx: &PrecisionContext) -> Result<String> {
    let (mantissa, mut exponent) = mantissa_exponent(log10_n, ctx)?;
    let mut digit = mantissa.to_sig_string(1);
    if digit == "10" {
        digit = "1".to_string();
        exponent += 1;
    }
    Ok(format!("{digit}×10^{exponent}"))
}
