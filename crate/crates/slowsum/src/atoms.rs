//! Symbolic algebra over the derivative-closed family
//! `g(n, l, L) = 1 / (x^n * (log x)^l * (log log x)^L)`.
//!
//! Every derivative of such a function is a finite linear combination of
//! the same family with exact rational coefficients, so repeated exact
//! differentiation and high-precision evaluation are all the engines need.

use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exactnum::Rational;
use crate::hpreal::{PrecisionContext, Real};

/// Exponent triple of `1 / (x^n * (log x)^l * (log log x)^L)`.
///
/// Factors with a zero exponent are absent: `Atom::new(n, l, 0)` never
/// touches `log log x`, so such atoms are defined for any `x > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub x_pow: u32,
    pub log_pow: u32,
    pub loglog_pow: u32,
}

impl Atom {
    pub const fn new(x_pow: u32, log_pow: u32, loglog_pow: u32) -> Atom {
        Atom {
            x_pow,
            log_pow,
            loglog_pow,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g({},{},{})", self.x_pow, self.log_pow, self.loglog_pow)
    }
}

/// Finite linear combination of [`Atom`]s with exact rational
/// coefficients. Canonical: atom keys are sorted and zero coefficients
/// are never stored, so structural equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AtomExpression {
    terms: BTreeMap<Atom, Rational>,
}

impl AtomExpression {
    pub fn new() -> AtomExpression {
        AtomExpression::default()
    }

    /// The expression consisting of a single atom with coefficient one.
    pub fn atom(a: Atom) -> AtomExpression {
        let mut e = AtomExpression::new();
        e.add_term(a, Rational::one());
        e
    }

    /// Accumulates `coefficient * a`, dropping the term if the result
    /// cancels to zero.
    pub fn add_term(&mut self, a: Atom, coefficient: Rational) {
        if coefficient.is_zero() {
            return;
        }
        let entry = self.terms.entry(a).or_insert_with(Rational::zero);
        *entry += coefficient;
        if entry.is_zero() {
            self.terms.remove(&a);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Atom, &Rational)> {
        self.terms.iter()
    }

    pub fn num_atoms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, a: &Atom) -> Option<&Rational> {
        self.terms.get(a)
    }
}

impl fmt::Display for AtomExpression {
    /// Renders like `2g(3,1,2)+3g(3,2,2)-7/720g(2,1,2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (atom, c)) in self.terms.iter().enumerate() {
            if i > 0 && c.is_positive() {
                write!(f, "+")?;
            }
            if c.is_one() {
                write!(f, "{atom}")?;
            } else if (-c).is_one() {
                write!(f, "-{atom}")?;
            } else {
                write!(f, "{c}{atom}")?;
            }
        }
        Ok(())
    }
}

/// First derivative of a single atom:
/// `d/dx g(n,l,L) = -n g(n+1,l,L) - l g(n+1,l+1,L) - L g(n+1,l+1,L+1)`,
/// with zero-coefficient terms omitted.
pub fn differentiate_atom(a: Atom) -> AtomExpression {
    let mut e = AtomExpression::new();
    let Atom {
        x_pow: n,
        log_pow: l,
        loglog_pow: ll,
    } = a;
    e.add_term(Atom::new(n + 1, l, ll), -Rational::from_integer(n.into()));
    e.add_term(
        Atom::new(n + 1, l + 1, ll),
        -Rational::from_integer(l.into()),
    );
    e.add_term(
        Atom::new(n + 1, l + 1, ll + 1),
        -Rational::from_integer(ll.into()),
    );
    e
}

/// Exact `order`-fold derivative of an expression; order 0 returns the
/// expression unchanged.
pub fn differentiate(e: &AtomExpression, order: u32) -> AtomExpression {
    let mut current = e.clone();
    for _ in 0..order {
        let mut next = AtomExpression::new();
        for (atom, c) in current.terms() {
            for (datom, dc) in differentiate_atom(*atom).terms() {
                next.add_term(*datom, c * dc);
            }
        }
        current = next;
    }
    current
}

/// Evaluates an expression at `x` to context precision.
///
/// Logarithm factors are only computed when some atom actually uses
/// them, so `x <= e` is legal while every `loglog_pow` is zero.
pub fn evaluate(e: &AtomExpression, x: &Real, ctx: &PrecisionContext) -> Result<Real> {
    CompiledExpression::new(e, ctx).evaluate_at(x, ctx)
}

/// An [`AtomExpression`] with its coefficients pre-converted to context
/// precision, ready for repeated evaluation inside summation loops.
#[derive(Clone, Debug)]
pub struct CompiledExpression {
    terms: Vec<(Real, u32, u32, u32)>,
    max_x_pow: u32,
    max_log_pow: u32,
    max_loglog_pow: u32,
}

impl CompiledExpression {
    pub fn new(e: &AtomExpression, ctx: &PrecisionContext) -> CompiledExpression {
        let mut terms = Vec::with_capacity(e.num_atoms());
        let (mut mn, mut ml, mut mll) = (0, 0, 0);
        for (atom, c) in e.terms() {
            mn = mn.max(atom.x_pow);
            ml = ml.max(atom.log_pow);
            mll = mll.max(atom.loglog_pow);
            terms.push((
                Real::from_rational(c, ctx),
                atom.x_pow,
                atom.log_pow,
                atom.loglog_pow,
            ));
        }
        CompiledExpression {
            terms,
            max_x_pow: mn,
            max_log_pow: ml,
            max_loglog_pow: mll,
        }
    }

    pub fn needs_log(&self) -> bool {
        self.max_log_pow > 0 || self.max_loglog_pow > 0
    }

    pub fn needs_loglog(&self) -> bool {
        self.max_loglog_pow > 0
    }

    pub(crate) fn max_powers(&self) -> (u32, u32, u32) {
        (self.max_x_pow, self.max_log_pow, self.max_loglog_pow)
    }

    /// Single-point evaluation; computes the logarithms it needs.
    pub fn evaluate_at(&self, x: &Real, ctx: &PrecisionContext) -> Result<Real> {
        let tables = PowerTables::for_point(x, self.max_powers(), ctx)?;
        Ok(self.evaluate_with_tables(&tables, ctx))
    }

    /// Evaluation against precomputed inverse-power tables. The tables
    /// must cover this expression's maximal exponents.
    pub(crate) fn evaluate_with_tables(&self, t: &PowerTables, ctx: &PrecisionContext) -> Real {
        let mut acc = Real::zero(ctx);
        for (c, n, l, ll) in &self.terms {
            let mut v = c.clone();
            if *n > 0 {
                v = v.mul(&t.inv_x[*n as usize], ctx);
            }
            if *l > 0 {
                v = v.mul(&t.inv_log[*l as usize], ctx);
            }
            if *ll > 0 {
                v = v.mul(&t.inv_loglog[*ll as usize], ctx);
            }
            acc = acc.add(&v, ctx);
        }
        acc
    }
}

/// Tables of `x^-i`, `(log x)^-i` and `(log log x)^-i` shared by all
/// expressions evaluated at the same abscissa.
pub(crate) struct PowerTables {
    inv_x: Vec<Real>,
    inv_log: Vec<Real>,
    inv_loglog: Vec<Real>,
}

impl PowerTables {
    /// Builds tables at a single point, computing `log x` and
    /// `log log x` only if some exponent requires them.
    pub(crate) fn for_point(
        x: &Real,
        (max_x, max_log, max_loglog): (u32, u32, u32),
        ctx: &PrecisionContext,
    ) -> Result<PowerTables> {
        if max_x > 0 && (x.is_zero() || x.is_negative()) {
            return Err(Error::domain(format!("evaluation requires x > 0, got {x}")));
        }
        let log_x = if max_log > 0 || max_loglog > 0 {
            Some(x.ln(ctx)?)
        } else {
            None
        };
        let loglog_x = match (&log_x, max_loglog) {
            (Some(lx), ll) if ll > 0 => Some(lx.ln(ctx)?),
            _ => None,
        };
        Self::from_logs(
            x,
            log_x.as_ref(),
            loglog_x.as_ref(),
            (max_x, max_log, max_loglog),
            ctx,
        )
    }

    /// Builds tables from already-computed logarithms.
    pub(crate) fn from_logs(
        x: &Real,
        log_x: Option<&Real>,
        loglog_x: Option<&Real>,
        (max_x, max_log, max_loglog): (u32, u32, u32),
        ctx: &PrecisionContext,
    ) -> Result<PowerTables> {
        let inv_x = inverse_powers(x, max_x, "x", ctx)?;
        let inv_log = match log_x {
            Some(lx) if max_log > 0 => inverse_powers(lx, max_log, "log x", ctx)?,
            _ => Vec::new(),
        };
        let inv_loglog = match loglog_x {
            Some(llx) if max_loglog > 0 => inverse_powers(llx, max_loglog, "log log x", ctx)?,
            _ => Vec::new(),
        };
        if max_log > 0 && inv_log.is_empty() {
            return Err(Error::domain(
                "a log x factor is required but unavailable".to_string(),
            ));
        }
        if max_loglog > 0 && inv_loglog.is_empty() {
            return Err(Error::domain(
                "a log log x factor is required but unavailable".to_string(),
            ));
        }
        Ok(PowerTables {
            inv_x,
            inv_log,
            inv_loglog,
        })
    }
}

/// `[1, b^-1, b^-2, ..., b^-max]`; the base must be strictly positive.
fn inverse_powers(base: &Real, max: u32, what: &str, ctx: &PrecisionContext) -> Result<Vec<Real>> {
    if max == 0 {
        return Ok(Vec::new());
    }
    if base.is_zero() || base.is_negative() {
        return Err(Error::domain(format!("non-positive {what} factor: {base}")));
    }
    let inv = base.recip(ctx);
    let mut pows = Vec::with_capacity(max as usize + 1);
    pows.push(Real::one(ctx));
    for i in 1..=max as usize {
        let next = pows[i - 1].mul(&inv, ctx);
        pows.push(next);
    }
    Ok(pows)
}
