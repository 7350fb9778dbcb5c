//! Shared numerical oracles for the integration and acceptance suites.
//!
//! Everything here is deliberately independent of the library's closed
//! forms and fast paths: the quadrature integrates the actual integrand,
//! the finite differences evaluate only the undifferentiated function,
//! and the direct summation takes a fresh logarithm for every term.

#![allow(dead_code)] // each test target uses its own subset

use rayon::prelude::*;
use std::cell::RefCell;

use slowsum::atoms::{evaluate, Atom, AtomExpression, CompiledExpression};
use slowsum::error::Result;
use slowsum::series::{Family, SeriesSpec};
use slowsum::{PrecisionContext, Real};

pub fn rel_err(got: &Real, expect: &Real, ctx: &PrecisionContext) -> Real {
    got.sub(expect, ctx).abs().div(&expect.abs(), ctx)
}

pub fn assert_below(value: &Real, bound: &str, ctx: &PrecisionContext, what: &str) {
    let tol = Real::from_str(bound, ctx).unwrap();
    assert!(*value < tol, "{what}: {value} >= {bound}");
}

// ---------------------------------------------------------------------
// Tanh-sinh quadrature
// ---------------------------------------------------------------------

/// Tanh-sinh (double-exponential) quadrature over finite intervals, with
/// node caching across panels. Converges like exp(-c 2^level) for
/// integrands analytic on the closed interval, which easily reaches the
/// 50-digit working precision here.
pub struct TanhSinh<'a> {
    ctx: &'a PrecisionContext,
    // levels[0]: nodes at t = 0, 1, 2, ...; levels[l]: odd multiples of 2^-l.
    levels: RefCell<Vec<Vec<(Real, Real)>>>,
}

const T_MAX: u64 = 5;
const MAX_LEVEL: usize = 12;

fn exp(x: &Real, ctx: &PrecisionContext) -> Real {
    x.exp(ctx).expect("tanh-sinh node overflow")
}

impl<'a> TanhSinh<'a> {
    pub fn new(ctx: &'a PrecisionContext) -> Self {
        TanhSinh {
            ctx,
            levels: RefCell::new(Vec::new()),
        }
    }

    /// Node at abscissa parameter `t`: `(tanh(u), (pi/2) cosh(t) / cosh(u)^2)`
    /// with `u = (pi/2) sinh(t)`.
    fn node(&self, t: &Real) -> (Real, Real) {
        let ctx = self.ctx;
        let half = Real::half(ctx);
        let half_pi = ctx.pi().mul(&half, ctx);
        let et = exp(t, ctx);
        let inv_et = et.recip(ctx);
        let sinh_t = et.sub(&inv_et, ctx).mul(&half, ctx);
        let cosh_t = et.add(&inv_et, ctx).mul(&half, ctx);
        let u = half_pi.mul(&sinh_t, ctx);
        let eu = exp(&u, ctx);
        let inv_eu = eu.recip(ctx);
        let num = eu.sub(&inv_eu, ctx);
        let den = eu.add(&inv_eu, ctx);
        let tanh_u = num.div(&den, ctx);
        let cosh_u = den.mul(&half, ctx);
        let weight = half_pi
            .mul(&cosh_t, ctx)
            .div(&cosh_u.mul(&cosh_u, ctx), ctx);
        (tanh_u, weight)
    }

    fn ensure_level(&self, level: usize) {
        let ctx = self.ctx;
        let mut levels = self.levels.borrow_mut();
        while levels.len() <= level {
            let l = levels.len();
            let mut nodes = Vec::new();
            if l == 0 {
                for j in 0..=T_MAX {
                    nodes.push(self.node(&Real::from_u64(j, ctx)));
                }
            } else {
                let denom = Real::from_u64(1 << l, ctx);
                let mut k = 1u64;
                while (2 * k - 1) < T_MAX << l {
                    let t = Real::from_u64(2 * k - 1, ctx).div(&denom, ctx);
                    nodes.push(self.node(&t));
                    k += 1;
                }
            }
            levels.push(nodes);
        }
    }

    /// Integrates `f` over `[a, b]`, refining until two successive levels
    /// agree to 1e-32 relative.
    pub fn integrate<F>(&self, f: &F, a: &Real, b: &Real) -> Result<Real>
    where
        F: Fn(&Real) -> Result<Real>,
    {
        let ctx = self.ctx;
        let half = Real::half(ctx);
        let center = a.add(b, ctx).mul(&half, ctx);
        let radius = b.sub(a, ctx).mul(&half, ctx);
        let tol = Real::from_str("1e-32", ctx).unwrap();

        let level_sum = |level: usize| -> Result<Real> {
            self.ensure_level(level);
            let levels = self.levels.borrow();
            let mut sum = Real::zero(ctx);
            for (i, (tanh_u, weight)) in levels[level].iter().enumerate() {
                if level == 0 && i == 0 {
                    // t = 0 contributes a single midpoint sample.
                    sum = sum.add(&weight.mul(&f(&center)?, ctx), ctx);
                    continue;
                }
                let offset = radius.mul(tanh_u, ctx);
                let fp = f(&center.add(&offset, ctx))?;
                let fm = f(&center.sub(&offset, ctx))?;
                sum = sum.add(&weight.mul(&fp.add(&fm, ctx), ctx), ctx);
            }
            Ok(sum)
        };

        // h = 1 at level 0, halved at each refinement.
        let mut estimate = level_sum(0)?;
        for level in 1..=MAX_LEVEL {
            let h = Real::one(ctx).div(&Real::from_u64(1 << level, ctx), ctx);
            let refined = estimate
                .mul(&half, ctx)
                .add(&h.mul(&level_sum(level)?, ctx), ctx);
            let close = refined.sub(&estimate, ctx).abs() < tol.mul(&refined.abs(), ctx);
            estimate = refined;
            if close && level >= 3 {
                return Ok(estimate.mul(&radius, ctx));
            }
        }
        panic!("tanh-sinh did not converge on [{a}, {b}]");
    }

    /// Integrates over `[a, b]` split into doubling panels `[a, 2a]`,
    /// `[2a, 4a]`, ... so each panel stays well-conditioned for the
    /// transform even when `b / a` is astronomically large.
    pub fn integrate_octaves<F>(&self, f: &F, a: &Real, b: &Real) -> Result<Real>
    where
        F: Fn(&Real) -> Result<Real>,
    {
        let ctx = self.ctx;
        let two = Real::from_u64(2, ctx);
        let mut lo = a.clone();
        let mut total = Real::zero(ctx);
        let mut panels = 0;
        while lo < *b {
            let mut hi = lo.mul(&two, ctx);
            if hi > *b {
                hi = b.clone();
            }
            total = total.add(&self.integrate(f, &lo, &hi)?, ctx);
            lo = hi;
            panels += 1;
            assert!(panels < 512, "octave split did not terminate");
        }
        Ok(total)
    }
}

/// Quadrature oracle for the tail integral of `spec` beyond `n + 1/2`:
/// integrates the true integrand over `[n+1/2, 16(n+1/2)]` in the
/// original variable, continues in the substituted variable where the
/// integrand is a bare power `v^-alpha`, and bounds the far remainder
/// below 1e-26 of the total. No step uses the closed form under test
/// above that remainder level.
pub fn tail_quadrature_oracle(spec: &SeriesSpec, n: u64, ctx: &PrecisionContext) -> Result<Real> {
    let quad = TanhSinh::new(ctx);
    let alpha = spec.alpha();

    let a = Real::from_u64(2 * n + 1, ctx).mul(&Real::half(ctx), ctx);
    let b = a.mul(&Real::from_u64(16, ctx), ctx);
    let base = spec.base_expression();
    let f = |x: &Real| evaluate(&base, x, ctx);
    let head = quad.integrate_octaves(&f, &a, &b)?;

    // Substitute v = log log x (family C) or v = log x (family D): the
    // remaining integrand is v^-alpha on [w0, infinity).
    let w0 = match spec.family() {
        Family::C => b.ln(ctx)?.ln(ctx)?,
        Family::D => b.ln(ctx)?,
    };
    let decades = (25 + alpha) / (alpha - 1); // (w0/y)^(alpha-1) <= 1e-25ish
    let y = w0.mul(&Real::from_u64(10, ctx).powi(decades as i64, ctx), ctx);
    let g = |v: &Real| Ok(v.powi(-(alpha as i64), ctx));
    let mid = quad.integrate_octaves(&g, &w0, &y)?;

    // Elementary power-rule bound on the remainder beyond y.
    let remainder = y
        .powi(-(alpha as i64 - 1), ctx)
        .div(&Real::from_u64(alpha as u64 - 1, ctx), ctx);

    Ok(head.add(&mid, ctx).add(&remainder, ctx))
}

// ---------------------------------------------------------------------
// Central finite differences
// ---------------------------------------------------------------------

/// Central finite-difference approximation of the order-`m` derivative of
/// the single atom `a` at `x`:
/// `h^-m sum_{i=0}^m (-1)^i C(m,i) f(x + (m/2 - i) h)`, error O(h^2).
/// Evaluates only the undifferentiated atom, so it is independent of the
/// symbolic differentiation it checks.
pub fn central_difference(
    a: Atom,
    m: u32,
    x: &Real,
    h: &Real,
    ctx: &PrecisionContext,
) -> Result<Real> {
    let f = AtomExpression::atom(a);
    let half = Real::half(ctx);
    let mut sum = Real::zero(ctx);
    let mut coeff = 1i128; // C(m, i), updated multiplicatively
    for i in 0..=m {
        let offset_halves = m as i64 - 2 * i as i64; // (m/2 - i) in halves
        let offset = Real::from_i64(offset_halves, ctx)
            .mul(&half, ctx)
            .mul(h, ctx);
        let sample = evaluate(&f, &x.add(&offset, ctx), ctx)?;
        let signed = if i % 2 == 0 { coeff } else { -coeff };
        sum = sum.add(&Real::from_i64(signed as i64, ctx).mul(&sample, ctx), ctx);
        coeff = coeff * (m as i128 - i as i128) / (i as i128 + 1);
    }
    Ok(sum.div(&h.powi(m as i64, ctx), ctx))
}

// ---------------------------------------------------------------------
// Direct summation
// ---------------------------------------------------------------------

/// Plain term-by-term summation of `spec` over `from..=to`, each term
/// evaluated with fresh logarithms. Chunks are summed in ascending order
/// and combined in index order, so the result does not depend on the
/// worker count.
pub fn direct_sum(spec: &SeriesSpec, from: u64, to: u64, ctx: &PrecisionContext) -> Real {
    const CHUNK: u64 = 8192;
    let starts: Vec<u64> = (from..=to).step_by(CHUNK as usize).collect();
    let partials: Vec<Real> = starts
        .par_iter()
        .map(|&start| {
            let compiled = CompiledExpression::new(&spec.base_expression(), ctx);
            let end = (start + CHUNK - 1).min(to);
            let mut acc = Real::zero(ctx);
            for k in start..=end {
                let t = compiled
                    .evaluate_at(&Real::from_u64(k, ctx), ctx)
                    .expect("term evaluation in range");
                acc = acc.add(&t, ctx);
            }
            acc
        })
        .collect();
    let mut total = Real::zero(ctx);
    for p in partials {
        total = total.add(&p, ctx);
    }
    total
}

// ---------------------------------------------------------------------
// Golden tables
// ---------------------------------------------------------------------

pub const GOLDEN_TABLE_1: &str = include_str!("../golden/table1.txt");
pub const GOLDEN_TABLE_2: &str = include_str!("../golden/table2.txt");

pub fn parse_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}
