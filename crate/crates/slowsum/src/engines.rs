//! The two acceleration engines.
//!
//! Both replace the infinite tail of the series beyond a switch-over
//! index `N` with the closed-form integral of the interpolating function
//! and then correct the bias between that smooth area and the Riemann
//! sum of unit-width slabs:
//!
//! * [`romberg_evaluate`] expands each slab around its midpoint and
//!   subtracts the even-derivative curvature corrections
//!   `sum_s (4^s (2s+1)!)^-1 * sum_{k>N} f^(2s)(k)`, with the inner sum
//!   truncated at a configurable index `k_hat`.
//! * [`euler_maclaurin_evaluate`] folds all curvature-correction paths
//!   into boundary terms: `sum_s 2^-(2s-1) beta(s) f^(2s-1)(N + 1/2)`,
//!   which needs no inner sums at all and converges much faster in the
//!   truncation order.
//!
//! Derivatives come from the exact atom algebra; the inner sums walk the
//! integers with an incremental logarithm ladder and are partitioned into
//! fixed-size chunks combined in index order, so results are bit-identical
//! regardless of thread count.

use num_bigint::BigInt;
use num_traits::One;
use once_cell::sync::Lazy;
use rayon::prelude::*;
use std::collections::HashMap;
use std::sync::Mutex;

use crate::atoms::{differentiate, AtomExpression, CompiledExpression, PowerTables};
use crate::error::{Error, Result};
use crate::exactnum::{beta, factorial, Rational};
use crate::hpreal::{PrecisionContext, Real};
use crate::series::{half_point, partial_sum, tail_integral, Family, SeriesSpec};

/// Knobs for a single engine run.
#[derive(Clone, Copy, Debug)]
pub struct EngineConfig {
    /// Last index summed directly; the tail machinery starts at
    /// `switch_over + 1`.
    pub switch_over: u64,
    /// Highest correction order included (0 disables corrections).
    pub s_max: u32,
    /// Truncation index of the inner sums of even derivatives; required
    /// by the Romberg engine, ignored by Euler-Maclaurin.
    pub k_hat: Option<u64>,
    pub precision: PrecisionContext,
}

/// Result of one engine run: the accelerated value plus the magnitude of
/// each correction order, in the order they were applied.
#[derive(Clone, Debug)]
pub struct EvaluationReport {
    pub value: Real,
    /// One entry per correction order `s = 1..=s_max`: the cumulative
    /// inner-sum correction for the Romberg engine, the individual signed
    /// boundary term for Euler-Maclaurin.
    pub correction_magnitudes: Vec<Real>,
    pub spec: SeriesSpec,
    pub config: EngineConfig,
}

type DerivativeKey = (Family, u32, u32);

/// Cache of symbolic derivatives per (family, alpha, order); computing
/// them is cheap but they are requested once per inner sum, which itself
/// re-evaluates atoms millions of times.
static DERIVATIVE_CACHE: Lazy<Mutex<HashMap<DerivativeKey, AtomExpression>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn derivative(spec: &SeriesSpec, order: u32) -> AtomExpression {
    let key = (spec.family(), spec.alpha(), order);
    if let Some(e) = DERIVATIVE_CACHE.lock().expect("derivative cache").get(&key) {
        return e.clone();
    }
    let e = differentiate(&spec.base_expression(), order);
    DERIVATIVE_CACHE
        .lock()
        .expect("derivative cache")
        .entry(key)
        .or_insert(e)
        .clone()
}

/// Curvature-corrected midpoint summation.
///
/// `value = partial_sum(N) + tail_integral(N)
///          - sum_{s=1}^{s_max} (4^s (2s+1)!)^-1 sum_{k=N+1}^{k_hat} f^(2s)(k)`.
pub fn romberg_evaluate(spec: &SeriesSpec, cfg: &EngineConfig) -> Result<EvaluationReport> {
    let k_hat = cfg
        .k_hat
        .ok_or_else(|| Error::config("the Romberg engine requires k_hat".to_string()))?;
    romberg_inner(spec, cfg, k_hat, None)
}

/// Romberg applied to the truncated problem `sum_{k=start}^{last_index}`:
/// the tail integral stops at `last_index + 1/2` and the inner sums at
/// `last_index`. Used to cross-check the engine against plain summation
/// of a finite range.
pub fn romberg_truncated(
    spec: &SeriesSpec,
    cfg: &EngineConfig,
    last_index: u64,
) -> Result<EvaluationReport> {
    romberg_inner(spec, cfg, last_index, Some(last_index))
}

fn romberg_inner(
    spec: &SeriesSpec,
    cfg: &EngineConfig,
    k_sum_end: u64,
    upper_cut: Option<u64>,
) -> Result<EvaluationReport> {
    let ctx = &cfg.precision;
    if k_sum_end <= cfg.switch_over {
        return Err(Error::config(format!(
            "k_hat ({k_sum_end}) must exceed the switch-over index ({})",
            cfg.switch_over
        )));
    }
    let head = partial_sum(spec, cfg.switch_over, ctx)?;
    let tail = bounded_tail(spec, cfg.switch_over, upper_cut, ctx)?;

    let orders: Vec<CompiledExpression> = (1..=cfg.s_max)
        .map(|s| CompiledExpression::new(&derivative(spec, 2 * s), ctx))
        .collect();
    let sums = summed_derivatives(&orders, cfg.switch_over + 1, k_sum_end, ctx)?;

    let mut corrections = Vec::with_capacity(cfg.s_max as usize);
    for (i, sum) in sums.iter().enumerate() {
        let s = i as u32 + 1;
        let weight = Rational::new(
            BigInt::one(),
            (BigInt::one() << (2 * s)) * factorial(2 * s as u64 + 1),
        );
        corrections.push(Real::from_rational(&weight, ctx).mul(sum, ctx));
    }
    let mut total = Real::zero(ctx);
    for c in &corrections {
        total = total.add(c, ctx);
    }
    let value = head.add(&tail, ctx).sub(&total, ctx);
    Ok(EvaluationReport {
        value,
        correction_magnitudes: corrections,
        spec: *spec,
        config: *cfg,
    })
}

/// Centered Euler-Maclaurin summation.
///
/// `value = partial_sum(N) + tail_integral(N)
///          + sum_{s=1}^{s_max} 2^-(2s-1) beta(s) f^(2s-1)(N + 1/2)`.
pub fn euler_maclaurin_evaluate(spec: &SeriesSpec, cfg: &EngineConfig) -> Result<EvaluationReport> {
    euler_maclaurin_inner(spec, cfg, None)
}

/// Euler-Maclaurin applied to the truncated problem
/// `sum_{k=start}^{last_index}`: the tail integral stops at
/// `last_index + 1/2` and each boundary term gains its counterpart at the
/// upper end with opposite sign.
pub fn euler_maclaurin_truncated(
    spec: &SeriesSpec,
    cfg: &EngineConfig,
    last_index: u64,
) -> Result<EvaluationReport> {
    if last_index <= cfg.switch_over {
        return Err(Error::config(format!(
            "truncation index ({last_index}) must exceed the switch-over index ({})",
            cfg.switch_over
        )));
    }
    euler_maclaurin_inner(spec, cfg, Some(last_index))
}

fn euler_maclaurin_inner(
    spec: &SeriesSpec,
    cfg: &EngineConfig,
    upper_cut: Option<u64>,
) -> Result<EvaluationReport> {
    let ctx = &cfg.precision;
    let head = partial_sum(spec, cfg.switch_over, ctx)?;
    let tail = bounded_tail(spec, cfg.switch_over, upper_cut, ctx)?;

    let lower = half_point(cfg.switch_over, ctx);
    let upper = upper_cut.map(|m| half_point(m, ctx));

    let mut corrections = Vec::with_capacity(cfg.s_max as usize);
    for s in 1..=cfg.s_max {
        let expr = CompiledExpression::new(&derivative(spec, 2 * s - 1), ctx);
        let mut boundary = expr.evaluate_at(&lower, ctx)?;
        if let Some(upper) = &upper {
            boundary = boundary.sub(&expr.evaluate_at(upper, ctx)?, ctx);
        }
        let weight = beta(s)? * Rational::new(BigInt::one(), BigInt::one() << (2 * s - 1));
        corrections.push(Real::from_rational(&weight, ctx).mul(&boundary, ctx));
    }
    let mut value = head.add(&tail, ctx);
    for c in &corrections {
        value = value.add(c, ctx);
    }
    Ok(EvaluationReport {
        value,
        correction_magnitudes: corrections,
        spec: *spec,
        config: *cfg,
    })
}

/// Tail integral from `n + 1/2` to infinity, or to `m + 1/2` when an
/// upper cut is given.
fn bounded_tail(
    spec: &SeriesSpec,
    n: u64,
    upper_cut: Option<u64>,
    ctx: &PrecisionContext,
) -> Result<Real> {
    let full = tail_integral(spec, n, ctx)?;
    match upper_cut {
        None => Ok(full),
        Some(m) => Ok(full.sub(&tail_integral(spec, m, ctx)?, ctx)),
    }
}

/// Runs the Euler-Maclaurin engine over an escalation schedule of
/// switch-over indices and correction orders until two successive
/// configurations agree to `target_digits` significant digits.
pub fn evaluate_constant(
    spec: &SeriesSpec,
    target_digits: u32,
    ctx: &PrecisionContext,
) -> Result<Real> {
    const SCHEDULE: [(u64, u32); 8] = [
        (20, 5),
        (40, 5),
        (80, 5),
        (160, 5),
        (20, 7),
        (40, 7),
        (80, 7),
        (160, 7),
    ];
    if target_digits == 0 {
        return Err(Error::config("target_digits must be positive".to_string()));
    }
    if target_digits + 10 > ctx.working_digits() {
        return Err(Error::config(format!(
            "target of {target_digits} digits needs a working precision of at least {} digits",
            target_digits + 10
        )));
    }
    let mut previous: Option<Real> = None;
    for (switch_over, s_max) in SCHEDULE {
        let cfg = EngineConfig {
            switch_over,
            s_max,
            k_hat: None,
            precision: *ctx,
        };
        let value = euler_maclaurin_evaluate(spec, &cfg)?.value;
        if let Some(prev) = &previous {
            if agrees_to_digits(prev, &value, target_digits, ctx) {
                return Ok(value);
            }
        }
        previous = Some(value);
    }
    let latest = previous.expect("schedule is non-empty");
    // Recompute the penultimate configuration for the diagnostic payload.
    let (switch_over, s_max) = SCHEDULE[SCHEDULE.len() - 2];
    let cfg = EngineConfig {
        switch_over,
        s_max,
        k_hat: None,
        precision: *ctx,
    };
    let previous = euler_maclaurin_evaluate(spec, &cfg)?.value;
    Err(Error::Convergence { previous, latest })
}

fn agrees_to_digits(a: &Real, b: &Real, digits: u32, ctx: &PrecisionContext) -> bool {
    if a.to_sig_string(digits) == b.to_sig_string(digits) {
        return true;
    }
    // Values straddling a rounding boundary still count when their
    // relative distance is below one unit in the requested digit.
    let tol = Real::from_rational(
        &Rational::new(BigInt::one(), BigInt::from(10u32).pow(digits)),
        ctx,
    );
    let diff = a.sub(b, ctx).abs();
    diff < b.abs().mul(&tol, ctx)
}

/// Fixed chunk width of the parallel inner sums. Chunks are summed
/// sequentially in ascending `k` and combined in index order, keeping the
/// result independent of the thread count.
const SUM_CHUNK: u64 = 4096;

/// Sums each compiled expression over the integer abscissas
/// `from..=to`, sharing one logarithm ladder and one set of inverse-power
/// tables per abscissa across all expressions.
fn summed_derivatives(
    orders: &[CompiledExpression],
    from: u64,
    to: u64,
    ctx: &PrecisionContext,
) -> Result<Vec<Real>> {
    if orders.is_empty() {
        return Ok(Vec::new());
    }
    let need_loglog = orders.iter().any(|o| o.needs_loglog());
    let (mut max_x, mut max_log, mut max_loglog) = (0u32, 0u32, 0u32);
    for o in orders {
        let (a, b, c) = o.max_powers();
        max_x = max_x.max(a);
        max_log = max_log.max(b);
        max_loglog = max_loglog.max(c);
    }
    let starts: Vec<u64> = (from..=to).step_by(SUM_CHUNK as usize).collect();
    let chunk_sums = starts
        .par_iter()
        .map(|&start| {
            let end = (start + SUM_CHUNK - 1).min(to);
            let mut ladder = LogLadder::start(start, need_loglog, ctx)?;
            let mut sums = vec![Real::zero(ctx); orders.len()];
            for k in start..=end {
                if k > start {
                    ladder.advance(ctx);
                }
                let x = Real::from_u64(k, ctx);
                let tables = PowerTables::from_logs(
                    &x,
                    Some(ladder.ln_k()),
                    ladder.lnln_k(),
                    (max_x, max_log, max_loglog),
                    ctx,
                )?;
                for (i, order) in orders.iter().enumerate() {
                    let v = order.evaluate_with_tables(&tables, ctx);
                    sums[i] = sums[i].add(&v, ctx);
                }
            }
            Ok(sums)
        })
        .collect::<Result<Vec<Vec<Real>>>>()?;

    let mut totals = vec![Real::zero(ctx); orders.len()];
    for chunk in chunk_sums {
        for (i, v) in chunk.into_iter().enumerate() {
            totals[i] = totals[i].add(&v, ctx);
        }
    }
    Ok(totals)
}

/// Walks `log k` (and optionally `log log k`) along consecutive integers.
///
/// One full logarithm is taken at the chunk start; each step then adds
/// `log((k+1)/k) = 2 atanh(1/(2k+1))` via a short arctanh series, which is
/// several times cheaper than a fresh logarithm at the same precision.
struct LogLadder {
    k: u64,
    ln_k: Real,
    lnln_k: Option<Real>,
    odd_recips: Vec<Real>,
    cutoff_bits: i32,
}

impl LogLadder {
    fn start(k: u64, need_loglog: bool, ctx: &PrecisionContext) -> Result<LogLadder> {
        let ln_k = Real::from_u64(k, ctx).ln(ctx)?;
        let lnln_k = if need_loglog {
            Some(ln_k.ln(ctx)?)
        } else {
            None
        };
        Ok(LogLadder {
            k,
            ln_k,
            lnln_k,
            odd_recips: vec![Real::one(ctx)],
            cutoff_bits: crate::hpreal::PrecisionContext::bits(ctx) as i32 + 8,
        })
    }

    fn ln_k(&self) -> &Real {
        &self.ln_k
    }

    fn lnln_k(&self) -> Option<&Real> {
        self.lnln_k.as_ref()
    }

    fn odd_recip(&mut self, j: usize, ctx: &PrecisionContext) -> Real {
        while self.odd_recips.len() <= j {
            let next = Real::from_u64(2 * self.odd_recips.len() as u64 + 1, ctx).recip(ctx);
            self.odd_recips.push(next);
        }
        self.odd_recips[j].clone()
    }

    /// `atanh(w) = w + w^3/3 + w^5/5 + ...` for small `w`.
    fn atanh_small(&mut self, w: &Real, ctx: &PrecisionContext) -> Real {
        let w2 = w.mul(w, ctx);
        let mut acc = w.clone();
        let mut power = w.clone();
        let mut j = 1usize;
        loop {
            power = power.mul(&w2, ctx);
            let recip = self.odd_recip(j, ctx);
            let contrib = power.mul(&recip, ctx);
            acc = acc.add(&contrib, ctx);
            match (contrib.binary_exponent(), acc.binary_exponent()) {
                (Some(ce), Some(ae)) if ce >= ae - self.cutoff_bits => j += 1,
                _ => break,
            }
        }
        acc
    }

    fn advance(&mut self, ctx: &PrecisionContext) {
        let w = Real::from_u64(2 * self.k + 1, ctx).recip(ctx);
        let step = self.atanh_small(&w, ctx);
        let two_step = step.add(&step, ctx);
        let new_ln = self.ln_k.add(&two_step, ctx);
        if let Some(lnln) = self.lnln_k.take() {
            // log log steps by 2 atanh((L1 - L0) / (L1 + L0)).
            let u = two_step.div(&new_ln.add(&self.ln_k, ctx), ctx);
            let ustep = self.atanh_small(&u, ctx);
            self.lnln_k = Some(lnln.add(&ustep.add(&ustep, ctx), ctx));
        }
        self.ln_k = new_ln;
        self.k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(50)
    }

    fn c_spec(alpha: u32) -> SeriesSpec {
        SeriesSpec::new(Family::C, alpha).unwrap()
    }

    fn cfg(switch_over: u64, s_max: u32, k_hat: Option<u64>) -> EngineConfig {
        EngineConfig {
            switch_over,
            s_max,
            k_hat,
            precision: ctx(),
        }
    }

    #[test]
    fn log_ladder_tracks_the_logarithm() {
        let c = ctx();
        let mut ladder = LogLadder::start(3, true, &c).unwrap();
        let tol = Real::from_str("1e-58", &c).unwrap();
        for k in 4..=8200u64 {
            ladder.advance(&c);
            if [4, 10, 100, 1000, 4096, 8192].contains(&k) {
                let x = Real::from_u64(k, &c);
                let expect_ln = x.ln(&c).unwrap();
                let expect_lnln = expect_ln.ln(&c).unwrap();
                let rel = ladder.ln_k().sub(&expect_ln, &c).abs().div(&expect_ln, &c);
                assert!(rel < tol, "ln drift at {k}: {rel}");
                let rel = ladder
                    .lnln_k()
                    .unwrap()
                    .sub(&expect_lnln, &c)
                    .abs()
                    .div(&expect_lnln, &c);
                assert!(rel < tol, "lnln drift at {k}: {rel}");
            }
        }
    }

    #[test]
    fn romberg_requires_k_hat() {
        let spec = c_spec(2);
        match romberg_evaluate(&spec, &cfg(20, 3, None)) {
            Err(Error::Config(_)) => {}
            other => panic!("expected a config error, got {other:?}"),
        }
        assert!(romberg_evaluate(&spec, &cfg(20, 3, Some(20))).is_err());
        assert!(romberg_evaluate(&spec, &cfg(2, 3, Some(400))).is_err());
    }

    #[test]
    fn romberg_zero_orders_is_head_plus_tail() {
        let c = ctx();
        let spec = c_spec(2);
        let report = romberg_evaluate(&spec, &cfg(20, 0, Some(400))).unwrap();
        assert!(report.correction_magnitudes.is_empty());
        let expect = partial_sum(&spec, 20, &c)
            .unwrap()
            .add(&tail_integral(&spec, 20, &c).unwrap(), &c);
        assert_eq!(report.value, expect);
    }

    #[test]
    fn romberg_reference_rows() {
        let spec = c_spec(2);
        let report = romberg_evaluate(&spec, &cfg(20, 3, Some(400))).unwrap();
        assert_eq!(report.value.to_fixed_string(19), "38.4067681111183854426");
        assert_eq!(report.correction_magnitudes.len(), 3);
        assert_eq!(
            report.correction_magnitudes[0].to_fixed_string(13),
            "0.0000517608816"
        );
        assert_eq!(
            report.correction_magnitudes[1].to_fixed_string(13),
            "0.0000000214938"
        );

        let report = romberg_evaluate(&spec, &cfg(80, 3, Some(6400))).unwrap();
        assert_eq!(report.value.to_fixed_string(19), "38.4067680928518160710");
    }

    #[test]
    fn euler_maclaurin_reference_cells() {
        let spec = c_spec(2);
        let r = euler_maclaurin_evaluate(&spec, &cfg(20, 0, None)).unwrap();
        assert!(r.correction_magnitudes.is_empty());
        assert_eq!(r.value.to_fixed_string(15), "38.406819893505282");
        let r = euler_maclaurin_evaluate(&spec, &cfg(80, 5, None)).unwrap();
        assert_eq!(r.correction_magnitudes.len(), 5);
        assert_eq!(r.value.to_fixed_string(15), "38.406768092821786");
        let r = euler_maclaurin_evaluate(&c_spec(5), &cfg(40, 5, None)).unwrap();
        assert_eq!(r.value.to_fixed_string(15), "41293.884397815171892");
    }

    #[test]
    fn truncated_engines_match_plain_summation() {
        let c = ctx();
        let spec = c_spec(2);

        // Plain ascending summation over the same finite range.
        let direct_2000 = partial_sum(&spec, 2000, &c).unwrap();
        let direct_1000 = partial_sum(&spec, 1000, &c).unwrap();

        let romberg = romberg_truncated(&spec, &cfg(80, 4, None), 2000).unwrap();
        let diff = romberg.value.sub(&direct_2000, &c).abs();
        let tol = Real::from_str("1e-20", &c).unwrap();
        assert!(diff < tol, "romberg truncated diff = {diff}");

        let em = euler_maclaurin_truncated(&spec, &cfg(40, 5, None), 1000).unwrap();
        let diff = em.value.sub(&direct_1000, &c).abs();
        assert!(diff < tol, "euler-maclaurin truncated diff = {diff}");
    }

    #[test]
    fn constants_from_escalation() {
        let c = ctx();
        let v = evaluate_constant(&c_spec(2), 16, &c).unwrap();
        assert_eq!(v.to_sig_string(16), "38.40676809282179");
        let v = evaluate_constant(&c_spec(4), 18, &c).unwrap();
        assert_eq!(v.to_sig_string(18), "3898.68733845534376");
        let v = evaluate_constant(&SeriesSpec::new(Family::D, 2).unwrap(), 15, &c).unwrap();
        assert_eq!(v.to_sig_string(15), "2.10974280123689");
    }

    #[test]
    fn evaluate_constant_validates_digit_budget() {
        let c = ctx();
        assert!(evaluate_constant(&c_spec(2), 41, &c).is_err());
        assert!(evaluate_constant(&c_spec(2), 0, &c).is_err());
    }
}
