//! Command-line front end: evaluate a series constant, run a single engine
//! configuration, or reproduce the reference convergence tables.
//!
//! All behavior is driven by flags (no config files or environment
//! variables) so invocations are reproducible byte for byte; diagnostics
//! go to stderr. Exit codes: 0 success, 1 numerical failure, 2 usage
//! error.

use clap::{Parser, ValueEnum};

use crate::engines::{
    euler_maclaurin_evaluate, evaluate_constant, romberg_evaluate, EngineConfig, EvaluationReport,
};
use crate::error::Error;
use crate::hpreal::PrecisionContext;
use crate::series::{partial_sum, Family, SeriesSpec};

#[derive(Parser, Debug)]
#[command(
    name = "slowsum",
    version,
    about = "High-precision evaluation of slowly convergent logarithmic series"
)]
pub struct Cli {
    /// Series family: terms 1/(k log k (log log k)^alpha) for `c`,
    /// 1/(k (log k)^alpha) for `d`
    #[arg(long, value_enum)]
    pub series: Option<FamilyArg>,

    /// Exponent of the outermost logarithm (at least 2)
    #[arg(long)]
    pub alpha: Option<u32>,

    /// Evaluation engine (default: em)
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,

    /// Switch-over index: last term summed directly. Without it the em
    /// engine escalates until the value stabilizes at --digits digits
    #[arg(long)]
    pub n: Option<u64>,

    /// Highest correction order (default: 5 for em, 3 for romberg)
    #[arg(long)]
    pub s_max: Option<u32>,

    /// Truncation index of the inner derivative sums (romberg only)
    #[arg(long)]
    pub k_hat: Option<u64>,

    /// Significant digits to print (default: 15)
    #[arg(long)]
    pub digits: Option<u32>,

    /// Working precision in decimal digits (default: 50)
    #[arg(long)]
    pub precision: Option<u32>,

    /// Print reference convergence table 1 or 2 instead of a value
    #[arg(long)]
    pub table: Option<u8>,

    /// Output format for tables (default: plain)
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    C,
    D,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::C => Family::C,
            FamilyArg::D => Family::D,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    /// Centered Euler-Maclaurin (boundary corrections only)
    Em,
    /// Midpoint integral with curvature-correction inner sums
    Romberg,
    /// Plain partial summation up to --n, no tail replacement
    Direct,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Plain,
    Csv,
}

/// One evaluated configuration with its decimal renderings; every string
/// is rounded half-to-even from the full-precision value.
#[derive(Clone, Debug)]
pub struct OutputRecord {
    pub family: Family,
    pub alpha: u32,
    pub engine: &'static str,
    pub switch_over: Option<u64>,
    pub s_max: Option<u32>,
    pub k_hat: Option<u64>,
    pub value: String,
    pub corrections: Vec<String>,
}

impl OutputRecord {
    fn from_report(report: &EvaluationReport, engine: &'static str, digits: u32) -> OutputRecord {
        OutputRecord {
            family: report.spec.family(),
            alpha: report.spec.alpha(),
            engine,
            switch_over: Some(report.config.switch_over),
            s_max: Some(report.config.s_max),
            k_hat: report.config.k_hat,
            value: report.value.to_sig_string(digits),
            corrections: report
                .correction_magnitudes
                .iter()
                .map(|c| c.to_sig_string(digits))
                .collect(),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or flag combinations; exit code 2.
    Usage(String),
    /// The computation itself failed (e.g. no convergence); exit code 1.
    Failure(String),
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        match e {
            Error::Config(msg) | Error::Domain(msg) => CliError::Usage(msg),
            e @ Error::Convergence { .. } => CliError::Failure(e.to_string()),
        }
    }
}

/// Executes a parsed command line and returns what should be printed to
/// stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let precision = cli.precision.unwrap_or(50);
    if !(30..=10_000).contains(&precision) {
        return Err(usage("--precision must lie between 30 and 10000 digits"));
    }
    let ctx = PrecisionContext::new(precision);

    if let Some(which) = cli.table {
        if cli.series.is_some()
            || cli.alpha.is_some()
            || cli.engine.is_some()
            || cli.n.is_some()
            || cli.s_max.is_some()
            || cli.k_hat.is_some()
            || cli.digits.is_some()
        {
            return Err(usage("--table does not combine with evaluation flags"));
        }
        let format = cli.format.unwrap_or(FormatArg::Plain);
        return cmd_table(which, format, &ctx).map_err(CliError::from);
    }
    if cli.format.is_some() {
        return Err(usage("--format applies only to --table output"));
    }

    let family = cli.series.ok_or_else(|| usage("--series is required"))?;
    let alpha = cli.alpha.ok_or_else(|| usage("--alpha is required"))?;
    let spec = SeriesSpec::new(family.into(), alpha)?;
    let digits = cli.digits.unwrap_or(15);
    if digits == 0 {
        return Err(usage("--digits must be positive"));
    }
    if digits + 10 > precision {
        return Err(usage(format!(
            "--digits {digits} needs --precision of at least {}",
            digits + 10
        )));
    }

    let record = cmd_eval(cli, &spec, digits, &ctx)?;
    Ok(format!("{}\n", record.value))
}

/// Evaluates a single value according to the engine flags.
fn cmd_eval(
    cli: &Cli,
    spec: &SeriesSpec,
    digits: u32,
    ctx: &PrecisionContext,
) -> Result<OutputRecord, CliError> {
    match cli.engine.unwrap_or(EngineArg::Em) {
        EngineArg::Em => {
            if cli.k_hat.is_some() {
                return Err(usage("--k-hat applies only to the romberg engine"));
            }
            match (cli.n, cli.s_max) {
                (None, None) => {
                    let value = evaluate_constant(spec, digits, ctx)?;
                    Ok(OutputRecord {
                        family: spec.family(),
                        alpha: spec.alpha(),
                        engine: "em",
                        switch_over: None,
                        s_max: None,
                        k_hat: None,
                        value: value.to_sig_string(digits),
                        corrections: Vec::new(),
                    })
                }
                (Some(n), s_max) => {
                    let cfg = EngineConfig {
                        switch_over: n,
                        s_max: s_max.unwrap_or(5),
                        k_hat: None,
                        precision: *ctx,
                    };
                    let report = euler_maclaurin_evaluate(spec, &cfg)?;
                    Ok(OutputRecord::from_report(&report, "em", digits))
                }
                (None, Some(_)) => Err(usage("--s-max requires --n")),
            }
        }
        EngineArg::Romberg => {
            let n = cli
                .n
                .ok_or_else(|| usage("the romberg engine requires --n"))?;
            let k_hat = cli
                .k_hat
                .ok_or_else(|| usage("the romberg engine requires --k-hat"))?;
            let cfg = EngineConfig {
                switch_over: n,
                s_max: cli.s_max.unwrap_or(3),
                k_hat: Some(k_hat),
                precision: *ctx,
            };
            let report = romberg_evaluate(spec, &cfg)?;
            Ok(OutputRecord::from_report(&report, "romberg", digits))
        }
        EngineArg::Direct => {
            if cli.s_max.is_some() || cli.k_hat.is_some() {
                return Err(usage(
                    "--s-max and --k-hat do not apply to the direct engine",
                ));
            }
            let n = cli
                .n
                .ok_or_else(|| usage("the direct engine requires --n"))?;
            let value = partial_sum(spec, n, ctx)?;
            Ok(OutputRecord {
                family: spec.family(),
                alpha: spec.alpha(),
                engine: "direct",
                switch_over: Some(n),
                s_max: None,
                k_hat: None,
                value: value.to_sig_string(digits),
                corrections: Vec::new(),
            })
        }
    }
}

/// Renders reference convergence table 1 (Romberg engine, family C at
/// alpha = 2, correction orders up to 3) or table 2 (Euler-Maclaurin
/// engine, families C at alpha = 2..5).
pub fn cmd_table(which: u8, format: FormatArg, ctx: &PrecisionContext) -> Result<String, Error> {
    match which {
        1 => cmd_table_romberg(format, ctx),
        2 => cmd_table_euler_maclaurin(format, ctx),
        other => Err(Error::config(format!(
            "--table must be 1 or 2, got {other}"
        ))),
    }
}

/// Table 1: value and the first two cumulative correction magnitudes of
/// the Romberg engine at alpha = 2 for each (N, k_hat) pair. Values carry
/// 19 decimals, corrections 13.
fn cmd_table_romberg(format: FormatArg, ctx: &PrecisionContext) -> Result<String, Error> {
    let spec = SeriesSpec::new(Family::C, 2)?;
    let mut out = String::new();
    if format == FormatArg::Csv {
        out.push_str("n,k_hat,value,s1,s2\n");
    }
    for n in [20u64, 40, 80] {
        for k_hat in [400u64, 800, 1600, 3200, 6400] {
            let cfg = EngineConfig {
                switch_over: n,
                s_max: 3,
                k_hat: Some(k_hat),
                precision: *ctx,
            };
            let report = romberg_evaluate(&spec, &cfg)?;
            out.push_str(&format!(
                "{n},{k_hat},{},{},{}\n",
                report.value.to_fixed_string(19),
                report.correction_magnitudes[0].to_fixed_string(13),
                report.correction_magnitudes[1].to_fixed_string(13),
            ));
        }
    }
    Ok(out)
}

/// Table 2: Euler-Maclaurin values at 15 decimals for alpha = 2..5,
/// correction orders 0..5 and switch-over indices 20, 40 and 80.
fn cmd_table_euler_maclaurin(format: FormatArg, ctx: &PrecisionContext) -> Result<String, Error> {
    let mut out = String::new();
    if format == FormatArg::Csv {
        out.push_str("alpha,s_max,n20,n40,n80\n");
    }
    for alpha in 2u32..=5 {
        let spec = SeriesSpec::new(Family::C, alpha)?;
        for s_max in 0u32..=5 {
            let mut cells = Vec::with_capacity(3);
            for n in [20u64, 40, 80] {
                let cfg = EngineConfig {
                    switch_over: n,
                    s_max,
                    k_hat: None,
                    precision: *ctx,
                };
                let report = euler_maclaurin_evaluate(&spec, &cfg)?;
                cells.push(report.value.to_fixed_string(15));
            }
            out.push_str(&format!(
                "{alpha},{s_max},{},{},{}\n",
                cells[0], cells[1], cells[2]
            ));
        }
    }
    Ok(out)
}
