//! High-precision evaluation of slowly convergent series of the form
//! `sum_k 1 / (k (log k)^l (log log k)^L)`.
//!
//! Direct summation of such series is hopeless: the partial sums gain
//! accuracy at a doubly-logarithmic pace. This crate instead sums a
//! modest number of terms directly, replaces the infinite remainder with
//! the closed-form integral of the interpolating function, and corrects
//! the bias between the smooth area and the Riemann sum by one of two
//! engines: curvature-corrected midpoint sums ([`engines::romberg_evaluate`])
//! or a centered Euler-Maclaurin formula ([`engines::euler_maclaurin_evaluate`]).
//!
//! ```
//! use slowsum::{engines, Family, PrecisionContext, SeriesSpec};
//!
//! let ctx = PrecisionContext::new(50);
//! let spec = SeriesSpec::new(Family::C, 2).unwrap();
//! let value = engines::evaluate_constant(&spec, 16, &ctx).unwrap();
//! assert_eq!(value.to_sig_string(16), "38.40676809282179");
//! ```

pub mod atoms;
pub mod cli;
pub mod engines;
pub mod error;
pub mod exactnum;
pub mod hpreal;
pub mod series;

pub use error::{Error, Result};
pub use hpreal::{PrecisionContext, Real};
pub use series::{Family, SeriesSpec};
