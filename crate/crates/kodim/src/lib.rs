//! Exact computation of plurigenera and Kodaira dimension for invariant
//! almost complex structures on compact nilmanifolds and solvmanifolds.
//!
//! Everything certified is computed over the exact field ℚ(i)(π): Gaussian
//! rationals extended by a transcendental symbol `pi`. Floating point enters
//! only the explicitly non-certified numeric oracle and the growth-exponent
//! estimator.
//!
//! # Quick start
//!
//! ```
//! use kodim::spec_io::builtin;
//! use kodim::plurigenera::{compute_plurigenus, MExp, Verdict};
//!
//! let (manifold, acs) = builtin::nilmanifold_n().unwrap();
//! let report = compute_plurigenus(&manifold, &acs, MExp::Symbolic).unwrap();
//! assert!(matches!(report.verdict, Verdict::VanishAllM { .. }));
//! ```
//!
//! The library is organized bottom-up:
//!
//! - [`scalars`]: exact arithmetic in ℚ(i)(π) and multivariate polynomials
//!   over it, plus the expression grammar used by all spec files.
//! - [`exterior`]: differential forms on parallelizable manifolds, exterior
//!   derivative from coordinate data, bidegree splitting.
//! - [`acs`]: almost complex structures, (1,0)-coframes, the canonical
//!   section and its defect form, integrability, the generalized
//!   Calabi-Yau checker.
//! - [`plurigenera`]: the section equation, Fourier reduction, the forcing
//!   case analysis with machine-checkable certificates, resonance counting,
//!   and the numeric oracle.
//! - [`kodaira`]: aggregation of plurigenus reports into a Kodaira
//!   dimension verdict, growth estimation, semicontinuity table checks.
//! - [`deformation`]: families J(t), the total space on M x disc, and
//!   parameter scans.
//! - [`spec_io`]: JSON spec files, built-in registry, report rendering.
//!
//! Each runnable example under `examples/` exercises one capability end to
//! end; the `kodim` binary exposes the same entry points as subcommands.

pub mod scalars;
pub mod linalg;
pub mod exterior;
pub mod acs;
pub mod plurigenera;
pub mod kodaira;
pub mod deformation;
pub mod spec_io;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
