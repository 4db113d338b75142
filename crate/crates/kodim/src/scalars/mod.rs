//! Exact arithmetic for ℚ(i)(π) and polynomial rings over it.
//!
//! The tower is built in layers:
//!
//! - [`GaussRational`]: complex numbers with rational real and imaginary
//!   parts, the coefficient field of everything else.
//! - [`PiPoly`]: univariate polynomials in the transcendental symbol `pi`
//!   over [`GaussRational`].
//! - [`Scalar`]: the fraction field of [`PiPoly`], i.e. ℚ(i)(π). Because π
//!   is transcendental a scalar is zero exactly when its numerator is the
//!   zero polynomial; no numeric evaluation is ever consulted for equality.
//! - [`CoeffFn`]: multivariate polynomials in declared symbols (coordinates,
//!   Fourier indices, the exponent m, family parameters) over [`Scalar`],
//!   with a fixed degree-lexicographic term order so printing and equality
//!   are deterministic.
//! - [`RatFn`]: ratios of [`CoeffFn`], used where denominators genuinely
//!   depend on symbols (deformation families).
//!
//! [`expr`] implements the shared expression grammar (integers, rationals,
//! `i`, `pi`, declared identifiers, `+ - * / ^`, parentheses) and [`sign`]
//! decides exact signs of real scalars through shrinking rational
//! enclosures of π.

mod gauss;
mod pipoly;
mod scalar;
mod symbols;
mod coefffn;
mod ratfn;
pub mod expr;
pub mod sign;

pub use coefffn::CoeffFn;
pub use expr::{parse_coeff_fn, parse_ratfn, parse_scalar};
pub use gauss::GaussRational;
pub use pipoly::PiPoly;
pub use ratfn::RatFn;
pub use scalar::Scalar;
pub use symbols::{Monomial, Symbol};

/// Joins additive term strings, folding a leading `-` of a term into the
/// connective so output reads `a - b` rather than `a + -b`.
pub(crate) fn join_signed_terms(terms: &[String]) -> String {
    let mut out = String::new();
    for (k, t) in terms.iter().enumerate() {
        if k == 0 {
            out.push_str(t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(t);
        }
    }
    out
}
