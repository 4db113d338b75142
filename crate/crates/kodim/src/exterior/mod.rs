//! Differential forms on parallelizable manifolds.
//!
//! A manifold here is a global-coordinate chart of even dimension 2n with a
//! declared frame of vector fields e_1..e_2n and the dual coframe e^1..e^2n,
//! both with polynomial coordinate coefficients, together with the lattice
//! data (translation periods plus finitely many non-translation shifts) that
//! presents the compact quotient. Everything downstream (almost complex
//! structures, section equations, Fourier reduction) works in this frame.
//!
//! Forms are stored over one of three bases:
//!
//! - the frame covectors `e^i` (the default working basis),
//! - the raw coordinate differentials `dx^j` (used internally by the
//!   exterior derivative and by pullbacks),
//! - the complex covectors `phi^k, phibar^k` of a specific almost complex
//!   structure (used for bidegree bookkeeping).
//!
//! The exterior derivative is computed from coordinate expressions, so the
//! structure equations of a manifold are derived output rather than trusted
//! input; a second backend accepts constant structure equations directly for
//! manifolds shipped without a coordinate presentation.

mod d;
mod form;
mod manifold;

#[cfg_attr(not(test), allow(dead_code))]
pub(crate) mod testdata;

pub use d::{bidegree_split, del, delbar, mu, mubar};
pub use form::{BasisKind, ComplexBasis, Form};
pub use manifold::{Backend, LatticeShift, ManifoldData};
