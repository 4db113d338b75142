//! Maximum principle strategy.
//!
//! For the equations with vanishing twist coefficient (a_j = 0), applying
//! X_j to X_jbar(f) = 0 and summing gives a second-order equation
//! P f = 0.  When the frame coefficients are constant, the coefficient
//! matrix sum_j conj(r_jk) r_jl of P is Hermitian, so its contraction with
//! the symmetric pair d_k d_l keeps only the real part
//!
//! ```text
//! H_kl = sum_j Re( conj(r_jk) r_jl )
//! ```
//!
//! and P is the real constant-coefficient operator H_kl d_k d_l with no
//! lower-order term.  If H is positive definite, P is elliptic and every
//! solution on the compact quotient is constant.  Substituting a constant
//! into the remaining equations (m a_j f = 0) settles the dimension.
//!
//! H is positive semidefinite by construction, so definiteness is decided
//! by the leading principal minors being positive; the test is exact and
//! returns Unknown when a minor vanishes or fails to be constant.

use super::SectionEquation;
use crate::linalg::{leading_principal_minor, Matrix};
use crate::scalars::sign::scalar_sign;
use crate::scalars::CoeffFn;

/// Outcome of the maximum principle test.
pub enum MaxPrincipleOutcome {
    /// The untwisted part of the system is elliptic: solutions are
    /// constant, and the dimension is 0 or 1.
    Elliptic { dim: usize, note: String },
    /// The test does not apply; `reason` says why.
    Unknown { reason: String },
}

/// Tests ellipticity of the untwisted part of the section system.
pub fn strategy_max_principle(eq: &SectionEquation) -> MaxPrincipleOutcome {
    let dim = eq.manifold().dim();
    let pure: Vec<usize> = (0..eq.equations())
        .filter(|&j| eq.connection_coefficients()[j].is_zero())
        .collect();
    if pure.is_empty() {
        return MaxPrincipleOutcome::Unknown {
            reason: "every equation carries the twist".into(),
        };
    }
    for &j in &pure {
        for coef in &eq.xbar_coefficients()[j] {
            if !coef.is_constant() {
                return MaxPrincipleOutcome::Unknown {
                    reason: format!(
                        "equation {} has non-constant coefficient {}",
                        j + 1,
                        coef
                    ),
                };
            }
        }
    }

    let mut h: Matrix<CoeffFn> = vec![vec![CoeffFn::zero(); dim]; dim];
    for &j in &pure {
        let row = &eq.xbar_coefficients()[j];
        for k in 0..dim {
            for l in 0..dim {
                let prod = row[k].conjugate().mul(&row[l]);
                let (re, _) = prod.real_imag_parts();
                h[k][l] = h[k][l].add(&re);
            }
        }
    }

    for k in 1..=dim {
        let minor = leading_principal_minor(&h, k);
        let value = match minor.as_constant() {
            Some(v) => v,
            None => {
                return MaxPrincipleOutcome::Unknown {
                    reason: format!("leading principal minor {k} of the symbol is not constant"),
                }
            }
        };
        match scalar_sign(&value) {
            Ok(std::cmp::Ordering::Greater) => {}
            Ok(_) => {
                return MaxPrincipleOutcome::Unknown {
                    reason: format!(
                        "leading principal minor {k} of the symbol is {value}, not positive"
                    ),
                }
            }
            Err(e) => {
                return MaxPrincipleOutcome::Unknown {
                    reason: format!("sign of minor {k} undecidable: {e}"),
                }
            }
        }
    }

    // Elliptic, so solutions are constant. A constant c solves the pure
    // equations; the twisted ones require m a_j c = 0.
    let twisted = eq.equations() - pure.len();
    if twisted == 0 {
        return MaxPrincipleOutcome::Elliptic {
            dim: 1,
            note: "the untwisted system is elliptic; solutions are exactly the constants".into(),
        };
    }
    let m_zero = matches!(eq.m(), super::MExp::Concrete(0));
    if m_zero {
        MaxPrincipleOutcome::Elliptic {
            dim: 1,
            note: "elliptic; solutions are constant, and the twist vanishes at exponent 0"
                .into(),
        }
    } else {
        MaxPrincipleOutcome::Elliptic {
            dim: 0,
            note: "elliptic; solutions are constant, and a nonzero twist coefficient forces \
                   the constant to vanish"
                .into(),
        }
    }
}
