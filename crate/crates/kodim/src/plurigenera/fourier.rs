//! Fourier reduction of the section system.
//!
//! A function on the quotient is expanded over lattice characters.  One
//! integer index per periodic coordinate labels the character, and the
//! derivative along a periodic coordinate becomes multiplication by
//! i * (2 pi / period) * index.  What remains is, per character, a linear
//! ODE system in the single non-periodic coordinate:
//!
//! ```text
//!     N * dF/dx + M(x, indices, m) * F = 0,
//! ```
//!
//! with constant N.  In the complex form F is the coefficient function
//! itself (one unknown); in the real form the equation is first scaled by
//! the least common denominator of its coefficients and split into real and
//! imaginary parts acting on F = (u, v), giving 2n equations in 2 unknowns.

use super::{MExp, SectionEquation};
use crate::error::Error;
use crate::Result;
use crate::exterior::ManifoldData;
use crate::linalg::{mat_det, Matrix};
use crate::scalars::{CoeffFn, Scalar, Symbol};
use num::{BigInt, BigRational, Integer, One};
use std::sync::Arc;

/// Which splitting of the system is produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemForm {
    /// One complex unknown per character.
    Complex,
    /// Real and imaginary parts as two real unknowns per character.
    Real,
}

/// One equation of the reduced system: `sum_k derivative[k] * dF_k/dx +
/// sum_k algebraic[k] * F_k = 0`.
#[derive(Clone, Debug)]
pub struct FourierRow {
    pub derivative: Vec<Scalar>,
    pub algebraic: Vec<CoeffFn>,
}

impl FourierRow {
    pub fn is_algebraic(&self) -> bool {
        self.derivative.iter().all(Scalar::is_zero)
    }
}

/// The reduced system together with the bookkeeping needed to interpret it:
/// which symbol names which character index, at which frequency, and which
/// coordinate carries the remaining derivative.
pub struct FourierSystem {
    manifold: Arc<ManifoldData>,
    form: SystemForm,
    unknowns: usize,
    rows: Vec<FourierRow>,
    index_symbols: Vec<Symbol>,
    periodic_coords: Vec<Symbol>,
    frequencies: Vec<Scalar>,
    x_coord: Option<Symbol>,
    m: MExp,
    m_symbol: Symbol,
}

impl FourierSystem {
    pub fn manifold(&self) -> &Arc<ManifoldData> {
        &self.manifold
    }

    pub fn form(&self) -> SystemForm {
        self.form
    }

    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    pub fn rows(&self) -> &[FourierRow] {
        &self.rows
    }

    /// Character index symbols, parallel to [`Self::periodic_coords`].
    pub fn index_symbols(&self) -> &[Symbol] {
        &self.index_symbols
    }

    pub fn periodic_coords(&self) -> &[Symbol] {
        &self.periodic_coords
    }

    /// Frequency 2 pi / period per periodic coordinate.
    pub fn frequencies(&self) -> &[Scalar] {
        &self.frequencies
    }

    pub fn x_coord(&self) -> Option<Symbol> {
        self.x_coord
    }

    pub fn m(&self) -> MExp {
        self.m
    }

    pub fn m_symbol(&self) -> Symbol {
        self.m_symbol
    }

    /// Indices of the rows without derivative term.
    pub fn algebraic_row_indices(&self) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&r| self.rows[r].is_algebraic())
            .collect()
    }

    /// The purely algebraic subsystem as a matrix over coefficient
    /// functions (rows without derivative term, all unknown columns).
    pub fn algebraic_matrix(&self) -> Matrix<CoeffFn> {
        self.algebraic_row_indices()
            .into_iter()
            .map(|r| self.rows[r].algebraic.clone())
            .collect()
    }

    /// Determinant of the algebraic subsystem when it is square.
    pub fn determinant(&self) -> Option<CoeffFn> {
        let alg = self.algebraic_matrix();
        if alg.len() == self.unknowns && self.unknowns > 0 {
            Some(mat_det(&alg))
        } else {
            None
        }
    }
}

/// Picks one fresh symbol per periodic coordinate, in declaration order,
/// avoiding coordinate names and the exponent symbol.
pub(crate) fn character_symbols(manifold: &ManifoldData) -> Result<Vec<Symbol>> {
    let taken: Vec<&str> = manifold
        .coords()
        .iter()
        .map(|s| s.name())
        .chain(std::iter::once("m"))
        .collect();
    let mut out = Vec::new();
    let mut letters = ('a'..='z').filter_map(|c| {
        let name = c.to_string();
        if taken.contains(&name.as_str()) || name == "i" {
            None
        } else {
            Some(name)
        }
    });
    for coord in manifold.coords() {
        if manifold.period_of(*coord).is_some() {
            let name = letters.next().ok_or_else(|| {
                Error::Unsupported("ran out of character index symbols".into())
            })?;
            out.push(Symbol::new(&name));
        }
    }
    Ok(out)
}

/// Least common multiple of the denominators of every rational constituent
/// of the scalars in an equation; used to scale before the real split.
fn rational_denominator_lcm(scalars: &[&Scalar]) -> BigInt {
    let mut acc = BigInt::one();
    for s in scalars {
        let d = s.num().denominator_lcm();
        debug_assert!(d.is_integer());
        acc = acc.lcm(&d.to_integer());
    }
    acc
}

fn collect_row_scalars<'a>(row: &'a [CoeffFn], a_j: &'a Scalar) -> Vec<&'a Scalar> {
    let mut out: Vec<&Scalar> = row.iter().flat_map(|c| c.terms().map(|(_, s)| s)).collect();
    out.push(a_j);
    out
}

/// Reduces the section system to one ODE system per lattice character.
pub fn fourier_reduce(eq: &SectionEquation, form: SystemForm) -> Result<FourierSystem> {
    let manifold = eq.manifold();
    let coords = manifold.coords();
    let index_symbols = character_symbols(manifold)?;
    let x_coord = manifold.nonperiodic_coords().first().copied();

    let mut periodic_coords = Vec::new();
    let mut frequencies = Vec::new();
    for coord in coords {
        if let Some(period) = manifold.period_of(*coord) {
            periodic_coords.push(*coord);
            let ratio = BigRational::from_integer(BigInt::from(2)) / period.clone();
            frequencies.push(Scalar::pi().mul(&Scalar::from_rational(ratio)));
        }
    }

    // Complex multiplier of d/dcoord on the character with the given index
    // symbol: i * frequency * index.
    let multiplier = |w: usize| -> CoeffFn {
        CoeffFn::symbol(index_symbols[w]).scale(&Scalar::i().mul(&frequencies[w]))
    };

    let m_coeff = eq.m_coeff();
    let mut rows = Vec::new();
    let unknowns = match form {
        SystemForm::Complex => 1,
        SystemForm::Real => 2,
    };

    for (j, row) in eq.xbar_coefficients().iter().enumerate() {
        let a_j = &eq.connection_coefficients()[j];

        // Derivative coefficient along x must be constant for the
        // reduction to stay an ODE system with constant leading term.
        let n_j = match x_coord {
            Some(x) => {
                let idx = manifold.coord_index(x).expect("x is a coordinate");
                row[idx].as_constant().ok_or_else(|| {
                    Error::Unsupported(format!(
                        "coefficient {} of d/d{} in equation {} is not constant",
                        row[idx],
                        x.name(),
                        j + 1
                    ))
                })?
            }
            None => Scalar::zero(),
        };

        match form {
            SystemForm::Complex => {
                let mut m_j = m_coeff.scale(a_j);
                let mut w = 0;
                for (l, coord) in coords.iter().enumerate() {
                    if manifold.period_of(*coord).is_some() {
                        m_j = m_j.add(&row[l].mul(&multiplier(w)));
                        w += 1;
                    }
                }
                rows.push(FourierRow {
                    derivative: vec![n_j],
                    algebraic: vec![m_j],
                });
            }
            SystemForm::Real => {
                let lcm = rational_denominator_lcm(&collect_row_scalars(row, a_j));
                let lambda = Scalar::from_rational(BigRational::from_integer(lcm));
                let (p, q) = {
                    let scaled = a_j.mul(&lambda);
                    (scaled.real_part(), scaled.imag_part())
                };
                let n_scaled = n_j.mul(&lambda);
                let (n_re, n_im) = (n_scaled.real_part(), n_scaled.imag_part());

                // Multiplier sums of the real and imaginary derivations.
                let mut a_mult = CoeffFn::zero();
                let mut b_mult = CoeffFn::zero();
                let mut w = 0;
                for (l, coord) in coords.iter().enumerate() {
                    if manifold.period_of(*coord).is_some() {
                        let scaled = row[l].scale(&lambda);
                        let (re, im) = scaled.real_imag_parts();
                        a_mult = a_mult.add(&re.mul(&multiplier(w)));
                        b_mult = b_mult.add(&im.mul(&multiplier(w)));
                        w += 1;
                    }
                }

                let mp = m_coeff.scale(&p);
                let mq = m_coeff.scale(&q);
                // Real part of the equation: A(u) - B(v) + m(p u - q v).
                rows.push(FourierRow {
                    derivative: vec![n_re.clone(), n_im.neg()],
                    algebraic: vec![a_mult.add(&mp), b_mult.add(&mq).neg()],
                });
                // Imaginary part: B(u) + A(v) + m(q u + p v).
                rows.push(FourierRow {
                    derivative: vec![n_im, n_re],
                    algebraic: vec![b_mult.add(&mq), a_mult.add(&mp)],
                });
            }
        }
    }

    Ok(FourierSystem {
        manifold: Arc::clone(manifold),
        form,
        unknowns,
        rows,
        index_symbols,
        periodic_coords,
        frequencies,
        x_coord,
        m: eq.m(),
        m_symbol: eq.m_symbol(),
    })
}
