use super::gauss::GaussRational;
use super::pipoly::PiPoly;
use crate::Error;
use num::{BigRational, Zero};
use std::fmt;

/// An element of ℚ(i)(π): a ratio of polynomials in `pi` over the Gaussian
/// rationals.
///
/// Invariants kept by every constructor: the denominator is monic and
/// nonzero, and gcd(num, den) = 1. Since π is transcendental the value is
/// zero exactly when the numerator polynomial is zero; equality is
/// structural equality of the canonical form, never numeric.
#[derive(Clone, PartialEq, Eq)]
pub struct Scalar {
    num: PiPoly,
    den: PiPoly,
}

impl Scalar {
    /// Canonicalizing constructor. Panics if `den` is zero: callers on
    /// public paths guard with [`Scalar::checked_div`].
    pub fn new(num: PiPoly, den: PiPoly) -> Self {
        assert!(!den.is_zero(), "Scalar with zero denominator");
        if num.is_zero() {
            return Scalar { num, den: PiPoly::one() };
        }
        let g = PiPoly::gcd(&num, &den);
        let (mut num, r1) = num.divrem(&g);
        debug_assert!(r1.is_zero());
        let (mut den, r2) = den.divrem(&g);
        debug_assert!(r2.is_zero());
        let lead_inv = den.leading().unwrap().inv().unwrap();
        num = num.scale(&lead_inv);
        den = den.scale(&lead_inv);
        Scalar { num, den }
    }

    pub fn from_pipoly(p: PiPoly) -> Self {
        Scalar { num: p, den: PiPoly::one() }
    }

    pub fn from_gauss(g: GaussRational) -> Self {
        Scalar::from_pipoly(PiPoly::constant(g))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Scalar::from_gauss(GaussRational::from_rational(r))
    }

    pub fn zero() -> Self {
        Scalar::from_pipoly(PiPoly::zero())
    }

    pub fn one() -> Self {
        Scalar::from_pipoly(PiPoly::one())
    }

    pub fn i() -> Self {
        Scalar::from_gauss(GaussRational::i())
    }

    pub fn pi() -> Self {
        Scalar::from_pipoly(PiPoly::pi())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar::from_gauss(GaussRational::from_int(n))
    }

    /// p/q with q != 0.
    pub fn from_ratio(p: i64, q: i64) -> Self {
        Scalar::from_gauss(GaussRational::from_ratio(p, q))
    }

    pub fn num(&self) -> &PiPoly {
        &self.num
    }

    pub fn den(&self) -> &PiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Scalar::new(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        Scalar { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Scalar::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }

    /// Division with an error value naming both operands.
    pub fn checked_div(&self, rhs: &Self) -> Result<Self, Error> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero {
                num: self.to_string(),
                den: rhs.to_string(),
            });
        }
        Ok(Scalar::new(self.num.mul(&rhs.den), self.den.mul(&rhs.num)))
    }

    pub fn inv(&self) -> Result<Self, Error> {
        Scalar::one().checked_div(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        Scalar::new(self.num.pow(e), self.den.pow(e))
    }

    pub fn conj(&self) -> Self {
        // Conjugation is a field automorphism fixing pi; it preserves the
        // canonical form (a monic denominator stays monic).
        Scalar { num: self.num.conj(), den: self.den.conj() }
    }

    /// Real part as a Scalar: (s + conj s)/2.
    pub fn real_part(&self) -> Self {
        self.add(&self.conj()).mul(&Scalar::from_ratio(1, 2))
    }

    /// Imaginary part as a Scalar: (s - conj s)/(2i).
    pub fn imag_part(&self) -> Self {
        let minus_half_i = Scalar::from_gauss(GaussRational::new(
            BigRational::zero(),
            BigRational::new((-1).into(), 2.into()),
        ));
        self.sub(&self.conj()).mul(&minus_half_i)
    }

    pub fn is_real(&self) -> bool {
        self.imag_part().is_zero()
    }

    /// The plain complex number when no pi is involved.
    pub fn as_gauss(&self) -> Option<GaussRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// The rational value when the scalar lies in ℚ.
    pub fn as_rational(&self) -> Option<BigRational> {
        let g = self.as_gauss()?;
        g.is_real().then_some(g.re)
    }

    /// Decides membership in πℚ: returns q with self = q*pi (q = 0 for the
    /// zero scalar), or `None`. This drives the deformation dichotomy.
    pub fn pi_rational_part(&self) -> Option<BigRational> {
        if self.is_zero() {
            return Some(BigRational::zero());
        }
        if !self.den.is_one() || self.num.degree() != Some(1) {
            return None;
        }
        if !self.num.coeff(0).is_zero() {
            return None;
        }
        let lead = self.num.coeff(1);
        lead.is_real().then_some(lead.re)
    }

    pub fn is_pi_rational(&self) -> bool {
        self.pi_rational_part().is_some()
    }

    /// Complex f64 value at a floating pi; numeric oracle only.
    pub fn eval_f64(&self, pi: f64) -> (f64, f64) {
        let (nr, ni) = self.num.eval_f64(pi);
        let (dr, di) = self.den.eval_f64(pi);
        let d2 = dr * dr + di * di;
        ((nr * dr + ni * di) / d2, (ni * dr - nr * di) / d2)
    }

    /// Single pi-polynomial term with real or purely imaginary coefficient;
    /// prints without parentheses inside products.
    pub(crate) fn is_simple_term(&self) -> bool {
        self.den.is_one() && self.num.is_simple_term()
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        if self.num.is_simple_term() {
            write!(f, "{}/({})", self.num, self.den)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_times_inverse_pi_is_one() {
        let p = Scalar::pi();
        let q = p.inv().unwrap();
        assert!(p.mul(&q).is_one());
    }

    #[test]
    fn quarter_i_squared() {
        let q = Scalar::from_ratio(1, 4).mul(&Scalar::i());
        assert_eq!(q.mul(&q), Scalar::from_ratio(-1, 16));
    }

    #[test]
    fn division_by_zero_names_operands() {
        let err = Scalar::pi().checked_div(&Scalar::zero()).unwrap_err();
        assert_eq!(
            err.to_string(),
            "division by zero: (pi) / (0)"
        );
    }

    #[test]
    fn normalization_is_canonical() {
        // (2 pi) / (4 pi^2) reduces to 1/(2 pi) with monic denominator.
        let s = Scalar::new(
            PiPoly::pi().scale(&GaussRational::from_int(2)),
            PiPoly::pi().pow(2).scale(&GaussRational::from_int(4)),
        );
        assert_eq!(s, Scalar::from_ratio(1, 2).mul(&Scalar::pi().inv().unwrap()));
        assert!(s.den().is_monic());
    }

    #[test]
    fn real_imag_split() {
        // s = (1 + 2i) pi: re = pi, im = 2 pi.
        let s = Scalar::pi().mul(&Scalar::from_gauss(GaussRational::new(
            BigRational::from_integer(1.into()),
            BigRational::from_integer(2.into()),
        )));
        assert_eq!(s.real_part(), Scalar::pi());
        assert_eq!(s.imag_part(), Scalar::pi().mul(&Scalar::from_int(2)));
    }

    #[test]
    fn pi_rational_predicate() {
        assert_eq!(Scalar::zero().pi_rational_part(), Some(BigRational::zero()));
        let half_pi = Scalar::pi().mul(&Scalar::from_ratio(1, 2));
        assert_eq!(
            half_pi.pi_rational_part(),
            Some(BigRational::new(1.into(), 2.into()))
        );
        assert!(!Scalar::from_ratio(1, 2).is_pi_rational());
        assert!(!Scalar::pi().add(&Scalar::one()).is_pi_rational());
        assert!(!Scalar::pi().mul(&Scalar::i()).is_pi_rational());
        assert!(!Scalar::pi().pow(2).is_pi_rational());
    }

    #[test]
    fn conjugation_involution_and_automorphism() {
        let s = Scalar::new(
            PiPoly::new(vec![GaussRational::i(), GaussRational::from_ratio(2, 3)]),
            PiPoly::new(vec![GaussRational::from_int(1), GaussRational::from_int(1)]),
        );
        assert_eq!(s.conj().conj(), s);
        let t = Scalar::pi().add(&Scalar::i());
        assert_eq!(s.mul(&t).conj(), s.conj().mul(&t.conj()));
    }

    #[test]
    fn display_fraction() {
        let s = Scalar::one().checked_div(&Scalar::pi()).unwrap();
        assert_eq!(s.to_string(), "1/(pi)");
        let t = Scalar::pi().add(&Scalar::one()).inv().unwrap();
        assert_eq!(t.to_string(), "1/(pi + 1)");
    }
}
