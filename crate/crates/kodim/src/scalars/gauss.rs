use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use std::fmt;

/// A Gaussian rational: re + im*i with both parts in ℚ.
///
/// `BigRational` keeps itself in lowest terms with positive denominator, so
/// structural equality is canonical-form equality.
#[derive(Clone, PartialEq, Eq)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn zero() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRational::new(BigRational::one(), BigRational::zero())
    }

    pub fn i() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRational::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    /// p/q as a real Gaussian rational. Panics if q = 0 (caller contract).
    pub fn from_ratio(p: i64, q: i64) -> Self {
        GaussRational::new(
            BigRational::new(BigInt::from(p), BigInt::from(q)),
            BigRational::zero(),
        )
    }

    pub fn from_rational(r: BigRational) -> Self {
        GaussRational::new(r, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussRational::new(self.re.clone(), -self.im.clone())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        GaussRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        GaussRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }

    pub fn neg(&self) -> Self {
        GaussRational::new(-self.re.clone(), -self.im.clone())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        GaussRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Some(GaussRational::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn scale_rat(&self, r: &BigRational) -> Self {
        GaussRational::new(&self.re * r, &self.im * r)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

pub(crate) fn rat_str(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.im.is_zero() {
            return write!(f, "{}", rat_str(&self.re));
        }
        let im_body = |im: &BigRational| -> String {
            let a = im.abs();
            if a.is_one() {
                "i".to_string()
            } else {
                format!("{}*i", rat_str(&a))
            }
        };
        if self.re.is_zero() {
            let body = im_body(&self.im);
            return if self.im.is_negative() {
                write!(f, "-{body}")
            } else {
                write!(f, "{body}")
            };
        }
        let conn = if self.im.is_negative() { " - " } else { " + " };
        write!(f, "{}{}{}", rat_str(&self.re), conn, im_body(&self.im))
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_i_squared_is_minus_one_sixteenth() {
        let q = GaussRational::new(
            BigRational::zero(),
            BigRational::new(BigInt::from(1), BigInt::from(4)),
        );
        let sq = q.mul(&q);
        assert_eq!(sq, GaussRational::from_ratio(-1, 16));
    }

    #[test]
    fn inverse_roundtrip() {
        let g = GaussRational::new(
            BigRational::new(BigInt::from(3), BigInt::from(7)),
            BigRational::new(BigInt::from(-2), BigInt::from(5)),
        );
        let prod = g.mul(&g.inv().unwrap());
        assert!(prod.is_one());
        assert!(GaussRational::zero().inv().is_none());
    }

    #[test]
    fn conjugation_is_an_involution() {
        let g = GaussRational::new(
            BigRational::new(BigInt::from(1), BigInt::from(2)),
            BigRational::new(BigInt::from(5), BigInt::from(3)),
        );
        assert_eq!(g.conj().conj(), g);
    }

    #[test]
    fn display_forms() {
        assert_eq!(GaussRational::zero().to_string(), "0");
        assert_eq!(GaussRational::from_ratio(-3, 4).to_string(), "-3/4");
        assert_eq!(GaussRational::i().to_string(), "i");
        assert_eq!(GaussRational::i().neg().to_string(), "-i");
        let z = GaussRational::new(
            BigRational::from_integer(BigInt::from(2)),
            BigRational::new(BigInt::from(-1), BigInt::from(4)),
        );
        assert_eq!(z.to_string(), "2 - 1/4*i");
    }
}
