use super::coefffn::CoeffFn;
use super::scalar::Scalar;
use super::symbols::Symbol;
use crate::Error;
use std::collections::BTreeMap;
use std::fmt;

/// A ratio of multivariate polynomials. Used where denominators genuinely
/// involve symbols, e.g. deformation family matrices with entries such as
/// 1/(ret + pi).
///
/// No gcd reduction is attempted (multivariate gcd is not needed at the
/// sizes involved); zero is normalized to 0/1 and equality is decided by
/// cross-multiplication, so the representation stays honest without
/// canonical forms.
#[derive(Clone)]
pub struct RatFn {
    num: CoeffFn,
    den: CoeffFn,
}

impl RatFn {
    pub fn new(num: CoeffFn, den: CoeffFn) -> Result<Self, Error> {
        if den.is_zero() {
            return Err(Error::DivisionByZero {
                num: num.to_string(),
                den: den.to_string(),
            });
        }
        if num.is_zero() {
            return Ok(RatFn { num, den: CoeffFn::one() });
        }
        Ok(RatFn { num, den })
    }

    pub fn zero() -> Self {
        RatFn { num: CoeffFn::zero(), den: CoeffFn::one() }
    }

    pub fn one() -> Self {
        RatFn { num: CoeffFn::one(), den: CoeffFn::one() }
    }

    pub fn num(&self) -> &CoeffFn {
        &self.num
    }

    pub fn den(&self) -> &CoeffFn {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        RatFn::new(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
        .expect("nonzero denominators stay nonzero under product")
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        RatFn { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        RatFn::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
            .expect("nonzero denominators stay nonzero under product")
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, Error> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero {
                num: self.to_string(),
                den: rhs.to_string(),
            });
        }
        RatFn::new(self.num.mul(&rhs.den), self.den.mul(&rhs.num))
    }

    pub fn inv(&self) -> Result<Self, Error> {
        RatFn::one().checked_div(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = RatFn::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn conjugate(&self) -> Self {
        RatFn { num: self.num.conjugate(), den: self.den.conjugate() }
    }

    /// Demotes to a polynomial when the denominator is a constant scalar.
    pub fn as_coeff_fn(&self) -> Option<CoeffFn> {
        let d = self.den.as_constant()?;
        let inv = d.inv().ok()?;
        Some(self.num.scale(&inv))
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        self.as_coeff_fn()?.as_constant()
    }

    /// Exact substitution; errors if the denominator vanishes at the
    /// bindings (the sample lies outside the domain).
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Scalar>) -> Result<RatFn, Error> {
        RatFn::new(self.num.substitute(bindings), self.den.substitute(bindings))
    }
}

impl From<CoeffFn> for RatFn {
    fn from(num: CoeffFn) -> Self {
        RatFn { num, den: CoeffFn::one() }
    }
}

impl From<Scalar> for RatFn {
    fn from(s: Scalar) -> Self {
        RatFn::from(CoeffFn::constant(s))
    }
}

impl PartialEq for RatFn {
    fn eq(&self, other: &Self) -> bool {
        self.num.mul(&other.den) == other.num.mul(&self.den)
    }
}

impl Eq for RatFn {}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.as_constant().is_some_and(|c| c.is_one()) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(n: &str) -> CoeffFn {
        CoeffFn::symbol(Symbol::new(n))
    }

    #[test]
    fn cross_multiplied_equality() {
        // x/x == 1 without any gcd machinery.
        let a = RatFn::new(var("x"), var("x")).unwrap();
        assert_eq!(a, RatFn::one());
    }

    #[test]
    fn field_ops() {
        let x = RatFn::from(var("x"));
        let one_over = x.inv().unwrap();
        assert_eq!(x.mul(&one_over), RatFn::one());
        assert!(x.sub(&x).is_zero());
        let zero = RatFn::zero();
        assert!(zero.inv().is_err());
    }

    #[test]
    fn substitute_checks_domain() {
        // 1/(ret + pi) at ret = -pi must error.
        let ret = Symbol::new("ret");
        let den = var("ret").add(&CoeffFn::constant(Scalar::pi()));
        let r = RatFn::new(CoeffFn::one(), den).unwrap();
        let mut bad = BTreeMap::new();
        bad.insert(ret, Scalar::pi().neg());
        assert!(r.substitute(&bad).is_err());
        let mut ok = BTreeMap::new();
        ok.insert(ret, Scalar::from_ratio(1, 2));
        let v = r.substitute(&ok).unwrap().as_constant().unwrap();
        assert_eq!(
            v,
            Scalar::pi().add(&Scalar::from_ratio(1, 2)).inv().unwrap()
        );
    }
}
