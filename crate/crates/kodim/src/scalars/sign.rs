//! Exact signs of real scalars via shrinking rational enclosures of π.
//!
//! A nonzero real element of ℚ(i)(π) cannot vanish at π (transcendence), so
//! evaluating numerator and denominator over a rational interval containing
//! π and refining until zero is excluded always terminates with the exact
//! sign. The enclosure comes from Machin's formula
//! π = 16 arctan(1/5) - 4 arctan(1/239), whose alternating partial sums
//! bracket the arctangents.

use super::pipoly::PiPoly;
use super::scalar::Scalar;
use crate::Error;
use num::{BigInt, BigRational, One, Signed, Zero};
use std::cmp::Ordering;

type Interval = (BigRational, BigRational);

/// Alternating-series bracket for arctan(1/x): (lower, upper).
fn arctan_recip_bracket(x: i64, terms: usize) -> Interval {
    let xb = BigInt::from(x);
    let mut partial = BigRational::zero();
    let mut prev = BigRational::zero();
    for k in 0..terms {
        let denom = BigInt::from(2 * k as i64 + 1) * xb.pow(2 * k as u32 + 1);
        let term = BigRational::new(BigInt::one(), denom);
        prev = partial.clone();
        if k % 2 == 0 {
            partial += term;
        } else {
            partial -= term;
        }
    }
    // Partial sums alternate around the limit.
    if partial <= prev {
        (partial, prev)
    } else {
        (prev, partial)
    }
}

/// Rational interval containing π; width shrinks roughly as 25^-terms.
pub fn pi_interval(terms: usize) -> Interval {
    let (a_lo, a_hi) = arctan_recip_bracket(5, terms);
    let (b_lo, b_hi) = arctan_recip_bracket(239, terms);
    let sixteen = BigRational::from_integer(16.into());
    let four = BigRational::from_integer(4.into());
    (
        &sixteen * &a_lo - &four * &b_hi,
        &sixteen * &a_hi - &four * &b_lo,
    )
}

fn iv_add(a: &Interval, b: &Interval) -> Interval {
    (&a.0 + &b.0, &a.1 + &b.1)
}

fn iv_mul(a: &Interval, b: &Interval) -> Interval {
    let products = [&a.0 * &b.0, &a.0 * &b.1, &a.1 * &b.0, &a.1 * &b.1];
    let lo = products.iter().min().unwrap().clone();
    let hi = products.iter().max().unwrap().clone();
    (lo, hi)
}

/// Interval Horner evaluation of a real pi-polynomial on an enclosure of π.
fn eval_on(p: &PiPoly, x: &Interval) -> Interval {
    let mut acc: Interval = (BigRational::zero(), BigRational::zero());
    for c in p.coeffs().iter().rev() {
        let cv = (c.re.clone(), c.re.clone());
        acc = iv_add(&iv_mul(&acc, x), &cv);
    }
    acc
}

fn interval_sign(iv: &Interval) -> Option<Ordering> {
    if iv.0.is_positive() {
        Some(Ordering::Greater)
    } else if iv.1.is_negative() {
        Some(Ordering::Less)
    } else {
        None
    }
}

fn poly_sign_at_pi(p: &PiPoly) -> Ordering {
    if p.is_zero() {
        return Ordering::Equal;
    }
    if let Some(c) = p.as_constant() {
        // Constant polynomial: sign of the rational itself.
        return c.re.cmp(&BigRational::zero());
    }
    let mut terms = 4usize;
    loop {
        let iv = eval_on(p, &pi_interval(terms));
        if let Some(sign) = interval_sign(&iv) {
            return sign;
        }
        terms *= 2;
        // Transcendence of pi guarantees termination; this bound is far
        // beyond anything the shipped data can need.
        assert!(terms <= 1 << 16, "pi enclosure refinement runaway");
    }
}

/// Exact sign of a real scalar (Less/Equal/Greater for negative/zero/
/// positive). Errors if the scalar has a nonzero imaginary part.
pub fn scalar_sign(s: &Scalar) -> Result<Ordering, Error> {
    if !s.is_real() {
        return Err(Error::Internal(format!(
            "sign of a non-real scalar requested: {s}"
        )));
    }
    // Split into real-coefficient parts: s real means s = re(s).
    let r = s.real_part();
    if r.is_zero() {
        return Ok(Ordering::Equal);
    }
    let num_sign = poly_sign_at_pi(r.num());
    let den_sign = poly_sign_at_pi(r.den());
    debug_assert_ne!(den_sign, Ordering::Equal);
    Ok(match (num_sign, den_sign) {
        (Ordering::Equal, _) => Ordering::Equal,
        (a, b) if a == b => Ordering::Greater,
        _ => Ordering::Less,
    })
}

/// Total order on real scalars through exact sign of the difference.
pub fn compare_real(a: &Scalar, b: &Scalar) -> Result<Ordering, Error> {
    scalar_sign(&a.sub(b))
}

/// f64 image of a real scalar, for rendering and the estimator only.
pub fn to_f64_approx(s: &Scalar) -> f64 {
    s.eval_f64(std::f64::consts::PI).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::GaussRational;

    #[test]
    fn pi_enclosure_is_tight_and_correct() {
        let (lo, hi) = pi_interval(8);
        let lo_f = num::ToPrimitive::to_f64(&lo).unwrap();
        let hi_f = num::ToPrimitive::to_f64(&hi).unwrap();
        assert!(lo_f < std::f64::consts::PI && std::f64::consts::PI < hi_f);
        assert!(hi_f - lo_f < 1e-9);
    }

    #[test]
    fn sign_distinguishes_pi_from_nearby_rationals() {
        // pi - 355/113 < 0 (the classical over-approximation)
        let s = Scalar::pi().sub(&Scalar::from_ratio(355, 113));
        assert_eq!(scalar_sign(&s).unwrap(), Ordering::Less);
        // pi - 3 > 0
        let t = Scalar::pi().sub(&Scalar::from_int(3));
        assert_eq!(scalar_sign(&t).unwrap(), Ordering::Greater);
        // pi^2 - 4 pi + 4 = (pi - 2)^2 > 0
        let u = Scalar::pi().sub(&Scalar::from_int(2)).pow(2);
        assert_eq!(scalar_sign(&u).unwrap(), Ordering::Greater);
    }

    #[test]
    fn zero_and_non_real_inputs() {
        assert_eq!(scalar_sign(&Scalar::zero()).unwrap(), Ordering::Equal);
        let err = scalar_sign(&Scalar::from_gauss(GaussRational::i()));
        assert!(err.is_err());
    }

    #[test]
    fn comparison_orders_samples() {
        // 3/4 pi > 1 > 1/2 > 3/19 pi
        let three_quarter_pi = Scalar::pi().mul(&Scalar::from_ratio(3, 4));
        let approacher = Scalar::pi().mul(&Scalar::from_ratio(3, 19));
        assert_eq!(
            compare_real(&three_quarter_pi, &Scalar::one()).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            compare_real(&approacher, &Scalar::from_ratio(1, 2)).unwrap(),
            Ordering::Less
        );
    }
}
