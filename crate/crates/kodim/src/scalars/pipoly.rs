use super::gauss::{rat_str, GaussRational};
use super::join_signed_terms;
use num::{BigRational, Signed, Zero};
use std::fmt;

/// Univariate polynomial in the transcendental symbol `pi` over the
/// Gaussian rationals. Dense representation, coefficient of pi^k at index
/// k; the invariant is that the vector carries no trailing zeros, so the
/// zero polynomial is the empty vector and equality is structural.
#[derive(Clone, PartialEq, Eq)]
pub struct PiPoly(Vec<GaussRational>);

impl PiPoly {
    pub fn new(mut coeffs: Vec<GaussRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        PiPoly(coeffs)
    }

    pub fn zero() -> Self {
        PiPoly(Vec::new())
    }

    pub fn one() -> Self {
        PiPoly::constant(GaussRational::one())
    }

    pub fn constant(c: GaussRational) -> Self {
        PiPoly::new(vec![c])
    }

    pub fn pi() -> Self {
        PiPoly::new(vec![GaussRational::zero(), GaussRational::one()])
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_one()
    }

    /// Degree of the zero polynomial is `None`.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&GaussRational> {
        self.0.last()
    }

    pub fn coeff(&self, k: usize) -> GaussRational {
        self.0.get(k).cloned().unwrap_or_else(GaussRational::zero)
    }

    pub fn coeffs(&self) -> &[GaussRational] {
        &self.0
    }

    pub fn is_constant(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn as_constant(&self) -> Option<GaussRational> {
        match self.0.len() {
            0 => Some(GaussRational::zero()),
            1 => Some(self.0[0].clone()),
            _ => None,
        }
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|c| c.is_real())
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.0.len().max(rhs.0.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k).add(&rhs.coeff(k)));
        }
        PiPoly::new(out)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        PiPoly(self.0.iter().map(|c| c.neg()).collect())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return PiPoly::zero();
        }
        let mut out = vec![GaussRational::zero(); self.0.len() + rhs.0.len() - 1];
        for (j, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (k, b) in rhs.0.iter().enumerate() {
                out[j + k] = out[j + k].add(&a.mul(b));
            }
        }
        PiPoly::new(out)
    }

    pub fn scale(&self, c: &GaussRational) -> Self {
        PiPoly::new(self.0.iter().map(|a| a.mul(c)).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = PiPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn conj(&self) -> Self {
        // pi is real, so conjugation acts on coefficients only.
        PiPoly(self.0.iter().map(|c| c.conj()).collect())
    }

    /// Euclidean division; panics if `d` is zero (internal contract, public
    /// paths go through `Scalar` which guards denominators).
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "PiPoly division by zero");
        let dd = d.degree().unwrap();
        let dl_inv = d.leading().unwrap().inv().unwrap();
        let mut rem = self.clone();
        let mut quo = vec![GaussRational::zero(); self.0.len().saturating_sub(dd)];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let c = rem.leading().unwrap().mul(&dl_inv);
            let shift = rd - dd;
            quo[shift] = c.clone();
            // rem -= c * pi^shift * d
            let mut sub = vec![GaussRational::zero(); shift];
            sub.extend(d.0.iter().map(|a| a.mul(&c)));
            rem = rem.sub(&PiPoly::new(sub));
        }
        (PiPoly::new(quo), rem)
    }

    /// Monic gcd by the Euclidean algorithm over the field ℚ(i).
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut x, mut y) = (a.clone(), b.clone());
        while !y.is_zero() {
            let (_, r) = x.divrem(&y);
            x = y;
            y = r;
        }
        if x.is_zero() {
            return x;
        }
        let lead_inv = x.leading().unwrap().inv().unwrap();
        x.scale(&lead_inv)
    }

    /// Least common multiple, normalized monic.
    pub fn lcm(a: &Self, b: &Self) -> Self {
        if a.is_zero() || b.is_zero() {
            return PiPoly::zero();
        }
        let g = PiPoly::gcd(a, b);
        let (q, r) = a.divrem(&g);
        debug_assert!(r.is_zero());
        let prod = q.mul(b);
        let lead_inv = prod.leading().unwrap().inv().unwrap();
        prod.scale(&lead_inv)
    }

    /// Positive rational d such that d * self has integer-denominator-free
    /// coefficients, i.e. the lcm of all coefficient denominators.
    pub fn denominator_lcm(&self) -> BigRational {
        use num::BigInt;
        let mut l = BigInt::from(1);
        for c in &self.0 {
            l = num::Integer::lcm(&l, c.re.denom());
            l = num::Integer::lcm(&l, c.im.denom());
        }
        BigRational::from_integer(l)
    }

    /// Complex Horner evaluation at a floating approximation of pi; used by
    /// the numeric oracle only.
    pub fn eval_f64(&self, pi: f64) -> (f64, f64) {
        let (mut re, mut im) = (0.0_f64, 0.0_f64);
        for c in self.0.iter().rev() {
            let (cr, ci) = c.to_f64_pair();
            re = re * pi + cr;
            im = im * pi + ci;
        }
        (re, im)
    }

    /// True when the polynomial is a single term c*pi^k whose coefficient is
    /// real or purely imaginary; such factors print without parentheses.
    pub(crate) fn is_simple_term(&self) -> bool {
        let nonzero: Vec<_> = self.0.iter().filter(|c| !c.is_zero()).collect();
        nonzero.len() == 1 && (nonzero[0].re.is_zero() || nonzero[0].im.is_zero())
    }

    fn term_string(c: &GaussRational, k: usize) -> String {
        let pi_part = match k {
            0 => String::new(),
            1 => "pi".to_string(),
            _ => format!("pi^{k}"),
        };
        if k == 0 {
            return c.to_string();
        }
        if c.is_one() {
            return pi_part;
        }
        if c.neg().is_one() {
            return format!("-{pi_part}");
        }
        if c.im.is_zero() {
            return format!("{}*{}", rat_str(&c.re), pi_part);
        }
        if c.re.is_zero() {
            let a = c.im.abs();
            let sign = if c.im.is_negative() { "-" } else { "" };
            return if num::One::is_one(&a) {
                format!("{sign}i*{pi_part}")
            } else {
                format!("{sign}{}*i*{}", rat_str(&a), pi_part)
            };
        }
        format!("({c})*{pi_part}")
    }
}

impl fmt::Display for PiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| PiPoly::term_string(c, k))
            .collect();
        write!(f, "{}", join_signed_terms(&terms))
    }
}

impl fmt::Debug for PiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(p: i64, q: i64) -> GaussRational {
        GaussRational::from_ratio(p, q)
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let p = PiPoly::new(vec![g(1, 1), GaussRational::zero(), GaussRational::zero()]);
        assert_eq!(p.degree(), Some(0));
        assert!(PiPoly::new(vec![GaussRational::zero()]).is_zero());
    }

    #[test]
    fn divrem_reconstructs() {
        // (pi^2 - 1) = (pi + 1)(pi - 1) + 0
        let p = PiPoly::new(vec![g(-1, 1), GaussRational::zero(), g(1, 1)]);
        let d = PiPoly::new(vec![g(1, 1), g(1, 1)]);
        let (q, r) = p.divrem(&d);
        assert!(r.is_zero());
        assert_eq!(q.mul(&d), p);
    }

    #[test]
    fn gcd_is_monic() {
        // gcd(2 pi^2 + 2 pi, 4 pi) = pi
        let a = PiPoly::new(vec![GaussRational::zero(), g(2, 1), g(2, 1)]);
        let b = PiPoly::new(vec![GaussRational::zero(), g(4, 1)]);
        assert_eq!(PiPoly::gcd(&a, &b), PiPoly::pi());
    }

    #[test]
    fn display_descending_with_sign_folding() {
        let p = PiPoly::new(vec![g(3, 1), g(0, 1), g(-4, 1)]);
        assert_eq!(p.to_string(), "-4*pi^2 + 3");
        let q = PiPoly::new(vec![GaussRational::i().neg(), g(1, 2)]);
        assert_eq!(q.to_string(), "1/2*pi - i");
    }
}
