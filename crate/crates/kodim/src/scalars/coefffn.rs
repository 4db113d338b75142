use super::pipoly::PiPoly;
use super::scalar::Scalar;
use super::symbols::{Monomial, Symbol};
use super::join_signed_terms;
use num::{BigInt, BigRational};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Multivariate polynomial in declared symbols over [`Scalar`].
///
/// Terms live in a BTreeMap keyed by [`Monomial`] under the fixed
/// degree-lexicographic order, zero coefficients are pruned on every
/// operation, so equality and printing are deterministic. Display lists the
/// leading (deglex-greatest) term first.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct CoeffFn(BTreeMap<Monomial, Scalar>);

impl CoeffFn {
    pub fn zero() -> Self {
        CoeffFn(BTreeMap::new())
    }

    pub fn one() -> Self {
        CoeffFn::constant(Scalar::one())
    }

    pub fn constant(s: Scalar) -> Self {
        let mut map = BTreeMap::new();
        if !s.is_zero() {
            map.insert(Monomial::unit(), s);
        }
        CoeffFn(map)
    }

    pub fn from_int(n: i64) -> Self {
        CoeffFn::constant(Scalar::from_int(n))
    }

    pub fn symbol(s: Symbol) -> Self {
        let mut map = BTreeMap::new();
        map.insert(Monomial::var(s), Scalar::one());
        CoeffFn(map)
    }

    pub fn term(mono: Monomial, coeff: Scalar) -> Self {
        let mut map = BTreeMap::new();
        if !coeff.is_zero() {
            map.insert(mono, coeff);
        }
        CoeffFn(map)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Scalar)>) -> Self {
        let mut out = CoeffFn::zero();
        for (m, c) in terms {
            out.add_term(m, c);
        }
        out
    }

    fn add_term(&mut self, mono: Monomial, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.0.get_mut(&mono) {
            Some(c) => {
                let sum = c.add(&coeff);
                if sum.is_zero() {
                    self.0.remove(&mono);
                } else {
                    *c = sum;
                }
            }
            None => {
                self.0.insert(mono, coeff);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.0.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.0.len()
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        match self.0.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (m, c) = self.0.iter().next().unwrap();
                m.is_unit().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// The unique term when the polynomial is a monomial.
    pub fn single_term(&self) -> Option<(&Monomial, &Scalar)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    pub fn coefficient_of(&self, mono: &Monomial) -> Scalar {
        self.0.get(mono).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &rhs.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        CoeffFn(self.0.iter().map(|(m, c)| (m.clone(), c.neg())).collect())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = CoeffFn::zero();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &rhs.0 {
                out.add_term(ma.mul(mb), ca.mul(cb));
            }
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.is_zero() {
            return CoeffFn::zero();
        }
        CoeffFn(self.0.iter().map(|(m, c)| (m.clone(), c.mul(s))).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = CoeffFn::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        let mut out = CoeffFn::zero();
        for (m, c) in &self.0 {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn conjugate(&self) -> Self {
        // All symbols are real-valued, so conjugation acts on coefficients.
        self.map_coeffs(|c| c.conj())
    }

    /// Splits p = re + i*im with both parts having real coefficients.
    pub fn real_imag_parts(&self) -> (CoeffFn, CoeffFn) {
        let half = Scalar::from_ratio(1, 2);
        let minus_half_i = Scalar::from_ratio(-1, 2).mul(&Scalar::i());
        let conj = self.conjugate();
        let re = self.add(&conj).scale(&half);
        let im = self.sub(&conj).scale(&minus_half_i);
        (re, im)
    }

    pub fn derivative(&self, s: Symbol) -> Self {
        let mut out = CoeffFn::zero();
        for (m, c) in &self.0 {
            let (e, rest) = m.split_off(s);
            if e == 0 {
                continue;
            }
            let mono = if e == 1 {
                rest
            } else {
                rest.mul(&Monomial::from_pairs(vec![(s, e - 1)]))
            };
            out.add_term(mono, c.mul(&Scalar::from_int(e as i64)));
        }
        out
    }

    /// Exact evaluation of bound symbols; unbound symbols remain.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Scalar>) -> Self {
        let as_fns: BTreeMap<Symbol, CoeffFn> = bindings
            .iter()
            .map(|(s, v)| (*s, CoeffFn::constant(v.clone())))
            .collect();
        self.substitute_fns(&as_fns)
    }

    /// General polynomial substitution (used by lattice-shift pullbacks).
    pub fn substitute_fns(&self, bindings: &BTreeMap<Symbol, CoeffFn>) -> Self {
        let mut out = CoeffFn::zero();
        for (m, c) in &self.0 {
            let mut acc = CoeffFn::constant(c.clone());
            for (s, e) in m.pairs() {
                match bindings.get(s) {
                    Some(f) => acc = acc.mul(&f.pow(*e)),
                    None => {
                        acc = acc.mul(&CoeffFn::term(
                            Monomial::from_pairs(vec![(*s, *e)]),
                            Scalar::one(),
                        ))
                    }
                }
            }
            out = out.add(&acc);
        }
        out
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.0.keys().flat_map(|m| m.symbols()).collect()
    }

    pub fn contains_symbol(&self, s: Symbol) -> bool {
        self.0.keys().any(|m| m.contains(s))
    }

    pub fn degree_in(&self, s: Symbol) -> u32 {
        self.0.keys().map(|m| m.exponent_of(s)).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Coefficient polynomials of s^k, ascending in k, zeros skipped.
    pub fn as_univariate_in(&self, s: Symbol) -> Vec<(u32, CoeffFn)> {
        let mut by_power: BTreeMap<u32, CoeffFn> = BTreeMap::new();
        for (m, c) in &self.0 {
            let (e, rest) = m.split_off(s);
            by_power
                .entry(e)
                .or_insert_with(CoeffFn::zero)
                .add_term(rest, c.clone());
        }
        by_power.into_iter().filter(|(_, p)| !p.is_zero()).collect()
    }

    /// Multiplies through by the monic lcm L of all coefficient
    /// denominators, returning (L * self, L). The result has pi-polynomial
    /// coefficients (denominator 1), which is what the forcing component
    /// split needs.
    pub fn clear_pi_denominators(&self) -> (CoeffFn, PiPoly) {
        let mut l = PiPoly::one();
        for c in self.0.values() {
            l = PiPoly::lcm(&l, c.den());
        }
        let lf = Scalar::from_pipoly(l.clone());
        (self.scale(&lf), l)
    }

    /// Splits a denominator-free polynomial by powers of pi: returns
    /// (pi-degree, component) pairs where every component has pi-free
    /// coefficients. Vanishing of the whole polynomial at any real point of
    /// evaluation for the symbols is equivalent to vanishing of every
    /// component, because pi is transcendental over the coefficient data.
    pub fn pi_components(&self) -> Vec<(usize, CoeffFn)> {
        let mut by_power: BTreeMap<usize, CoeffFn> = BTreeMap::new();
        for (m, c) in &self.0 {
            debug_assert!(c.den().is_one(), "pi_components needs cleared denominators");
            for (k, g) in c.num().coeffs().iter().enumerate() {
                if g.is_zero() {
                    continue;
                }
                by_power
                    .entry(k)
                    .or_insert_with(CoeffFn::zero)
                    .add_term(m.clone(), Scalar::from_gauss(g.clone()));
            }
        }
        by_power.into_iter().filter(|(_, p)| !p.is_zero()).collect()
    }

    /// Lcm of the rational denominators of all Gaussian coefficients; the
    /// positive rational that clears fractions when the coefficients are
    /// pi-free rationals.
    pub fn rational_denominator_lcm(&self) -> BigRational {
        let mut l = BigInt::from(1);
        for c in self.0.values() {
            for g in c.num().coeffs() {
                l = num::Integer::lcm(&l, g.re.denom());
                l = num::Integer::lcm(&l, g.im.denom());
            }
            for g in c.den().coeffs() {
                l = num::Integer::lcm(&l, g.re.denom());
                l = num::Integer::lcm(&l, g.im.denom());
            }
        }
        BigRational::from_integer(l)
    }

    /// Complex f64 value with all symbols bound; numeric oracle only.
    pub fn eval_f64(&self, bindings: &BTreeMap<Symbol, f64>, pi: f64) -> (f64, f64) {
        let (mut re, mut im) = (0.0, 0.0);
        for (m, c) in &self.0 {
            let mut v = 1.0;
            for (s, e) in m.pairs() {
                let x = bindings.get(s).copied().unwrap_or(f64::NAN);
                v *= x.powi(*e as i32);
            }
            let (cr, ci) = c.eval_f64(pi);
            re += cr * v;
            im += ci * v;
        }
        (re, im)
    }
}

impl From<Scalar> for CoeffFn {
    fn from(s: Scalar) -> Self {
        CoeffFn::constant(s)
    }
}

impl fmt::Display for CoeffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .0
            .iter()
            .rev()
            .map(|(m, c)| {
                if m.is_unit() {
                    c.to_string()
                } else if c.is_one() {
                    m.to_string()
                } else if c.neg().is_one() {
                    format!("-{m}")
                } else if c.is_simple_term() {
                    format!("{c}*{m}")
                } else {
                    format!("({c})*{m}")
                }
            })
            .collect();
        write!(f, "{}", join_signed_terms(&terms))
    }
}

impl fmt::Debug for CoeffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(n: &str) -> Symbol {
        Symbol::new(n)
    }

    fn var(n: &str) -> CoeffFn {
        CoeffFn::symbol(sym(n))
    }

    /// (m + 2 i pi c)^2 = m^2 - 4 pi^2 c^2 + 4 i pi c m, imaginary part 4 pi m c.
    #[test]
    fn square_of_m_plus_2ipic() {
        let m = var("m");
        let c = var("c");
        let two_i_pi = Scalar::from_int(2).mul(&Scalar::i()).mul(&Scalar::pi());
        let p = m.add(&c.scale(&two_i_pi));
        let sq = p.pow(2);

        let expected = m.pow(2)
            .sub(&c.pow(2).scale(&Scalar::pi().pow(2).mul(&Scalar::from_int(4))))
            .add(&m.mul(&c).scale(&Scalar::from_int(4).mul(&Scalar::i()).mul(&Scalar::pi())));
        assert_eq!(sq, expected);

        let (re, im) = sq.real_imag_parts();
        let four_pi = Scalar::from_int(4).mul(&Scalar::pi());
        assert_eq!(im, m.mul(&c).scale(&four_pi));
        assert_eq!(re.add(&im.scale(&Scalar::i())), sq);
    }

    #[test]
    fn substitute_evaluates_exactly() {
        // (a + b x) at a=1, b=0 -> 1
        let p = var("a").add(&var("b").mul(&var("x")));
        let mut b = BTreeMap::new();
        b.insert(sym("a"), Scalar::one());
        b.insert(sym("b"), Scalar::zero());
        assert_eq!(p.substitute(&b), CoeffFn::one());
    }

    #[test]
    fn derivative_and_leibniz() {
        let x = sym("x");
        let p = var("x").pow(3);
        assert_eq!(
            p.derivative(x),
            var("x").pow(2).scale(&Scalar::from_int(3))
        );
        let q = var("x").add(&CoeffFn::one());
        let lhs = p.mul(&q).derivative(x);
        let rhs = p.derivative(x).mul(&q).add(&p.mul(&q.derivative(x)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pi_component_split() {
        // 2 i pi (a + b x) - 2 pi c + m: pi-part 2i(a+bx) - 2c, constant part m.
        let p = var("a")
            .add(&var("b").mul(&var("x")))
            .scale(&Scalar::from_int(2).mul(&Scalar::i()).mul(&Scalar::pi()))
            .sub(&var("c").scale(&Scalar::from_int(2).mul(&Scalar::pi())))
            .add(&var("m"));
        let (cleared, l) = p.clear_pi_denominators();
        assert!(l.is_one());
        let comps = cleared.pi_components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].0, 0);
        assert_eq!(comps[0].1, var("m"));
        assert_eq!(comps[1].0, 1);
        let expected = var("a")
            .add(&var("b").mul(&var("x")))
            .scale(&Scalar::from_int(2).mul(&Scalar::i()))
            .sub(&var("c").scale(&Scalar::from_int(2)));
        assert_eq!(comps[1].1, expected);
    }

    #[test]
    fn display_leading_term_first() {
        let p = var("x").pow(2).sub(&var("y")).add(&CoeffFn::from_int(3));
        assert_eq!(p.to_string(), "x^2 - y + 3");
        let q = var("x").scale(&Scalar::from_ratio(1, 4).mul(&Scalar::i()).neg());
        assert_eq!(q.to_string(), "-1/4*i*x");
    }
}
