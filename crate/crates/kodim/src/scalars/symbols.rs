use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::{Mutex, OnceLock};

/// An interned symbol name (coordinate, Fourier index, exponent m, family
/// parameter). Ordering is by name, so every container iteration and
/// printed output is deterministic across runs and platforms.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Symbol(&'static str);

fn interner() -> &'static Mutex<BTreeSet<&'static str>> {
    static INTERN: OnceLock<Mutex<BTreeSet<&'static str>>> = OnceLock::new();
    INTERN.get_or_init(|| Mutex::new(BTreeSet::new()))
}

impl Symbol {
    pub fn new(name: &str) -> Symbol {
        let mut set = interner().lock().unwrap();
        if let Some(existing) = set.get(name) {
            return Symbol(existing);
        }
        let leaked: &'static str = Box::leak(name.to_string().into_boxed_str());
        set.insert(leaked);
        Symbol(leaked)
    }

    pub fn name(&self) -> &'static str {
        self.0
    }
}

impl PartialOrd for Symbol {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Symbol {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(other.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A power product of symbols: sorted (symbol, exponent) pairs with all
/// exponents positive. The empty monomial is 1.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(Symbol, u32)>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(s: Symbol) -> Self {
        Monomial(vec![(s, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(Symbol, u32)>) -> Self {
        pairs.retain(|(_, e)| *e > 0);
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        // Merge duplicates defensively; inputs from parsing may repeat.
        let mut merged: Vec<(Symbol, u32)> = Vec::with_capacity(pairs.len());
        for (s, e) in pairs {
            match merged.last_mut() {
                Some((ls, le)) if *ls == s => *le += e,
                _ => merged.push((s, e)),
            }
        }
        Monomial(merged)
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pairs(&self) -> &[(Symbol, u32)] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent_of(&self, s: Symbol) -> u32 {
        self.0
            .iter()
            .find(|(t, _)| *t == s)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn contains(&self, s: Symbol) -> bool {
        self.exponent_of(s) > 0
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut pairs = self.0.clone();
        pairs.extend_from_slice(&rhs.0);
        Monomial::from_pairs(pairs)
    }

    /// Removes all powers of `s`, returning (exponent of s, remainder).
    pub fn split_off(&self, s: Symbol) -> (u32, Monomial) {
        let e = self.exponent_of(s);
        let rest: Vec<_> = self.0.iter().filter(|(t, _)| *t != s).cloned().collect();
        (e, Monomial(rest))
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.0.iter().map(|(s, _)| *s)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    /// Degree-lexicographic order: compare total degrees first, then
    /// lexicographically with earlier symbol names dominating (a higher
    /// exponent on the alphabetically earliest differing symbol wins).
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let mut a = self.0.iter();
        let mut b = other.0.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                // The exhausted side has exponent zero on the remaining
                // (later) symbols of the other side, while the other side
                // is positive there; since degrees tie this cannot happen
                // with equal prefixes, but stay total anyway.
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((sa, ea)), Some((sb, eb))) => match sa.cmp(sb) {
                    // self has a positive exponent on an earlier symbol.
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => {}
                        ord => return ord,
                    },
                },
            }
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_unit() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(s, e)| {
                if *e == 1 {
                    s.to_string()
                } else {
                    format!("{s}^{e}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interning_dedups() {
        let a = Symbol::new("x");
        let b = Symbol::new("x");
        assert_eq!(a, b);
        assert_eq!(a.name(), "x");
    }

    #[test]
    fn deglex_order() {
        let x = Symbol::new("x");
        let y = Symbol::new("y");
        let x2 = Monomial::from_pairs(vec![(x, 2)]);
        let xy = Monomial::from_pairs(vec![(x, 1), (y, 1)]);
        let y2 = Monomial::from_pairs(vec![(y, 2)]);
        let xv = Monomial::var(x);
        // Degree dominates.
        assert!(x2 > xv);
        // Same degree: earlier symbol with higher exponent wins.
        assert!(x2 > xy);
        assert!(xy > y2);
        assert!(Monomial::unit() < xv);
    }

    #[test]
    fn split_off_removes_symbol() {
        let x = Symbol::new("x");
        let y = Symbol::new("y");
        let m = Monomial::from_pairs(vec![(x, 2), (y, 3)]);
        let (e, rest) = m.split_off(x);
        assert_eq!(e, 2);
        assert_eq!(rest, Monomial::from_pairs(vec![(y, 3)]));
    }

    #[test]
    fn display_ascending_symbols() {
        let x = Symbol::new("x");
        let a = Symbol::new("a");
        let m = Monomial::from_pairs(vec![(x, 2), (a, 1)]);
        assert_eq!(m.to_string(), "a*x^2");
    }
}
