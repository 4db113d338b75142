//! Algebraic forcing: which characters are killed by the algebraic part of
//! the reduced system.
//!
//! For a character index I, the algebraic rows impose M(x, I, m) F(x) = 0
//! pointwise in x.  If some maximal minor of M is a nonzero polynomial in
//! x, it vanishes at isolated points only, so F vanishes on a dense set and
//! by continuity everywhere.  The minor is a polynomial in x whose
//! coefficients live in Q(i)[pi][I, m]; since pi is transcendental, the
//! minor is nonzero as soon as a single (pi-degree, real/imaginary)
//! component of a single x-coefficient is nonzero as a rational polynomial
//! in (I, m).  Those components are the witness pool.
//!
//! The case analysis over integer indices is organized as a tree: a witness
//! that is a pure power of m kills every remaining character outright
//! (m >= 1); a witness that is a monomial in one index variable (times a
//! power of m) splits into the nonzero case (killed) and the zero case
//! (substituted and re-analyzed).  Characters reaching a leaf where every
//! minor vanishes identically survive and are handed to the resonance
//! strategy.

use super::fourier::FourierSystem;
use crate::error::Error;
use crate::Result;
use crate::linalg::{mat_det, Matrix};
use crate::scalars::{parse_coeff_fn, CoeffFn, Scalar, Symbol};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Binary case tree over the character indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CaseTree {
    /// Every character in this case is killed; `witness` is a rational
    /// polynomial in the indices and m that is nonzero throughout the case,
    /// and `component` records where in the minors it was found.
    Kill { witness: String, component: String },
    /// Split on one index variable.
    Branch {
        var: String,
        nonzero: Box<CaseTree>,
        zero: Box<CaseTree>,
    },
    /// No witness kills this case; the listed free indices survive.
    Survive {
        pinned_zero: Vec<String>,
        free: Vec<String>,
        reason: String,
    },
}

impl CaseTree {
    pub fn kill_count(&self) -> usize {
        match self {
            CaseTree::Kill { .. } => 1,
            CaseTree::Branch { nonzero, zero, .. } => zero.kill_count() + nonzero.kill_count(),
            CaseTree::Survive { .. } => 0,
        }
    }

    pub fn survivor_count(&self) -> usize {
        match self {
            CaseTree::Kill { .. } => 0,
            CaseTree::Branch { nonzero, zero, .. } => {
                zero.survivor_count() + nonzero.survivor_count()
            }
            CaseTree::Survive { .. } => 1,
        }
    }

    /// Multi-line rendering with one line per case.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, &mut Vec::new());
        out
    }

    fn render_into(&self, out: &mut String, path: &mut Vec<String>) {
        let prefix = if path.is_empty() {
            "all characters".to_string()
        } else {
            path.join(", ")
        };
        match self {
            CaseTree::Kill { witness, component } => {
                out.push_str(&format!(
                    "{prefix}: killed, witness {witness} ({component})\n"
                ));
            }
            CaseTree::Survive { free, reason, .. } => {
                let free = if free.is_empty() {
                    "none".to_string()
                } else {
                    free.join(", ")
                };
                out.push_str(&format!("{prefix}: survives (free: {free}; {reason})\n"));
            }
            CaseTree::Branch { var, nonzero, zero } => {
                path.push(format!("{var} != 0"));
                nonzero.render_into(out, path);
                path.pop();
                path.push(format!("{var} = 0"));
                zero.render_into(out, path);
                path.pop();
            }
        }
    }
}

/// A leaf of surviving characters: the indices pinned to zero along the
/// path and the ones still ranging over all integers.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivorLeaf {
    pub pinned_zero: Vec<Symbol>,
    pub free: Vec<Symbol>,
}

/// Result of the forcing analysis.
pub struct ForcingOutcome {
    pub tree: CaseTree,
    pub survivors: Vec<SurvivorLeaf>,
}

impl ForcingOutcome {
    pub fn kill_leaves(&self) -> usize {
        self.tree.kill_count()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Part {
    Im,
    Re,
}

impl Part {
    fn label(self) -> &'static str {
        match self {
            Part::Im => "im part",
            Part::Re => "re part",
        }
    }
}

/// A normalized witness candidate with its provenance inside the minors.
struct PoolElem {
    poly: CoeffFn,
    x_deg: u32,
    pi_deg: usize,
    part: Part,
}

impl PoolElem {
    fn component(&self) -> String {
        format!(
            "{} of the x^{} coefficient at pi^{}",
            self.part.label(),
            self.x_deg,
            self.pi_deg
        )
    }
}

/// All maximal minors of the algebraic subsystem under the given zero
/// substitutions.  Returns `None` when there are fewer algebraic rows than
/// unknowns.
fn maximal_minors(
    sys: &FourierSystem,
    pinned: &BTreeMap<Symbol, Scalar>,
) -> Option<Vec<CoeffFn>> {
    let alg: Matrix<CoeffFn> = sys
        .algebraic_matrix()
        .into_iter()
        .map(|row| row.into_iter().map(|e| e.substitute(pinned)).collect())
        .collect();
    let k = sys.unknowns();
    if alg.len() < k || k == 0 {
        return None;
    }
    let mut minors = Vec::new();
    let mut choice: Vec<usize> = (0..k).collect();
    loop {
        let sub: Matrix<CoeffFn> = choice.iter().map(|&r| alg[r].clone()).collect();
        minors.push(mat_det(&sub));
        // Next k-combination of row indices in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return Some(minors);
            }
            i -= 1;
            if choice[i] < alg.len() - (k - i) {
                choice[i] += 1;
                for j in i + 1..k {
                    choice[j] = choice[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Multiplies away every pi-polynomial denominator, preserving where the
/// minor vanishes.
fn clear_denominators(minor: &CoeffFn) -> CoeffFn {
    let mut dens = Vec::new();
    for (_, s) in minor.terms() {
        if !s.den().is_one() && !dens.contains(s.den()) {
            dens.push(s.den().clone());
        }
    }
    let mut out = minor.clone();
    for d in dens {
        out = out.scale(&Scalar::from_pipoly(d));
    }
    debug_assert!(out.terms().all(|(_, s)| s.den().is_one()));
    out
}

/// Splits the minors into the witness pool: rational polynomials in the
/// indices and m, one per (x-degree, pi-degree, re/im) component, each
/// normalized to leading coefficient 1 and deduplicated.
fn witness_pool(sys: &FourierSystem, minors: &[CoeffFn]) -> Vec<PoolElem> {
    let mut pool = Vec::new();
    let mut seen = BTreeSet::new();
    for minor in minors {
        // Components of distinct minors vanish independently, so the
        // split is scoped per minor.
        let mut components: BTreeMap<(u32, usize, Part), CoeffFn> = BTreeMap::new();
        let cleared = clear_denominators(minor);
        for (mono, s) in cleared.terms() {
            let (x_deg, rest) = match sys.x_coord() {
                Some(x) => mono.split_off(x),
                None => (0, mono.clone()),
            };
            for (pi_deg, g) in s.num().coeffs().iter().enumerate() {
                for (part, r) in [(Part::Re, &g.re), (Part::Im, &g.im)] {
                    if r != &num::BigRational::from_integer(0.into()) {
                        let term =
                            CoeffFn::term(rest.clone(), Scalar::from_rational(r.clone()));
                        components
                            .entry((x_deg, pi_deg, part))
                            .and_modify(|acc| *acc = acc.add(&term))
                            .or_insert(term);
                    }
                }
            }
        }
        for ((x_deg, pi_deg, part), poly) in components {
            if poly.is_zero() {
                continue;
            }
            let lead = poly
                .terms()
                .next()
                .map(|(_, s)| s.clone())
                .expect("nonzero polynomial has a term");
            let poly = poly.scale(&lead.inv().expect("leading coefficient is nonzero"));
            if seen.insert(poly.to_string()) {
                pool.push(PoolElem {
                    poly,
                    x_deg,
                    pi_deg,
                    part,
                });
            }
        }
    }
    pool
}

/// The variables of a single-term pool element, split into the exponent
/// symbol and index variables.
fn single_term_vars(elem: &CoeffFn, m_sym: Symbol) -> Option<(bool, Vec<Symbol>)> {
    let (mono, _) = elem.single_term()?;
    let mut has_m = false;
    let mut vars = Vec::new();
    for (s, _) in mono.pairs() {
        if *s == m_sym {
            has_m = true;
        } else {
            vars.push(*s);
        }
    }
    Some((has_m, vars))
}

fn build_tree(
    sys: &FourierSystem,
    pinned: &mut BTreeMap<Symbol, Scalar>,
    free: &[Symbol],
) -> CaseTree {
    let survive = |reason: String, pinned: &BTreeMap<Symbol, Scalar>| CaseTree::Survive {
        pinned_zero: pinned.keys().map(|s| s.name().to_string()).collect(),
        free: free.iter().map(|s| s.name().to_string()).collect(),
        reason,
    };

    let minors = match maximal_minors(sys, pinned) {
        Some(m) => m,
        None => {
            return survive(
                "fewer algebraic equations than unknowns".to_string(),
                pinned,
            )
        }
    };
    let pool = witness_pool(sys, &minors);
    if pool.is_empty() {
        return survive("every maximal minor vanishes identically".to_string(), pinned);
    }

    let m_sym = sys.m_symbol();
    // Rule A: monomial witness in m and exactly one index variable.
    let rule_a = pool.iter().find(|e| {
        matches!(single_term_vars(&e.poly, m_sym), Some((true, vars)) if vars.len() == 1)
    });
    // Rule B: witness that is a pure power of m (or a nonzero constant).
    let rule_b = pool.iter().find(|e| {
        matches!(single_term_vars(&e.poly, m_sym), Some((_, vars)) if vars.is_empty())
    });
    // Rule C: monomial witness in exactly one index variable, no m.
    let rule_c = pool.iter().find(|e| {
        matches!(single_term_vars(&e.poly, m_sym), Some((false, vars)) if vars.len() == 1)
    });

    if let Some(elem) = rule_a.or(rule_b.filter(|_| rule_a.is_none())) {
        let (has_m, vars) = single_term_vars(&elem.poly, m_sym).expect("rule matched");
        if vars.is_empty() {
            // Pure power of m: nonzero for every exponent m >= 1.
            return CaseTree::Kill {
                witness: elem.poly.to_string(),
                component: elem.component(),
            };
        }
        debug_assert!(has_m);
        return branch_on(sys, pinned, free, vars[0], elem);
    }
    if let Some(elem) = rule_c {
        let (_, vars) = single_term_vars(&elem.poly, m_sym).expect("rule matched");
        return branch_on(sys, pinned, free, vars[0], elem);
    }

    let listed = pool
        .iter()
        .map(|e| e.poly.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    survive(
        format!("no single-variable witness among {{{listed}}}"),
        pinned,
    )
}

fn branch_on(
    sys: &FourierSystem,
    pinned: &mut BTreeMap<Symbol, Scalar>,
    free: &[Symbol],
    var: Symbol,
    elem: &PoolElem,
) -> CaseTree {
    let nonzero = CaseTree::Kill {
        witness: elem.poly.to_string(),
        component: elem.component(),
    };
    pinned.insert(var, Scalar::zero());
    let remaining: Vec<Symbol> = free.iter().copied().filter(|s| *s != var).collect();
    let zero = build_tree(sys, pinned, &remaining);
    pinned.remove(&var);
    CaseTree::Branch {
        var: var.name().to_string(),
        nonzero: Box::new(nonzero),
        zero: Box::new(zero),
    }
}

fn collect_survivors(tree: &CaseTree, sys: &FourierSystem, out: &mut Vec<SurvivorLeaf>) {
    match tree {
        CaseTree::Kill { .. } => {}
        CaseTree::Branch { nonzero, zero, .. } => {
            collect_survivors(nonzero, sys, out);
            collect_survivors(zero, sys, out);
        }
        CaseTree::Survive {
            pinned_zero, free, ..
        } => {
            let find = |name: &str| {
                sys.index_symbols()
                    .iter()
                    .copied()
                    .find(|s| s.name() == name)
                    .expect("survivor names a known index symbol")
            };
            out.push(SurvivorLeaf {
                pinned_zero: pinned_zero.iter().map(|s| find(s)).collect(),
                free: free.iter().map(|s| find(s)).collect(),
            });
        }
    }
}

/// Builds the forcing case tree for the reduced system.
pub fn strategy_algebraic_forcing(sys: &FourierSystem) -> Result<ForcingOutcome> {
    let tree = build_tree(sys, &mut BTreeMap::new(), sys.index_symbols());
    let mut survivors = Vec::new();
    collect_survivors(&tree, sys, &mut survivors);
    Ok(ForcingOutcome { tree, survivors })
}

/// Deterministic pseudo-random sequence for the spot checks.
struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next() % (hi - lo + 1) as u64) as i64
    }
}

/// Re-walks a case tree against the system it claims to describe: every
/// kill witness is re-evaluated at 3 random integer index assignments
/// (respecting the path constraints), checking both that the witness is
/// nonzero and that some maximal minor stays a nonzero polynomial in x;
/// every survive leaf is re-checked to have identically vanishing minors.
pub(crate) fn spot_check_tree(sys: &FourierSystem, tree: &CaseTree) -> Result<()> {
    let mut declared: BTreeSet<Symbol> = sys.index_symbols().iter().copied().collect();
    declared.insert(sys.m_symbol());
    let mut rng = XorShift(0x9e3779b97f4a7c15);
    walk(sys, tree, &mut BTreeMap::new(), None, &declared, &mut rng)
}

fn walk(
    sys: &FourierSystem,
    tree: &CaseTree,
    zeros: &mut BTreeMap<Symbol, Scalar>,
    nonzero_var: Option<Symbol>,
    declared: &BTreeSet<Symbol>,
    rng: &mut XorShift,
) -> Result<()> {
    match tree {
        CaseTree::Branch { var, nonzero, zero } => {
            let var_sym = Symbol::new(var);
            walk(sys, nonzero, zeros, Some(var_sym), declared, rng)?;
            zeros.insert(var_sym, Scalar::zero());
            walk(sys, zero, zeros, None, declared, rng)?;
            zeros.remove(&var_sym);
            Ok(())
        }
        CaseTree::Survive { .. } => {
            let minors = maximal_minors(sys, zeros).unwrap_or_default();
            if witness_pool(sys, &minors).is_empty() || minors.is_empty() {
                Ok(())
            } else {
                Err(Error::Certificate(
                    "survive leaf has a nonvanishing minor component".into(),
                ))
            }
        }
        CaseTree::Kill { witness, .. } => {
            let witness = parse_coeff_fn(witness, declared)
                .map_err(|e| Error::Certificate(format!("unreadable witness: {e}")))?;
            // Provenance: the witness must be a monic component of a
            // minor under the current pins.
            let pinned_minors = maximal_minors(sys, zeros).unwrap_or_default();
            if !witness_pool(sys, &pinned_minors)
                .iter()
                .any(|e| e.poly == witness)
            {
                return Err(Error::Certificate(format!(
                    "witness {witness} is not a component of any minor on this branch",
                )));
            }
            // The witness must be nonzero on the whole branch: a single
            // term in m and the variable held nonzero here.
            let structurally_nonzero = single_term_vars(&witness, sys.m_symbol())
                .is_some_and(|(_, vars)| vars.iter().all(|v| Some(*v) == nonzero_var));
            if !structurally_nonzero {
                return Err(Error::Certificate(format!(
                    "witness {witness} can vanish on this branch",
                )));
            }
            for _ in 0..3 {
                let mut sample = zeros.clone();
                for s in sys.index_symbols() {
                    if sample.contains_key(s) {
                        continue;
                    }
                    let v = if Some(*s) == nonzero_var {
                        let v = rng.int_in(1, 9);
                        if rng.next() % 2 == 0 {
                            -v
                        } else {
                            v
                        }
                    } else {
                        rng.int_in(-9, 9)
                    };
                    sample.insert(*s, Scalar::from_int(v));
                }
                sample.insert(sys.m_symbol(), Scalar::from_int(rng.int_in(1, 20)));
                let w = witness.substitute(&sample);
                if w.is_zero() {
                    return Err(Error::Certificate(format!(
                        "witness {witness} vanishes at a sample index",
                    )));
                }
                let minors = maximal_minors(sys, &sample).ok_or_else(|| {
                    Error::Certificate("kill leaf without algebraic minors".into())
                })?;
                if minors.iter().all(CoeffFn::is_zero) {
                    return Err(Error::Certificate(
                        "every minor vanishes at a sample index despite the kill witness".into(),
                    ));
                }
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_section_equation, fourier_reduce, MExp, SystemForm};
    use super::*;
    use crate::acs::AcsData;
    use crate::exterior::testdata::{kodaira_thurston, kt_j, nil_n, nil_n_j, torus4, torus4_j};

    fn nil_system(m: MExp, form: SystemForm) -> FourierSystem {
        let manifold = nil_n();
        let acs = AcsData::new(&manifold, nil_n_j()).unwrap();
        let eq = build_section_equation(&manifold, &acs, m).unwrap();
        fourier_reduce(&eq, form).unwrap()
    }

    #[test]
    fn nilmanifold_real_form_kills_in_two_cases() {
        let sys = nil_system(MExp::Symbolic, SystemForm::Real);
        let outcome = strategy_algebraic_forcing(&sys).unwrap();
        assert!(outcome.survivors.is_empty());
        assert_eq!(outcome.kill_leaves(), 2);
        // The split is on c: nonzero killed by the imaginary part of the
        // determinant, zero killed by the constant term m^2.
        match &outcome.tree {
            CaseTree::Branch { var, nonzero, zero } => {
                assert_eq!(var, "c");
                match &**nonzero {
                    CaseTree::Kill { witness, component } => {
                        assert_eq!(witness, "c*m");
                        assert!(component.contains("im part"), "{component}");
                        assert!(component.contains("pi^1"), "{component}");
                    }
                    other => panic!("{other:?}"),
                }
                match &**zero {
                    CaseTree::Kill { witness, .. } => assert_eq!(witness, "m^2"),
                    other => panic!("{other:?}"),
                }
            }
            other => panic!("{other:?}"),
        }
        spot_check_tree(&sys, &outcome.tree).unwrap();
    }

    #[test]
    fn nilmanifold_complex_form_kills_in_one_case() {
        let sys = nil_system(MExp::Symbolic, SystemForm::Complex);
        let outcome = strategy_algebraic_forcing(&sys).unwrap();
        assert!(outcome.survivors.is_empty());
        assert_eq!(outcome.kill_leaves(), 1);
        match &outcome.tree {
            CaseTree::Kill { witness, .. } => assert_eq!(witness, "m"),
            other => panic!("{other:?}"),
        }
        spot_check_tree(&sys, &outcome.tree).unwrap();
    }

    #[test]
    fn nilmanifold_exponent_zero_leaves_the_trivial_character() {
        let sys = nil_system(MExp::Concrete(0), SystemForm::Complex);
        let outcome = strategy_algebraic_forcing(&sys).unwrap();
        assert_eq!(outcome.survivors.len(), 1);
        let leaf = &outcome.survivors[0];
        assert!(leaf.free.is_empty());
        assert_eq!(
            leaf.pinned_zero.iter().map(|s| s.name()).collect::<Vec<_>>(),
            ["a", "b", "c"]
        );
    }

    #[test]
    fn torus_forcing_survives_exactly_at_the_trivial_character() {
        let manifold = torus4();
        let acs = AcsData::new(&manifold, torus4_j()).unwrap();
        let eq = build_section_equation(&manifold, &acs, MExp::Symbolic).unwrap();
        let sys = fourier_reduce(&eq, SystemForm::Complex).unwrap();
        let outcome = strategy_algebraic_forcing(&sys).unwrap();
        assert_eq!(outcome.kill_leaves(), 4);
        assert_eq!(outcome.survivors.len(), 1);
        let leaf = &outcome.survivors[0];
        assert!(leaf.free.is_empty());
        assert_eq!(leaf.pinned_zero.len(), 4);
        spot_check_tree(&sys, &outcome.tree).unwrap();
    }

    #[test]
    fn kodaira_thurston_forcing_leaves_one_free_index() {
        let manifold = kodaira_thurston();
        let acs = AcsData::new(&manifold, kt_j(&Scalar::zero())).unwrap();
        let eq = build_section_equation(&manifold, &acs, MExp::Symbolic).unwrap();
        let sys = fourier_reduce(&eq, SystemForm::Complex).unwrap();
        let outcome = strategy_algebraic_forcing(&sys).unwrap();
        assert_eq!(outcome.survivors.len(), 1);
        let leaf = &outcome.survivors[0];
        assert_eq!(leaf.free.iter().map(|s| s.name()).collect::<Vec<_>>(), ["a"]);
        assert_eq!(
            leaf.pinned_zero.iter().map(|s| s.name()).collect::<Vec<_>>(),
            ["b", "c"]
        );
        spot_check_tree(&sys, &outcome.tree).unwrap();
    }

    #[test]
    fn tampered_witness_fails_the_spot_check() {
        let sys = nil_system(MExp::Symbolic, SystemForm::Real);
        let outcome = strategy_algebraic_forcing(&sys).unwrap();
        let tampered = match outcome.tree {
            CaseTree::Branch { var, zero, .. } => CaseTree::Branch {
                var,
                // Claim the nonzero case is killed by a witness that in
                // fact vanishes for b = 0.
                nonzero: Box::new(CaseTree::Kill {
                    witness: "b*m".into(),
                    component: "forged".into(),
                }),
                zero,
            },
            other => panic!("{other:?}"),
        };
        assert!(spot_check_tree(&sys, &tampered).is_err());
    }
}
