//! Resonance enumeration of the characters that survive algebraic forcing.
//!
//! On a survivor family the coefficient function solves the remaining ODE
//! rows, so it is an exponential C exp(lambda x) with lambda = -M/N read
//! off the derivative rows.  The quotient topology quantizes lambda: every
//! lattice shift that steps x by h multiplies the character by a constant
//! phase, so lambda h + phase must land in 2 pi i Z.  Splitting that
//! condition into rational components (pi is transcendental) leaves a
//! linear Diophantine system over the free indices and one integer branch
//! variable per shift.  Solving it exactly yields either an explicit basis,
//! a congruence class of exponents m where sections exist, or a proof that
//! no exponent m >= 1 admits any.

use super::fourier::{FourierSystem, SystemForm};
use super::{MExp, SectionEquation, SurvivorLeaf};
use crate::error::Error;
use crate::Result;
use crate::exterior::ManifoldData;
use crate::scalars::{CoeffFn, Monomial, Scalar, Symbol};
use num::{BigInt, BigRational, Integer, One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// A character times an exponential in the non-periodic coordinate:
/// `coef * exp(sum_l exponents[l] * l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpFn {
    coef: CoeffFn,
    exponents: BTreeMap<Symbol, Scalar>,
}

impl ExpFn {
    pub fn new(coef: CoeffFn, exponents: BTreeMap<Symbol, Scalar>) -> Self {
        let exponents = exponents.into_iter().filter(|(_, e)| !e.is_zero()).collect();
        ExpFn { coef, exponents }
    }

    pub fn constant() -> Self {
        ExpFn {
            coef: CoeffFn::one(),
            exponents: BTreeMap::new(),
        }
    }

    pub fn coef(&self) -> &CoeffFn {
        &self.coef
    }

    pub fn exponents(&self) -> &BTreeMap<Symbol, Scalar> {
        &self.exponents
    }

    pub fn is_constant(&self) -> bool {
        self.coef.is_constant() && self.exponents.is_empty()
    }

    /// Applies the section system, returning the residual coefficient of
    /// each equation (the exponential factor is divided out).
    pub fn residual(&self, eq: &SectionEquation) -> Vec<CoeffFn> {
        let coords = eq.manifold().coords();
        let m_c = eq.m_coeff();
        eq.xbar_coefficients()
            .iter()
            .zip(eq.connection_coefficients())
            .map(|(row, a_j)| {
                let mut acc = CoeffFn::zero();
                for (l, coef) in row.iter().enumerate() {
                    let mut d = self.coef.derivative(coords[l]);
                    if let Some(e) = self.exponents.get(&coords[l]) {
                        d = d.add(&self.coef.scale(e));
                    }
                    acc = acc.add(&coef.mul(&d));
                }
                acc.add(&m_c.mul(&self.coef.scale(a_j)))
            })
            .collect()
    }

    /// Checks invariance under the full lattice: the periodic translations
    /// and every lattice shift must reproduce the function exactly.
    pub fn lattice_check(&self, manifold: &ManifoldData) -> Result<()> {
        let two_pi_i = Scalar::i().mul(&Scalar::pi()).mul(&Scalar::from_int(2));
        let integral = |s: &Scalar| -> bool {
            s.mul(&two_pi_i.inv().expect("2 pi i is nonzero"))
                .as_rational()
                .is_some_and(|q| q.is_integer())
        };
        for (coord, period) in manifold.periodic() {
            if let Some(e) = self.exponents.get(coord) {
                let along = e.mul(&Scalar::from_rational(period.clone()));
                if !integral(&along) {
                    return Err(Error::Internal(format!(
                        "exponential is not {period}-periodic in {}",
                        coord.name()
                    )));
                }
            }
        }
        for shift in manifold.shifts() {
            let bindings: BTreeMap<Symbol, CoeffFn> = manifold
                .coords()
                .iter()
                .copied()
                .zip(shift.map.iter().cloned())
                .collect();
            if self.coef.substitute_fns(&bindings) != self.coef {
                return Err(Error::Internal(format!(
                    "coefficient is not invariant under the shift {}",
                    shift.name
                )));
            }
            let mut defect = CoeffFn::zero();
            for (coord, e) in &self.exponents {
                let idx = manifold.coord_index(*coord).expect("exponent names a coordinate");
                let moved = shift.map[idx].sub(&CoeffFn::symbol(*coord));
                defect = defect.add(&moved.scale(e));
            }
            let constant = defect.as_constant().ok_or_else(|| {
                Error::Internal(format!(
                    "exponent defect under the shift {} is not constant: {defect}",
                    shift.name
                ))
            })?;
            if !integral(&constant) {
                return Err(Error::Internal(format!(
                    "exponential picks up the factor exp({constant}) under the shift {}",
                    shift.name
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ExpFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "{}", self.coef);
        }
        let mut phase = CoeffFn::zero();
        for (coord, e) in &self.exponents {
            phase = phase.add(&CoeffFn::symbol(*coord).scale(e));
        }
        if self.coef.is_one() {
            write!(f, "exp({phase})")
        } else {
            write!(f, "({}) * exp({phase})", self.coef)
        }
    }
}

/// One arithmetic progression of exponents carrying sections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonantFamily {
    pub modulus: i64,
    pub residue: i64,
    pub dim: usize,
}

impl ResonantFamily {
    pub fn describe(&self) -> String {
        format!(
            "dimension {} exactly when m = {} (mod {})",
            self.dim, self.residue, self.modulus
        )
    }

    pub fn contains(&self, m: i64) -> bool {
        m.rem_euclid(self.modulus) == self.residue
    }
}

/// Why a survivor family admits no section for any exponent m >= 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationNote {
    pub leaf: String,
    pub reason: String,
}

/// Outcome of the resonance strategy.
pub enum ResonanceOutcome {
    /// Explicit basis (under a symbolic exponent: independent of m).
    Exact { dim: usize, basis: Vec<ExpFn> },
    /// Symbolic exponent: no m >= 1 admits a section.
    EmptyAllM { quantization: Vec<QuantizationNote> },
    /// Symbolic exponent: sections exist exactly on these progressions.
    Families(Vec<ResonantFamily>),
    /// The enumeration could not be completed exactly.
    Gap { reason: String },
}

impl ResonanceOutcome {
    pub fn describe(&self) -> String {
        match self {
            ResonanceOutcome::Exact { dim, .. } => format!("exact dimension {dim}"),
            ResonanceOutcome::EmptyAllM { .. } => "empty for every m >= 1".into(),
            ResonanceOutcome::Families(f) => f
                .iter()
                .map(ResonantFamily::describe)
                .collect::<Vec<_>>()
                .join("; "),
            ResonanceOutcome::Gap { reason } => format!("gap: {reason}"),
        }
    }
}

pub struct ResonanceResult {
    pub outcome: ResonanceOutcome,
    pub notes: Vec<String>,
}

/// Action of one lattice shift on the characters.
struct ShiftAction {
    name: String,
    /// Step in the non-periodic coordinate.
    h: BigRational,
    /// Index remap: new index l = sum_w remap[l][w] * old index w.
    remap: Vec<Vec<BigRational>>,
    /// Constant phase per unit of each index: exp(sum_w phase[w] * I_w).
    phase: Vec<Scalar>,
}

fn analyze_shifts(sys: &FourierSystem) -> Result<Vec<ShiftAction>> {
    let manifold = sys.manifold();
    let coords = manifold.coords();
    let periodic = sys.periodic_coords();
    let freq = sys.frequencies();
    let mut out = Vec::new();
    for shift in manifold.shifts() {
        let mut linear = vec![vec![BigRational::zero(); coords.len()]; periodic.len()];
        let mut phase = Vec::with_capacity(periodic.len());
        for (w, coord) in periodic.iter().enumerate() {
            let idx = manifold.coord_index(*coord).expect("periodic coordinate");
            let image = &shift.map[idx];
            let mut rest = image.clone();
            for (l, other) in coords.iter().enumerate() {
                let a = image.derivative(*other).as_constant().ok_or_else(|| {
                    Error::Unsupported(format!(
                        "shift {} maps {} to the non-affine image {image}",
                        shift.name,
                        coord.name()
                    ))
                })?;
                let a = a.as_rational().ok_or_else(|| {
                    Error::Unsupported(format!(
                        "shift {} has a non-rational linear part in {}",
                        shift.name,
                        coord.name()
                    ))
                })?;
                rest = rest.sub(&CoeffFn::symbol(*other).scale(&Scalar::from_rational(a.clone())));
                linear[w][l] = a;
            }
            let b = rest.as_constant().ok_or_else(|| {
                Error::Unsupported(format!("shift {} is not affine", shift.name))
            })?;
            phase.push(Scalar::i().mul(&freq[w]).mul(&b));
        }

        // The pulled-back character must not involve the non-periodic
        // coordinate, and its indices must stay on the integer lattice.
        let mut remap = vec![vec![BigRational::zero(); periodic.len()]; periodic.len()];
        for (w, coord) in periodic.iter().enumerate() {
            for (l, other) in coords.iter().enumerate() {
                let a = &linear[w][l];
                if a.is_zero() {
                    continue;
                }
                match periodic.iter().position(|p| p == other) {
                    Some(lp) => {
                        let fw = freq[w].mul(&freq[lp].inv().expect("frequency is nonzero"));
                        let fw = fw.as_rational().expect("frequency ratio is rational");
                        let r = fw * a;
                        if !r.is_integer() {
                            return Err(Error::Unsupported(format!(
                                "shift {} does not preserve the character lattice ({} -> {})",
                                shift.name,
                                coord.name(),
                                other.name()
                            )));
                        }
                        remap[lp][w] = r;
                    }
                    None => {
                        return Err(Error::Unsupported(format!(
                            "shift {} mixes the periodic coordinate {} with {}",
                            shift.name,
                            coord.name(),
                            other.name()
                        )))
                    }
                }
            }
        }

        let h = match sys.x_coord() {
            Some(x) => {
                let idx = manifold.coord_index(x).expect("x is a coordinate");
                let step = shift.map[idx].sub(&CoeffFn::symbol(x));
                let step = step.as_constant().ok_or_else(|| {
                    Error::Unsupported(format!(
                        "shift {} does not translate {} by a constant",
                        shift.name,
                        x.name()
                    ))
                })?;
                step.as_rational().ok_or_else(|| {
                    Error::Unsupported(format!(
                        "shift {} translates {} by a non-rational amount",
                        shift.name,
                        x.name()
                    ))
                })?
            }
            None => BigRational::zero(),
        };

        out.push(ShiftAction {
            name: shift.name.clone(),
            h,
            remap,
            phase,
        });
    }
    Ok(out)
}

/// Whether every character in the leaf family is fixed by the shift.
fn leaf_is_fixed(action: &ShiftAction, sys: &FourierSystem, leaf: &SurvivorLeaf) -> bool {
    for f in &leaf.free {
        let fi = sys
            .index_symbols()
            .iter()
            .position(|s| s == f)
            .expect("free symbol is an index");
        for (l, row) in action.remap.iter().enumerate() {
            let expected = if l == fi {
                BigRational::one()
            } else {
                BigRational::zero()
            };
            if row[fi] != expected {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Unknown {
    Var(Symbol),
    Branch(usize),
}

impl Unknown {
    fn describe(&self) -> String {
        match self {
            Unknown::Var(s) => s.name().to_string(),
            Unknown::Branch(i) => format!("k{}", i + 1),
        }
    }
}

/// One rational component of a quantization equation:
/// `sum coeffs[u] * u + m_coef * m + cst = 0`.
#[derive(Clone, Debug)]
struct RatRow {
    coeffs: BTreeMap<Unknown, BigRational>,
    m_coef: BigRational,
    cst: BigRational,
}

/// A linear combination of unknowns with scalar coefficients, plus an
/// m-linear constant part.
struct ScalarRow {
    coeffs: BTreeMap<Unknown, Scalar>,
    m_coef: Scalar,
    cst: Scalar,
}

impl ScalarRow {
    fn new() -> Self {
        ScalarRow {
            coeffs: BTreeMap::new(),
            m_coef: Scalar::zero(),
            cst: Scalar::zero(),
        }
    }

    fn add_unknown(&mut self, u: Unknown, c: &Scalar) {
        let entry = self.coeffs.entry(u).or_insert_with(Scalar::zero);
        *entry = entry.add(c);
    }

    /// Splits into rational rows, one per (pi-degree, re/im) component,
    /// after clearing pi-polynomial denominators.
    fn components(&self) -> Vec<RatRow> {
        let mut dens = Vec::new();
        let mut scan = |s: &Scalar| {
            if !s.den().is_one() && !dens.contains(s.den()) {
                dens.push(s.den().clone());
            }
        };
        for c in self.coeffs.values() {
            scan(c);
        }
        scan(&self.m_coef);
        scan(&self.cst);
        let mut mult = Scalar::one();
        for d in dens {
            mult = mult.mul(&Scalar::from_pipoly(d));
        }

        let cleared: Vec<(Option<Unknown>, Scalar)> = self
            .coeffs
            .iter()
            .map(|(u, c)| (Some(*u), c.mul(&mult)))
            .chain([(None, self.m_coef.mul(&mult))])
            .collect();
        let cst = self.cst.mul(&mult);
        let max_deg = cleared
            .iter()
            .map(|(_, s)| s.num().degree().unwrap_or(0))
            .chain([cst.num().degree().unwrap_or(0)])
            .max()
            .unwrap_or(0);

        let mut rows = Vec::new();
        for deg in 0..=max_deg {
            for re in [false, true] {
                let pick = |s: &Scalar| -> BigRational {
                    debug_assert!(s.den().is_one());
                    let g = s.num().coeff(deg);
                    if re {
                        g.re
                    } else {
                        g.im
                    }
                };
                let mut row = RatRow {
                    coeffs: BTreeMap::new(),
                    m_coef: BigRational::zero(),
                    cst: pick(&cst),
                };
                for (u, s) in &cleared {
                    let v = pick(s);
                    if v.is_zero() {
                        continue;
                    }
                    match u {
                        Some(u) => {
                            row.coeffs.insert(*u, v);
                        }
                        None => row.m_coef = v,
                    }
                }
                if !row.coeffs.is_empty() || !row.m_coef.is_zero() || !row.cst.is_zero() {
                    rows.push(row);
                }
            }
        }
        rows
    }
}

/// Value of an unknown after solving: `alpha * m + beta`.
#[derive(Clone, Debug)]
struct Affine {
    alpha: BigRational,
    beta: BigRational,
}

enum LeafResolution {
    /// No solution for any m >= 1 (with the reason).
    Empty(String),
    /// Solutions independent of m: integer assignments of the unknowns.
    Static(Vec<BTreeMap<Unknown, BigRational>>),
    /// Solutions exactly on a congruence class of m, one per exponent.
    Progression { modulus: BigInt, residue: BigInt },
    Gap(String),
}

/// Solves the rational linear system over the integers, treating m as a
/// formal parameter when `symbolic` is set.
fn solve_rows(rows: Vec<RatRow>, unknowns: Vec<Unknown>, symbolic: bool) -> LeafResolution {
    let mut assigned: BTreeMap<Unknown, Affine> = BTreeMap::new();
    let mut pending = rows;
    let mut pinned_m: Option<BigRational> = None;

    loop {
        let mut progressed = false;
        let mut next = Vec::new();
        for row in pending {
            // Substitute what is known.
            let mut coeffs = BTreeMap::new();
            let mut m_coef = row.m_coef.clone();
            let mut cst = row.cst.clone();
            for (u, c) in row.coeffs {
                match assigned.get(&u) {
                    Some(a) => {
                        m_coef += &c * &a.alpha;
                        cst += &c * &a.beta;
                    }
                    None => {
                        coeffs.insert(u, c);
                    }
                }
            }
            if let Some(mv) = &pinned_m {
                cst += &m_coef * mv;
                m_coef = BigRational::zero();
            }
            match coeffs.len() {
                0 => {
                    if m_coef.is_zero() {
                        if !cst.is_zero() {
                            return LeafResolution::Empty(
                                "the quantization conditions are inconsistent".into(),
                            );
                        }
                    } else {
                        // m_coef * m + cst = 0 pins m itself.
                        let mv = -&cst / &m_coef;
                        if !symbolic {
                            return LeafResolution::Gap(
                                "an exponent condition appeared for a concrete m".into(),
                            );
                        }
                        if !mv.is_integer() || mv < BigRational::one() {
                            return LeafResolution::Empty(format!(
                                "the quantization condition forces m = {mv}, impossible for \
                                 an exponent m >= 1"
                            ));
                        }
                        if pinned_m.as_ref().is_some_and(|p| p != &mv) {
                            return LeafResolution::Empty(
                                "two quantization conditions pin m to different values".into(),
                            );
                        }
                        pinned_m = Some(mv);
                        progressed = true;
                    }
                }
                1 => {
                    let (u, c) = coeffs.into_iter().next().expect("one unknown");
                    assigned.insert(
                        u,
                        Affine {
                            alpha: -&m_coef / &c,
                            beta: -&cst / &c,
                        },
                    );
                    progressed = true;
                }
                _ => next.push(RatRow {
                    coeffs,
                    m_coef,
                    cst,
                }),
            }
        }
        pending = next;
        if pending.is_empty() {
            break;
        }
        if !progressed {
            return LeafResolution::Gap(
                "the quantization system does not decouple into single-unknown steps".into(),
            );
        }
    }

    for u in &unknowns {
        if !assigned.contains_key(u) {
            return LeafResolution::Gap(format!(
                "the unknown {} is unconstrained by quantization",
                u.describe()
            ));
        }
    }

    if pinned_m.is_some() {
        // A single admissible exponent is not a congruence family; none of
        // the supported geometries produce this.
        return LeafResolution::Gap("sections exist at a single exponent only".into());
    }

    // Combine the integrality requirements.
    let mut congruence: Option<(BigInt, BigInt)> = None;
    for a in assigned.values() {
        if a.alpha.is_zero() {
            if !a.beta.is_integer() {
                return LeafResolution::Empty(format!(
                    "quantization assigns the non-integer value {}",
                    a.beta
                ));
            }
            continue;
        }
        debug_assert!(symbolic, "m-dependence only arises for a symbolic exponent");
        match congruence_for(&a.alpha, &a.beta) {
            Some((modulus, residue)) => {
                congruence = match congruence {
                    None => Some((modulus, residue)),
                    Some((m1, r1)) => match crt(&m1, &r1, &modulus, &residue) {
                        Some(c) => Some(c),
                        None => {
                            return LeafResolution::Empty(
                                "the integrality congruences on m are incompatible".into(),
                            )
                        }
                    },
                };
            }
            None => {
                return LeafResolution::Empty(
                    "no exponent m makes the quantization assignment an integer".into(),
                )
            }
        }
    }

    match congruence {
        Some((modulus, residue)) => LeafResolution::Progression { modulus, residue },
        None => LeafResolution::Static(vec![assigned
            .into_iter()
            .map(|(u, a)| (u, a.beta))
            .collect()]),
    }
}

/// Solutions m of `alpha m + beta in Z` as a congruence class.
fn congruence_for(alpha: &BigRational, beta: &BigRational) -> Option<(BigInt, BigInt)> {
    let q = alpha.denom();
    let s = beta.denom();
    let modulus = q * s;
    let a = (alpha.numer() * s).mod_floor(&modulus);
    let b = (-(beta.numer() * q)).mod_floor(&modulus);
    let g = a.gcd(&modulus);
    if !(&b % &g).is_zero() {
        return None;
    }
    let m_red = &modulus / &g;
    let a_red = &a / &g;
    let b_red = &b / &g;
    let inv = modular_inverse(&a_red, &m_red)?;
    Some((m_red.clone(), (b_red * inv).mod_floor(&m_red)))
}

fn modular_inverse(a: &BigInt, modulus: &BigInt) -> Option<BigInt> {
    if modulus.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.extended_gcd(modulus);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(modulus))
    } else {
        None
    }
}

/// Chinese remainder combination of two congruence classes.
fn crt(m1: &BigInt, r1: &BigInt, m2: &BigInt, r2: &BigInt) -> Option<(BigInt, BigInt)> {
    let g = m1.gcd(m2);
    if !((r2 - r1).mod_floor(&g)).is_zero() {
        return None;
    }
    let lcm = m1 / &g * m2;
    let step = (r2 - r1) / &g;
    let inv = modular_inverse(&(m1 / &g).mod_floor(&(m2 / &g)), &(m2 / &g))?;
    let t = (step * inv).mod_floor(&(m2 / &g));
    Some((lcm.clone(), (r1 + m1 * t).mod_floor(&lcm)))
}

/// Splits a coefficient function linear in the free indices and m into
/// constant, m, and per-variable parts.
struct LinearParts {
    cst: Scalar,
    m_coef: Scalar,
    vars: BTreeMap<Symbol, Scalar>,
}

fn linearize(c: &CoeffFn, m_sym: Symbol) -> Option<LinearParts> {
    let mut out = LinearParts {
        cst: Scalar::zero(),
        m_coef: Scalar::zero(),
        vars: BTreeMap::new(),
    };
    for (mono, s) in c.terms() {
        if mono.is_unit() {
            out.cst = out.cst.add(s);
        } else if *mono == Monomial::var(m_sym) {
            out.m_coef = out.m_coef.add(s);
        } else if mono.degree() == 1 {
            let sym = mono.pairs()[0].0;
            let entry = out.vars.entry(sym).or_insert_with(Scalar::zero);
            *entry = entry.add(s);
        } else {
            return None;
        }
    }
    Some(out)
}

fn leaf_label(leaf: &SurvivorLeaf) -> String {
    let zeros: Vec<&str> = leaf.pinned_zero.iter().map(|s| s.name()).collect();
    let free: Vec<&str> = leaf.free.iter().map(|s| s.name()).collect();
    match (zeros.is_empty(), free.is_empty()) {
        (true, true) => "trivial character".into(),
        (false, true) => format!("{} = 0", zeros.join(" = ")),
        (true, false) => format!("{} free", free.join(", ")),
        (false, false) => format!("{} = 0, {} free", zeros.join(" = "), free.join(", ")),
    }
}

/// Enumerates the sections carried by the surviving character families.
pub fn strategy_resonance(
    sys: &FourierSystem,
    eq: &SectionEquation,
    survivors: &[SurvivorLeaf],
) -> Result<ResonanceResult> {
    if sys.form() != SystemForm::Complex {
        return Err(Error::Unsupported(
            "resonance enumeration expects the complex form of the system".into(),
        ));
    }
    let manifold = sys.manifold();
    let shifts = analyze_shifts(sys)?;
    if sys.x_coord().is_some() && !shifts.iter().any(|s| !s.h.is_zero()) {
        return Err(Error::Unsupported(format!(
            "no lattice shift compactifies the {} direction",
            sys.x_coord().expect("checked").name()
        )));
    }
    let symbolic = matches!(sys.m(), MExp::Symbolic);
    let mut notes = Vec::new();
    let mut empties = Vec::new();
    let mut families = Vec::new();
    let mut basis = Vec::new();

    'leaves: for leaf in survivors {
        let label = leaf_label(leaf);
        for action in &shifts {
            if !leaf_is_fixed(action, sys, leaf) {
                return Ok(ResonanceResult {
                    outcome: ResonanceOutcome::Gap {
                        reason: format!(
                            "the survivor family ({label}) is moved by the shift {}; only an \
                             orbit count would bound the dimension",
                            action.name
                        ),
                    },
                    notes,
                });
            }
        }

        let pinned: BTreeMap<Symbol, Scalar> = leaf
            .pinned_zero
            .iter()
            .map(|s| (*s, Scalar::zero()))
            .collect();

        // Lambda from the derivative rows.
        let mut lambda: Option<CoeffFn> = None;
        let mut extra_rows = Vec::new();
        for row in sys.rows() {
            let n_j = &row.derivative[0];
            if n_j.is_zero() {
                let residue = row.algebraic[0].substitute(&pinned);
                if !residue.is_zero() {
                    // Forcing stalled on a multi-index witness; the family
                    // still satisfies algebraic constraints we cannot split.
                    return Ok(ResonanceResult {
                        outcome: ResonanceOutcome::Gap {
                            reason: format!(
                                "the family ({label}) still satisfies the algebraic \
                                 constraint {residue} = 0"
                            ),
                        },
                        notes,
                    });
                }
                continue;
            }
            let m_j = row.algebraic[0].substitute(&pinned);
            let candidate = m_j.scale(&n_j.inv().expect("derivative coefficient nonzero")).neg();
            if let Some(x) = sys.x_coord() {
                if candidate.contains_symbol(x) {
                    // f' = lambda(x) f with lambda genuinely x-dependent has
                    // no solution compatible with the twisted periodicity.
                    let varying: Vec<String> = candidate
                        .terms()
                        .filter(|(mono, _)| mono.contains(x))
                        .map(|(mono, s)| {
                            let (_, rest) = mono.split_off(x);
                            if rest.is_unit() && !s.is_zero() {
                                String::new()
                            } else {
                                format!("{rest}")
                            }
                        })
                        .collect();
                    if varying.iter().all(String::is_empty) {
                        let reason = format!(
                            "the exponent rate {candidate} depends on x; no lattice-periodic \
                             exponential solves the remaining ODE"
                        );
                        notes.push(format!("resonance ({label}): {reason}"));
                        empties.push(QuantizationNote {
                            leaf: label.clone(),
                            reason,
                        });
                        continue 'leaves;
                    }
                    return Ok(ResonanceResult {
                        outcome: ResonanceOutcome::Gap {
                            reason: format!(
                                "the exponent rate depends on x only for special index values \
                                 in the family ({label})"
                            ),
                        },
                        notes,
                    });
                }
            }
            match &lambda {
                None => lambda = Some(candidate),
                Some(l) => {
                    let diff = l.sub(&candidate);
                    if !diff.is_zero() {
                        // Consistency between two derivative rows becomes an
                        // extra linear condition on the indices.
                        extra_rows.push(diff);
                    }
                }
            }
        }

        if sys.x_coord().is_some() && lambda.is_none() {
            return Ok(ResonanceResult {
                outcome: ResonanceOutcome::Gap {
                    reason: format!(
                        "no derivative row constrains the x-dependence of the family ({label})"
                    ),
                },
                notes,
            });
        }

        // Assemble the quantization system.
        let two_pi_i = Scalar::i().mul(&Scalar::pi()).mul(&Scalar::from_int(2));
        let mut unknowns: Vec<Unknown> = leaf.free.iter().map(|s| Unknown::Var(*s)).collect();
        let mut rat_rows = Vec::new();
        let lam_parts = match &lambda {
            Some(l) => Some(linearize(l, sys.m_symbol()).ok_or_else(|| {
                Error::Internal(format!("exponent rate {l} is not linear in the indices"))
            })?),
            None => None,
        };
        for diff in &extra_rows {
            let parts = linearize(diff, sys.m_symbol()).ok_or_else(|| {
                Error::Internal(format!("consistency row {diff} is not linear"))
            })?;
            let mut row = ScalarRow::new();
            row.cst = parts.cst;
            row.m_coef = parts.m_coef;
            for (v, c) in parts.vars {
                row.add_unknown(Unknown::Var(v), &c);
            }
            rat_rows.extend(row.components());
        }
        for (s_idx, action) in shifts.iter().enumerate() {
            let h = Scalar::from_rational(action.h.clone());
            let mut row = ScalarRow::new();
            if let Some(parts) = &lam_parts {
                row.cst = parts.cst.mul(&h);
                row.m_coef = parts.m_coef.mul(&h);
                for (v, c) in &parts.vars {
                    row.add_unknown(Unknown::Var(*v), &c.mul(&h));
                }
            }
            for (w, sym) in sys.index_symbols().iter().enumerate() {
                if leaf.free.contains(sym) && !action.phase[w].is_zero() {
                    row.add_unknown(Unknown::Var(*sym), &action.phase[w]);
                }
            }
            row.add_unknown(Unknown::Branch(s_idx), &two_pi_i.neg());
            unknowns.push(Unknown::Branch(s_idx));
            rat_rows.extend(row.components());
        }

        match solve_rows(rat_rows, unknowns, symbolic) {
            LeafResolution::Empty(reason) => {
                notes.push(format!("resonance ({label}): {reason}"));
                empties.push(QuantizationNote {
                    leaf: label.clone(),
                    reason,
                });
            }
            LeafResolution::Gap(reason) => {
                return Ok(ResonanceResult {
                    outcome: ResonanceOutcome::Gap {
                        reason: format!("family ({label}): {reason}"),
                    },
                    notes,
                })
            }
            LeafResolution::Progression { modulus, residue } => {
                let as_i64 = |b: &BigInt| -> Result<i64> {
                    i64::try_from(b.clone()).map_err(|_| {
                        Error::Internal("resonance modulus does not fit in 64 bits".into())
                    })
                };
                let fam = ResonantFamily {
                    modulus: as_i64(&modulus)?,
                    residue: as_i64(&residue)?,
                    dim: 1,
                };
                notes.push(format!("resonance ({label}): {}", fam.describe()));
                families.push(fam);
            }
            LeafResolution::Static(solutions) => {
                for sol in solutions {
                    let lam_value = lambda
                        .as_ref()
                        .map(|l| {
                            let bindings: BTreeMap<Symbol, Scalar> = sol
                                .iter()
                                .filter_map(|(u, v)| match u {
                                    Unknown::Var(s) => Some((
                                        *s,
                                        Scalar::from_rational(v.clone()),
                                    )),
                                    Unknown::Branch(_) => None,
                                })
                                .collect();
                            l.substitute(&bindings)
                                .as_constant()
                                .ok_or_else(|| {
                                    Error::Internal(
                                        "exponent rate did not reduce to a constant".into(),
                                    )
                                })
                        })
                        .transpose()?;
                    let mut exponents = BTreeMap::new();
                    if let (Some(x), Some(l)) = (sys.x_coord(), lam_value) {
                        exponents.insert(x, l);
                    }
                    for (w, sym) in sys.index_symbols().iter().enumerate() {
                        let value = if leaf.pinned_zero.contains(sym) {
                            BigRational::zero()
                        } else {
                            sol.iter()
                                .find_map(|(u, v)| match u {
                                    Unknown::Var(s) if s == sym => Some(v.clone()),
                                    _ => None,
                                })
                                .unwrap_or_else(BigRational::zero)
                        };
                        let e = Scalar::i()
                            .mul(&sys.frequencies()[w])
                            .mul(&Scalar::from_rational(value));
                        exponents.insert(sys.periodic_coords()[w], e);
                    }
                    let f = ExpFn::new(CoeffFn::one(), exponents);
                    for (j, r) in f.residual(eq).iter().enumerate() {
                        if !r.is_zero() {
                            return Err(Error::Internal(format!(
                                "candidate section {f} fails equation {}: residual {r}",
                                j + 1
                            )));
                        }
                    }
                    f.lattice_check(manifold)?;
                    notes.push(format!("resonance ({label}): section {f}"));
                    basis.push(f);
                }
            }
        }
    }

    let outcome = if !families.is_empty() {
        if basis.is_empty() {
            ResonanceOutcome::Families(families)
        } else {
            ResonanceOutcome::Gap {
                reason: "both m-independent sections and resonant families appear; the \
                         combined count is not a single congruence"
                    .into(),
            }
        }
    } else if !basis.is_empty() || !symbolic {
        ResonanceOutcome::Exact {
            dim: basis.len(),
            basis,
        }
    } else {
        ResonanceOutcome::EmptyAllM {
            quantization: empties,
        }
    };
    Ok(ResonanceResult { outcome, notes })
}
