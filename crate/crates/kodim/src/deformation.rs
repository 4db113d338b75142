//! Families of almost complex structures over a complex disc, their total
//! space, and parameter scans of plurigenera and Kodaira dimension.
//!
//! A family is a matrix J(t) over the rational functions in the two real
//! symbols `ret`, `imt` (real and imaginary part of the parameter), valid
//! on |t| < radius.  All parameter values are exact scalars, so membership
//! in pi * Q is decidable and scan rows can be labeled exactly.

use crate::acs::AcsData;
use crate::error::Error;
use crate::exterior::ManifoldData;
use crate::kodaira::{kod_from_reports, KodairaVerdict, UscRow};
use crate::linalg::{mat_identity, mat_mul, mat_shape, Matrix};
use crate::plurigenera::{compute_plurigenus, MExp, PlurigenusReport, Verdict};
use crate::scalars::sign::scalar_sign;
use crate::scalars::{parse_ratfn, CoeffFn, RatFn, Scalar, Symbol};
use crate::Result;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Symbol for the real part of the parameter.
pub fn re_symbol() -> Symbol {
    Symbol::new("ret")
}

/// Symbol for the imaginary part of the parameter.
pub fn im_symbol() -> Symbol {
    Symbol::new("imt")
}

/// A family of almost complex structures on `base` parameterized by the
/// open disc |t| < radius.
#[derive(Clone, Debug)]
pub struct FamilySpec {
    pub name: String,
    pub base: Arc<ManifoldData>,
    pub j: Matrix<RatFn>,
    pub radius: Scalar,
}

/// One exact parameter value t = re + i im.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub re: Scalar,
    pub im: Scalar,
}

impl Sample {
    pub fn real(re: Scalar) -> Self {
        Sample {
            re,
            im: Scalar::zero(),
        }
    }

    /// Exact printable form of the parameter.
    pub fn label(&self) -> String {
        if self.im.is_zero() {
            format!("{}", self.re)
        } else if self.re.is_zero() {
            format!("i*({})", self.im)
        } else {
            format!("{} + i*({})", self.re, self.im)
        }
    }

    /// Whether t lies in pi * Q.  Exact: t must be real and t / pi must
    /// reduce to a rational.
    pub fn is_pi_rational(&self) -> bool {
        self.im.is_zero()
            && self
                .re
                .mul(&Scalar::pi().inv().expect("pi != 0"))
                .as_rational()
                .is_some()
    }

    /// Whether |t| < radius, decided exactly on |t|^2.
    pub fn in_disc(&self, radius: &Scalar) -> Result<bool> {
        let r2 = radius.mul(radius);
        let n2 = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        Ok(scalar_sign(&r2.sub(&n2))? == Ordering::Greater)
    }

    fn bindings(&self) -> BTreeMap<Symbol, Scalar> {
        BTreeMap::from([(re_symbol(), self.re.clone()), (im_symbol(), self.im.clone())])
    }
}

impl fmt::Display for Sample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

fn family_shape(spec: &FamilySpec) -> Result<usize> {
    let dim = spec.base.dim();
    let (rows, cols) = mat_shape(&spec.j);
    if rows != dim || cols != dim {
        return Err(Error::Family(format!(
            "J(t) is {rows}x{cols} but the base manifold has dimension {dim}"
        )));
    }
    Ok(dim)
}

/// Deterministic probe values in the closed square of side radius,
/// filtered to the open disc later.
fn probe_values(radius: &Scalar) -> Vec<Scalar> {
    let mut out = Vec::new();
    for num in -3i64..=3 {
        out.push(radius.mul(&Scalar::from_ratio(num, 4)));
    }
    out
}

/// Validates a family: entry symbols, the identity J(t)^2 = -I as
/// rational functions, and denominator health on an exact probe grid in
/// the disc.  Degeneracies between probes surface when a scan hits them.
pub fn family_validate(spec: &FamilySpec) -> Result<()> {
    let dim = family_shape(spec)?;
    let allowed: BTreeSet<Symbol> = [re_symbol(), im_symbol()].into();
    for (r, row) in spec.j.iter().enumerate() {
        for (c, entry) in row.iter().enumerate() {
            for part in [entry.num(), entry.den()] {
                for s in part.symbols() {
                    if !allowed.contains(&s) {
                        return Err(Error::Family(format!(
                            "entry ({}, {}) depends on `{}`; only ret and imt may appear",
                            r + 1,
                            c + 1,
                            s.name()
                        )));
                    }
                }
            }
        }
    }

    let square = mat_mul(&spec.j, &spec.j);
    let identity: Matrix<RatFn> = mat_identity(dim);
    for r in 0..dim {
        for c in 0..dim {
            let entry = square[r][c].add(&identity[r][c]);
            if !entry.is_zero() {
                return Err(Error::Family(format!(
                    "J(t)^2 != -I: entry ({}, {}) of J^2 + I is {entry}",
                    r + 1,
                    c + 1
                )));
            }
        }
    }

    for re in probe_values(&spec.radius) {
        for im in probe_values(&spec.radius) {
            let sample = Sample {
                re: re.clone(),
                im,
            };
            if !sample.in_disc(&spec.radius)? {
                continue;
            }
            fiber_at(spec, &sample)?;
        }
    }
    Ok(())
}

/// J(t) evaluated at an exact parameter value, as a constant matrix.
pub fn fiber_at(spec: &FamilySpec, sample: &Sample) -> Result<Matrix<CoeffFn>> {
    let bindings = sample.bindings();
    let mut out = Vec::with_capacity(spec.j.len());
    for row in &spec.j {
        let mut out_row = Vec::with_capacity(row.len());
        for entry in row {
            let value = entry.substitute(&bindings).map_err(|_| {
                Error::Family(format!(
                    "denominator {} vanishes at t = {}",
                    entry.den(),
                    sample.label()
                ))
            })?;
            let value = value.as_constant().ok_or_else(|| {
                Error::Internal(format!(
                    "entry {entry} did not reduce to a constant at t = {}",
                    sample.label()
                ))
            })?;
            out_row.push(CoeffFn::from(value));
        }
        out.push(out_row);
    }
    Ok(out)
}

/// The product structure on base x disc: J(t) on the fiber directions,
/// the standard disc structure on the two parameter directions.
#[derive(Clone, Debug)]
pub struct TotalSpace {
    pub j: Matrix<RatFn>,
    /// Differential of the projection to the disc, in the product frame.
    pub dpi: Matrix<RatFn>,
    /// Standard structure on the disc.
    pub disc_j: Matrix<RatFn>,
}

impl TotalSpace {
    /// Restriction of the total structure to the fiber directions.
    pub fn fiber(&self) -> Matrix<RatFn> {
        let dim = self.j.len() - 2;
        self.j[..dim].iter().map(|row| row[..dim].to_vec()).collect()
    }
}

/// Builds the total space structure of a validated family.
pub fn total_space(spec: &FamilySpec) -> Result<TotalSpace> {
    let dim = family_shape(spec)?;
    let zero = RatFn::zero();
    let one = RatFn::one();
    let size = dim + 2;
    let mut j: Matrix<RatFn> = vec![vec![zero.clone(); size]; size];
    for (r, row) in spec.j.iter().enumerate() {
        for (c, entry) in row.iter().enumerate() {
            j[r][c] = entry.clone();
        }
    }
    j[dim][dim + 1] = one.neg();
    j[dim + 1][dim] = one.clone();

    let mut dpi: Matrix<RatFn> = vec![vec![zero.clone(); size]; 2];
    dpi[0][dim] = one.clone();
    dpi[1][dim + 1] = one.clone();

    let disc_j = vec![
        vec![zero.clone(), one.neg()],
        vec![one.clone(), zero.clone()],
    ];
    Ok(TotalSpace { j, dpi, disc_j })
}

/// Whether the projection intertwines the two structures:
/// dpi . J = J_disc . dpi as an identity of rational functions.
pub fn pseudoholomorphic_check(
    dpi: &Matrix<RatFn>,
    j: &Matrix<RatFn>,
    disc_j: &Matrix<RatFn>,
) -> bool {
    let lhs = mat_mul(dpi, j);
    let rhs = mat_mul(disc_j, dpi);
    lhs == rhs
}

/// One computed scan row: plurigenera with certification flags, and the
/// Kodaira verdict.
#[derive(Clone, Debug)]
pub struct ScanRow {
    pub label: String,
    pub pi_rational: bool,
    /// (m, P_m, certified); for an uncertified entry P_m is a lower bound.
    pub plurigenera: Vec<(i64, usize, bool)>,
    pub kod: KodairaVerdict,
    pub kod_certified: bool,
}

#[derive(Clone, Debug)]
pub struct ScanTable {
    pub rows: Vec<ScanRow>,
    /// Notices for samples that were not scanned.
    pub skipped: Vec<String>,
    pub max_m: i64,
}

fn scan_row(spec: &FamilySpec, sample: &Sample, max_m: i64) -> Result<ScanRow> {
    let j = fiber_at(spec, sample)?;
    let acs = AcsData::new(&spec.base, j)?;
    let mut reports: Vec<PlurigenusReport> = Vec::with_capacity(max_m as usize);
    let mut plurigenera = Vec::with_capacity(max_m as usize);
    for m in 1..=max_m {
        let report = compute_plurigenus(&spec.base, &acs, MExp::Concrete(m))?;
        let entry = match &report.verdict {
            Verdict::ExactDim { dim, .. } => (m, *dim, true),
            Verdict::VanishAllM { .. } => (m, 0, true),
            Verdict::Bounds { lower, .. } => (m, *lower, false),
        };
        plurigenera.push(entry);
        reports.push(report);
    }

    let (kod, kod_certified) = match compute_plurigenus(&spec.base, &acs, MExp::Symbolic)
        .and_then(|r| kod_from_reports(&[r]))
    {
        Ok(verdict) => {
            let certified = match &verdict {
                KodairaVerdict::NegInfinity { certified, .. } => *certified,
                KodairaVerdict::Exact { .. } => true,
                KodairaVerdict::Estimate { .. } => false,
            };
            (verdict, certified)
        }
        // No symbolic resolution: fall back to the finite table.
        Err(_) => (kod_from_reports(&reports)?, false),
    };

    Ok(ScanRow {
        label: sample.label(),
        pi_rational: sample.is_pi_rational(),
        plurigenera,
        kod,
        kod_certified,
    })
}

/// Scans the family at the given parameter samples.  Samples outside the
/// domain are skipped with a notice.  Rows are computed in parallel and
/// assembled in sample order.
pub fn scan(spec: &FamilySpec, samples: &[Sample], max_m: i64) -> Result<ScanTable> {
    if max_m < 1 {
        return Err(Error::Unsupported("scan needs max_m >= 1".into()));
    }
    family_validate(spec)?;
    let mut kept = Vec::new();
    let mut skipped = Vec::new();
    for sample in samples {
        if sample.in_disc(&spec.radius)? {
            kept.push(sample.clone());
        } else {
            skipped.push(format!(
                "sample t = {} lies outside |t| < {}; skipped",
                sample.label(),
                spec.radius
            ));
        }
    }
    let rows: Vec<ScanRow> = kept
        .par_iter()
        .map(|sample| scan_row(spec, sample, max_m))
        .collect::<Result<_>>()?;
    Ok(ScanTable {
        rows,
        skipped,
        max_m,
    })
}

fn kod_csv(v: &KodairaVerdict) -> String {
    match v {
        KodairaVerdict::NegInfinity { .. } => "-infinity".into(),
        KodairaVerdict::Exact { kappa, .. } => kappa.to_string(),
        KodairaVerdict::Estimate { exponent, .. } => format!("~{exponent:.3}"),
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// CSV rendering: exact parameter, class flag, P_1..P_M each with its
/// certification flag, then the Kodaira verdict.
pub fn scan_csv(table: &ScanTable) -> String {
    let mut out = String::from("t,is_pi_rational");
    for m in 1..=table.max_m {
        out.push_str(&format!(",P_{m},certified_{m}"));
    }
    out.push_str(",kod,kod_certified\n");
    for row in &table.rows {
        out.push_str(&format!("{},{}", row.label, yes_no(row.pi_rational)));
        for (_, p, cert) in &row.plurigenera {
            out.push_str(&format!(",{p},{}", yes_no(*cert)));
        }
        out.push_str(&format!(",{},{}\n", kod_csv(&row.kod), yes_no(row.kod_certified)));
    }
    out
}

/// (t, m, P_m) triples for plotting, one per line.
pub fn plot_data(table: &ScanTable) -> String {
    let mut out = String::from("t,m,P_m\n");
    for row in &table.rows {
        for (m, p, _) in &row.plurigenera {
            out.push_str(&format!("{},{m},{p}\n", row.label));
        }
    }
    out
}

/// Rows for the semicontinuity check.  An estimate enters by its rounded
/// exponent.
pub fn to_usc_rows(table: &ScanTable) -> Vec<UscRow> {
    table
        .rows
        .iter()
        .map(|row| UscRow {
            label: row.label.clone(),
            pi_rational: row.pi_rational,
            plurigenera: row.plurigenera.iter().map(|(m, p, _)| (*m, *p)).collect(),
            kod: match &row.kod {
                KodairaVerdict::NegInfinity { .. } => None,
                KodairaVerdict::Exact { kappa, .. } => Some(*kappa),
                KodairaVerdict::Estimate { exponent, .. } => Some(exponent.round() as i64),
            },
        })
        .collect()
}

/// The deformation of the Kodaira-Thurston structure over |t| < pi.
pub fn kodaira_thurston_family() -> FamilySpec {
    let declared: BTreeSet<Symbol> = [re_symbol(), im_symbol()].into();
    let e = |text: &str| parse_ratfn(text, &declared).expect("builtin entry parses");
    let j = vec![
        vec![e("0"), e("-1"), e("0"), e("0")],
        vec![e("1"), e("0"), e("0"), e("0")],
        vec![
            e("0"),
            e("0"),
            e("-imt/(ret + pi)"),
            e("-((ret + pi)^2 + imt^2)/(ret + pi)"),
        ],
        vec![e("0"), e("0"), e("1/(ret + pi)"), e("imt/(ret + pi)")],
    ];
    FamilySpec {
        name: "kodaira_thurston".into(),
        base: crate::exterior::testdata::kodaira_thurston(),
        j,
        radius: Scalar::pi(),
    }
}

/// The standard scan samples: 0, the rational values +-1/2 and +-1, and
/// the pi-rational values +-pi/2 and +-3pi/4.
pub fn builtin_samples() -> Vec<Sample> {
    let pi = Scalar::pi();
    let mut out = vec![Sample::real(Scalar::zero())];
    for (num, den) in [(1i64, 2i64), (-1, 2), (1, 1), (-1, 1)] {
        out.push(Sample::real(Scalar::from_ratio(num, den)));
    }
    for (num, den) in [(1i64, 2i64), (-1, 2), (3, 4), (-3, 4)] {
        out.push(Sample::real(pi.mul(&Scalar::from_ratio(num, den))));
    }
    out
}
