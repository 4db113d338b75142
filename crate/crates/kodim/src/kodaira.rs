//! Kodaira dimension from plurigenus reports, and upper semicontinuity
//! checks over parameter tables.
//!
//! The growth exponent is the largest least-squares slope of log P_m
//! against log m over the tail windows of the nonzero entries.  Taking the
//! maximum over tails gives limsup semantics: early transient zeros or
//! flat stretches cannot drag the exponent down.  An exponent within 0.15
//! of an integer snaps to it; otherwise only an estimate is reported.

use crate::error::Error;
use crate::plurigenera::{MExp, PlurigenusReport, Verdict};
use crate::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Tolerance for snapping the growth exponent to an integer.
pub const SNAP_TOLERANCE: f64 = 0.15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum KodairaVerdict {
    /// Every plurigenus vanishes.  `certified` distinguishes an all-m
    /// certificate from finite evidence.
    NegInfinity { certified: bool, evidence: String },
    /// Integer Kodaira dimension with the reasoning that pinned it.
    Exact { kappa: i64, rationale: String },
    /// Growth exponent that did not snap to an integer.  `caveat` marks
    /// thin or unstable data.
    Estimate {
        exponent: f64,
        m_range: (i64, i64),
        caveat: bool,
    },
}

impl fmt::Display for KodairaVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KodairaVerdict::NegInfinity { certified, .. } => {
                if *certified {
                    write!(f, "kod = -infinity (certified)")
                } else {
                    write!(f, "kod = -infinity (evidence only)")
                }
            }
            KodairaVerdict::Exact { kappa, .. } => write!(f, "kod = {kappa}"),
            KodairaVerdict::Estimate {
                exponent,
                m_range,
                caveat,
            } => {
                write!(
                    f,
                    "kod ~ {exponent:.3} (estimate from m = {}..{}{})",
                    m_range.0,
                    m_range.1,
                    if *caveat { ", weak data" } else { "" }
                )
            }
        }
    }
}

/// Least-squares slope of `pts`; the x values are distinct.
fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn from_symbolic(report: &PlurigenusReport) -> Result<KodairaVerdict> {
    match &report.verdict {
        Verdict::VanishAllM { certificate } => Ok(KodairaVerdict::NegInfinity {
            certified: true,
            evidence: format!(
                "vanishing certificate over the {} split for every m >= 1",
                certificate.form
            ),
        }),
        Verdict::ExactDim { dim: 0, .. } => Ok(KodairaVerdict::NegInfinity {
            certified: true,
            evidence: "P_m = 0 for every m >= 1".into(),
        }),
        Verdict::ExactDim { dim, .. } => Ok(KodairaVerdict::Exact {
            kappa: 0,
            rationale: format!("P_m = {dim} for every m >= 1"),
        }),
        Verdict::Bounds { upper, .. } if !report.families.is_empty() => {
            let described: Vec<String> =
                report.families.iter().map(|f| f.describe()).collect();
            let bound = upper
                .map(|u| format!("bounded by {u}"))
                .unwrap_or_else(|| "bounded along each progression".into());
            Ok(KodairaVerdict::Exact {
                kappa: 0,
                rationale: format!(
                    "P_m is {bound} and nonzero along arithmetic progressions: {}",
                    described.join("; ")
                ),
            })
        }
        Verdict::Bounds { reason, .. } => Err(Error::Unsupported(format!(
            "kod is undetermined from unresolved bounds: {reason}"
        ))),
    }
}

/// Kodaira dimension from a batch of plurigenus reports: either one
/// symbolic report, or exact reports at concrete exponents.
pub fn kod_from_reports(reports: &[PlurigenusReport]) -> Result<KodairaVerdict> {
    if reports.is_empty() {
        return Err(Error::Unsupported(
            "kod needs at least one plurigenus report".into(),
        ));
    }
    let symbolic: Vec<&PlurigenusReport> = reports
        .iter()
        .filter(|r| matches!(r.m, MExp::Symbolic))
        .collect();
    if !symbolic.is_empty() {
        if symbolic.len() < reports.len() {
            return Err(Error::Unsupported(
                "mixing symbolic and concrete plurigenus reports".into(),
            ));
        }
        if symbolic.len() > 1 {
            return Err(Error::Unsupported(
                "more than one symbolic plurigenus report".into(),
            ));
        }
        return from_symbolic(symbolic[0]);
    }

    let mut table: BTreeMap<i64, usize> = BTreeMap::new();
    for r in reports {
        let m = match r.m {
            MExp::Concrete(m) => m,
            MExp::Symbolic => unreachable!("symbolic reports handled above"),
        };
        if m < 1 {
            continue;
        }
        let dim = r.exact_dim().ok_or_else(|| {
            Error::Unsupported(format!(
                "P_{m} is not exactly resolved; growth analysis needs exact dimensions"
            ))
        })?;
        if table.insert(m, dim).is_some() {
            return Err(Error::Unsupported(format!(
                "duplicate plurigenus report at m = {m}"
            )));
        }
    }
    if table.is_empty() {
        return Err(Error::Unsupported(
            "no plurigenus reports at exponents m >= 1".into(),
        ));
    }

    let max_m = *table.keys().last().expect("nonempty");
    if table.values().all(|d| *d == 0) {
        return Ok(KodairaVerdict::NegInfinity {
            certified: false,
            evidence: format!("P_m = 0 for 1 <= m <= {max_m}, no all-m certificate"),
        });
    }

    let pts: Vec<(f64, f64)> = table
        .iter()
        .filter(|(_, d)| **d > 0)
        .map(|(m, d)| ((*m as f64).ln(), (*d as f64).ln()))
        .collect();
    let m_range = (*table.keys().next().expect("nonempty"), max_m);
    if pts.len() < 2 {
        return Ok(KodairaVerdict::Estimate {
            exponent: 0.0,
            m_range,
            caveat: true,
        });
    }
    let tail_slopes: Vec<f64> = (0..pts.len() - 1).map(|i| slope(&pts[i..])).collect();
    let exponent = tail_slopes.iter().copied().fold(f64::MIN, f64::max);
    let spread = exponent - tail_slopes.iter().copied().fold(f64::MAX, f64::min);

    let nearest = exponent.round();
    if (exponent - nearest).abs() <= SNAP_TOLERANCE {
        Ok(KodairaVerdict::Exact {
            kappa: nearest as i64,
            rationale: format!(
                "tail slope {exponent:.3} of log P_m against log m on 1..{max_m}, \
                 within {SNAP_TOLERANCE} of {nearest}"
            ),
        })
    } else {
        Ok(KodairaVerdict::Estimate {
            exponent,
            m_range,
            caveat: pts.len() < 3 || spread > 0.5,
        })
    }
}

/// CSV rows `m,P_m,certified` for concrete reports, ordered by m.
pub fn plurigenus_csv(reports: &[PlurigenusReport]) -> String {
    let mut rows: Vec<(i64, String, &'static str)> = Vec::new();
    for r in reports {
        let MExp::Concrete(m) = r.m else { continue };
        match &r.verdict {
            Verdict::ExactDim { dim, .. } => rows.push((m, dim.to_string(), "yes")),
            Verdict::VanishAllM { .. } => rows.push((m, "0".into(), "yes")),
            Verdict::Bounds { lower, upper, .. } => {
                let shown = match upper {
                    Some(u) => format!("{lower}..{u}"),
                    None => format!(">={lower}"),
                };
                rows.push((m, shown, "no"));
            }
        }
    }
    rows.sort_by_key(|r| r.0);
    let mut out = String::from("m,P_m,certified\n");
    for (m, p, c) in rows {
        out.push_str(&format!("{m},{p},{c}\n"));
    }
    out
}

/// One parameter sample in an upper semicontinuity table.  `pi_rational`
/// tags the two classes that are dense in the family domain; kod `None`
/// encodes negative infinity.
#[derive(Clone, Debug)]
pub struct UscRow {
    pub label: String,
    pub pi_rational: bool,
    pub plurigenera: Vec<(i64, usize)>,
    pub kod: Option<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UscViolation {
    pub quantity: String,
    pub at: String,
    pub value: String,
    pub nearby: String,
}

impl fmt::Display for UscViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {} is {}, below the accumulating value {}",
            self.quantity, self.at, self.value, self.nearby
        )
    }
}

fn fmt_kod(k: &Option<i64>) -> String {
    match k {
        Some(v) => v.to_string(),
        None => "-infinity".into(),
    }
}

/// Smallest value per class among the other rows: each class is dense in
/// the domain and all but finitely many of its members carry the generic
/// value, so the class minimum is a lower envelope for the limit along
/// any in-class sequence.  Violations reported from it are genuine.
fn class_envelope<V: Ord + Copy>(values: &[(bool, V)], skip: usize) -> Option<V> {
    [true, false]
        .iter()
        .filter_map(|class| {
            values
                .iter()
                .enumerate()
                .filter(|(i, (c, _))| *i != skip && c == class)
                .map(|(_, (_, v))| *v)
                .min()
        })
        .max()
}

/// Flags entries that sit below values accumulating at their parameter.
/// Upper semicontinuity requires the entry to dominate every such limit.
pub fn usc_table_check(rows: &[UscRow]) -> Vec<UscViolation> {
    let mut violations = Vec::new();

    let mut exponents: Vec<i64> = rows
        .iter()
        .flat_map(|r| r.plurigenera.iter().map(|(m, _)| *m))
        .collect();
    exponents.sort_unstable();
    exponents.dedup();

    for m in exponents {
        let present: Vec<(usize, bool, usize)> = rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| {
                r.plurigenera
                    .iter()
                    .find(|(mm, _)| *mm == m)
                    .map(|(_, p)| (i, r.pi_rational, *p))
            })
            .collect();
        let tagged: Vec<(bool, usize)> = present.iter().map(|(_, c, p)| (*c, *p)).collect();
        for (k, (i, _, p)) in present.iter().enumerate() {
            if let Some(env) = class_envelope(&tagged, k) {
                if *p < env {
                    violations.push(UscViolation {
                        quantity: format!("P_{m}"),
                        at: rows[*i].label.clone(),
                        value: p.to_string(),
                        nearby: env.to_string(),
                    });
                }
            }
        }
    }

    let tagged: Vec<(bool, Option<i64>)> =
        rows.iter().map(|r| (r.pi_rational, r.kod)).collect();
    for (k, row) in rows.iter().enumerate() {
        if let Some(env) = class_envelope(&tagged, k) {
            if row.kod < env {
                violations.push(UscViolation {
                    quantity: "kod".into(),
                    at: row.label.clone(),
                    value: fmt_kod(&row.kod),
                    nearby: fmt_kod(&env),
                });
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plurigenera::{compute_plurigenus, MExp};

    fn concrete(m: i64, dim: usize) -> PlurigenusReport {
        PlurigenusReport {
            m: MExp::Concrete(m),
            verdict: Verdict::ExactDim {
                dim,
                basis: Vec::new(),
            },
            families: Vec::new(),
            strategy_trace: Vec::new(),
        }
    }

    fn kod_of(table: impl Iterator<Item = (i64, usize)>) -> KodairaVerdict {
        let reports: Vec<PlurigenusReport> = table.map(|(m, d)| concrete(m, d)).collect();
        kod_from_reports(&reports).unwrap()
    }

    #[test]
    fn monomial_growth_is_recovered_exactly() {
        for kappa in 0..=3u32 {
            let verdict = kod_of((1..=64).map(|m| (m, (m as usize).pow(kappa))));
            match verdict {
                KodairaVerdict::Exact { kappa: got, .. } => assert_eq!(got, kappa as i64),
                other => panic!("kappa = {kappa}: {other:?}"),
            }
        }
    }

    #[test]
    fn growth_is_scale_invariant() {
        let plain = kod_of((1..=64).map(|m| (m, (m * m) as usize)));
        let scaled = kod_of((1..=64).map(|m| (m, (7 * m * m) as usize)));
        match (plain, scaled) {
            (
                KodairaVerdict::Exact { kappa: a, .. },
                KodairaVerdict::Exact { kappa: b, .. },
            ) => {
                assert_eq!(a, 2);
                assert_eq!(b, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn linear_plus_one_snaps_to_exponent_one() {
        match kod_of((1..=32).map(|m| (m, (m + 1) as usize))) {
            KodairaVerdict::Exact { kappa, .. } => assert_eq!(kappa, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn transient_zeros_do_not_drag_the_exponent() {
        // P_m = 0 for m < 8, then m^2: limsup semantics keep kappa = 2.
        match kod_of((1..=64).map(|m| (m, if m < 8 { 0 } else { (m * m) as usize }))) {
            KodairaVerdict::Exact { kappa, .. } => assert_eq!(kappa, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fractional_growth_stays_an_estimate() {
        // P_m ~ m^(3/2) sits outside the snap tolerance of 1 and 2.
        match kod_of((1..=64).map(|m| (m, ((m as f64).powf(1.5).round()) as usize))) {
            KodairaVerdict::Estimate { exponent, .. } => {
                assert!((1.3..1.7).contains(&exponent), "{exponent}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_zero_without_certificate_is_flagged_evidence() {
        match kod_of((1..=16).map(|m| (m, 0))) {
            KodairaVerdict::NegInfinity {
                certified,
                evidence,
            } => {
                assert!(!certified);
                assert!(evidence.contains("m <= 16"), "{evidence}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(kod_from_reports(&[]).is_err());
    }

    #[test]
    fn periodic_resonances_give_kodaira_dimension_zero() {
        // A bounded sequence that is nonzero on every fourth exponent.
        match kod_of((1..=32).map(|m| (m, usize::from(m % 4 == 0)))) {
            KodairaVerdict::Exact { kappa, .. } => assert_eq!(kappa, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn symbolic_vanishing_is_certified_negative_infinity() {
        use crate::acs::AcsData;
        use crate::exterior::testdata::{nil_n, nil_n_j};
        let manifold = nil_n();
        let acs = AcsData::new(&manifold, nil_n_j()).unwrap();
        let report = compute_plurigenus(&manifold, &acs, MExp::Symbolic).unwrap();
        match kod_from_reports(&[report]).unwrap() {
            KodairaVerdict::NegInfinity {
                certified,
                evidence,
            } => {
                assert!(certified);
                assert!(evidence.contains("certificate"), "{evidence}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn symbolic_resonant_families_give_kodaira_dimension_zero() {
        use crate::acs::AcsData;
        use crate::exterior::testdata::{kodaira_thurston, kt_j};
        use crate::scalars::Scalar;
        let manifold = kodaira_thurston();
        let acs = AcsData::new(&manifold, kt_j(&Scalar::zero())).unwrap();
        let report = compute_plurigenus(&manifold, &acs, MExp::Symbolic).unwrap();
        match kod_from_reports(&[report]).unwrap() {
            KodairaVerdict::Exact { kappa, rationale } => {
                assert_eq!(kappa, 0);
                assert!(rationale.contains("m = 0 (mod 4)"), "{rationale}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_lists_exponents_in_order_with_certification() {
        let reports = vec![concrete(2, 0), concrete(1, 0), concrete(4, 1)];
        let csv = plurigenus_csv(&reports);
        assert_eq!(csv, "m,P_m,certified\n1,0,yes\n2,0,yes\n4,1,yes\n");
    }

    fn usc_row(label: &str, pi_rational: bool, p4: usize, kod: Option<i64>) -> UscRow {
        UscRow {
            label: label.into(),
            pi_rational,
            plurigenera: vec![(1, 0), (4, p4)],
            kod,
        }
    }

    #[test]
    fn isolated_resonances_satisfy_semicontinuity_while_kod_fails_it() {
        let rows = vec![
            usc_row("0", true, 1, Some(0)),
            usc_row("pi/2", true, 0, Some(0)),
            usc_row("-pi/2", true, 0, Some(0)),
            usc_row("3pi/4", true, 0, Some(0)),
            usc_row("-3pi/4", true, 0, Some(0)),
            usc_row("1/2", false, 0, None),
            usc_row("-1/2", false, 0, None),
            usc_row("1", false, 0, None),
            usc_row("-1", false, 0, None),
        ];
        let violations = usc_table_check(&rows);
        assert!(violations.iter().all(|v| v.quantity == "kod"), "{violations:?}");
        let flagged: Vec<&str> = violations.iter().map(|v| v.at.as_str()).collect();
        assert_eq!(flagged, ["1/2", "-1/2", "1", "-1"]);
        assert!(violations[0].value == "-infinity" && violations[0].nearby == "0");
    }

    #[test]
    fn constant_tables_have_no_violations() {
        let rows = vec![
            usc_row("0", true, 1, Some(0)),
            usc_row("1/2", false, 1, Some(0)),
            usc_row("1", false, 1, Some(0)),
        ];
        assert!(usc_table_check(&rows).is_empty());
    }
}
