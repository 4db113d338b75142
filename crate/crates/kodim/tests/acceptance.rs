//! End-to-end acceptance checks.  Each test prints exactly one
//! "criterion N: PASS/FAIL - description" line and panics with the detailed
//! reason on failure.

mod support;

use kodim::acs::{gcy_check, AcsData, ConditionVerdict, GcyInput};
use kodim::deformation::{
    builtin_samples, fiber_at, kodaira_thurston_family, pseudoholomorphic_check, scan,
    to_usc_rows, total_space, Sample,
};
use kodim::exterior::bidegree_split;
use kodim::kodaira::{kod_from_reports, usc_table_check, KodairaVerdict};
use kodim::plurigenera::{
    build_section_equation, compute_plurigenus, fourier_reduce, oracle_numeric_kernel,
    verify_certificate, MExp, PlurigenusReport, SystemForm, Verdict, DEFAULT_THRESHOLD,
};
use kodim::scalars::{parse_coeff_fn, Scalar, Symbol};
use kodim::spec_io::builtin;
use proptest::prelude::Strategy;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};
use support::*;

/// The libtest harness captures println! from passing tests, so the
/// per-criterion summary goes to the terminal file descriptor directly.
fn emit(line: &str) {
    use std::os::unix::io::FromRawFd;
    let mut out = std::mem::ManuallyDrop::new(unsafe { std::fs::File::from_raw_fd(1) });
    let _ = out.write_all(format!("{line}\n").as_bytes());
}

fn criterion(n: u32, desc: &str, body: impl FnOnce() -> Result<(), String>) {
    match body() {
        Ok(()) => emit(&format!("criterion {n}: PASS - {desc}")),
        Err(reason) => {
            emit(&format!("criterion {n}: FAIL - {desc}"));
            panic!("criterion {n} failed: {reason}");
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

fn fail(e: kodim::Error) -> String {
    e.to_string()
}

fn within(elapsed: Duration, bound: Duration, what: &str) -> Result<(), String> {
    if elapsed <= bound {
        Ok(())
    } else {
        Err(format!("{what} took {elapsed:.2?}, bound is {bound:.2?}"))
    }
}

#[test]
fn criterion_01_structure_equations_of_the_nilmanifold() {
    criterion(
        1,
        "nilmanifold structure equations have the closed-form (1,1) parts",
        || {
            let (_, acs) = builtin::pair("nilmanifold_N").map_err(fail)?;
            let basis = acs.basis();
            let start = Instant::now();

            let quarter_i = Scalar::i().mul(&Scalar::from_ratio(1, 4));
            let expected_1 = basis
                .phi(0)
                .wedge(&basis.phibar(1))
                .map_err(fail)?
                .scale(&quarter_i.neg())
                .add(
                    &basis
                        .phi(1)
                        .wedge(&basis.phibar(0))
                        .map_err(fail)?
                        .scale(&quarter_i),
                )
                .map_err(fail)?;
            let expected_2 = basis
                .phi(0)
                .wedge(&basis.phibar(0))
                .map_err(fail)?
                .scale(&Scalar::from_ratio(1, 2));

            for (k, expected) in [(0usize, &expected_1), (1, &expected_2)] {
                let dphi = acs.phi_in_frame(k).map_err(fail)?.d().map_err(fail)?;
                let split = bidegree_split(&dphi, basis).map_err(fail)?;
                let part = split
                    .get(&(1, 1))
                    .ok_or_else(|| format!("d(phi^{}) has no (1,1) part", k + 1))?;
                ensure!(
                    part == expected,
                    "(1,1) part of d(phi^{}) is {part}, expected {expected}",
                    k + 1
                );
            }
            within(start.elapsed(), Duration::from_secs(1), "the computation")
        },
    );
}

#[test]
fn criterion_02_defect_form_of_the_nilmanifold() {
    criterion(2, "the nilmanifold defect form is (i/4) phibar^2", || {
        let (_, acs) = builtin::pair("nilmanifold_N").map_err(fail)?;
        let quarter_i = Scalar::i().mul(&Scalar::from_ratio(1, 4));
        let expected = acs.basis().phibar(1).scale(&quarter_i);
        let alpha = acs.alpha();
        ensure!(*alpha == expected, "alpha = {alpha}, expected {expected}");
        Ok(())
    });
}

#[test]
fn criterion_03_fourier_determinant_of_the_nilmanifold() {
    criterion(
        3,
        "the symbolic Fourier determinant and its imaginary part match",
        || {
            let (m, acs) = builtin::pair("nilmanifold_N").map_err(fail)?;
            let eq = build_section_equation(&m, &acs, MExp::Symbolic).map_err(fail)?;
            let sys = fourier_reduce(&eq, SystemForm::Real).map_err(fail)?;
            let det = sys
                .determinant()
                .ok_or("the reduced system has no square algebraic block")?;

            let mut declared: BTreeSet<Symbol> = sys.index_symbols().iter().copied().collect();
            declared.insert(sys.m_symbol());
            if let Some(x) = sys.x_coord() {
                declared.insert(x);
            }
            let parse = |text: &str| parse_coeff_fn(text, &declared).map_err(fail);

            let expected = parse("-4*pi^2*(a + b*x + (1/2)*c*x^2)^2 + (m + 2*i*pi*c)^2")?;
            ensure!(det == expected, "determinant = {det}, expected {expected}");
            let (_, im) = det.real_imag_parts();
            let expected_im = parse("4*pi*m*c")?;
            ensure!(im == expected_im, "imaginary part = {im}, expected {expected_im}");
            Ok(())
        },
    );
}

#[test]
fn criterion_04_symbolic_vanishing_certificate() {
    criterion(
        4,
        "symbolic vanishing gives certified kod = -infinity and re-verifies",
        || {
            let (m, acs) = builtin::pair("nilmanifold_N").map_err(fail)?;
            let start = Instant::now();
            let report = compute_plurigenus(&m, &acs, MExp::Symbolic).map_err(fail)?;
            let certificate = match &report.verdict {
                Verdict::VanishAllM { certificate } => certificate.clone(),
                other => return Err(format!("expected VanishAllM, got {other:?}")),
            };
            match kod_from_reports(std::slice::from_ref(&report)).map_err(fail)? {
                KodairaVerdict::NegInfinity {
                    certified: true, ..
                } => {}
                other => return Err(format!("expected certified -infinity, got {other}")),
            }
            verify_certificate(&m, &acs, &certificate).map_err(fail)?;
            within(start.elapsed(), Duration::from_secs(10), "the computation")
        },
    );
}

#[test]
fn criterion_05_deformation_scan_dichotomy_with_sections() {
    criterion(
        5,
        "scan dichotomy with re-verified sections (m <= 12) at pi-rational samples",
        || {
            let start = Instant::now();
            let spec = kodaira_thurston_family();
            let samples = builtin_samples();
            let table = scan(&spec, &samples, 6).map_err(fail)?;
            ensure!(
                table.skipped.is_empty(),
                "scan skipped samples: {:?}",
                table.skipped
            );

            let mut failures = Vec::new();
            for row in &table.rows {
                if row.pi_rational {
                    match &row.kod {
                        KodairaVerdict::Exact { kappa: 0, .. } => {}
                        other => failures.push(format!(
                            "t = {}: expected kod = 0, got {other}",
                            row.label
                        )),
                    }
                    if !row.kod_certified {
                        failures.push(format!("t = {}: kod = 0 is not certified", row.label));
                    }
                } else {
                    match &row.kod {
                        KodairaVerdict::NegInfinity {
                            certified: true, ..
                        } => {}
                        other => failures.push(format!(
                            "t = {}: expected certified kod = -infinity, got {other}",
                            row.label
                        )),
                    }
                }
            }

            for sample in samples.iter().filter(|s| s.is_pi_rational()) {
                let j = fiber_at(&spec, sample).map_err(fail)?;
                let acs = AcsData::new(&spec.base, j).map_err(fail)?;
                let mut found = false;
                for m_val in 1..=12 {
                    let report =
                        compute_plurigenus(&spec.base, &acs, MExp::Concrete(m_val))
                            .map_err(fail)?;
                    let Verdict::ExactDim { dim, basis } = &report.verdict else {
                        continue;
                    };
                    if *dim == 0 {
                        continue;
                    }
                    ensure!(
                        !basis.is_empty(),
                        "t = {}: m = {m_val} reports dim {dim} with an empty basis",
                        sample.label()
                    );
                    let eq = build_section_equation(&spec.base, &acs, MExp::Concrete(m_val))
                        .map_err(fail)?;
                    for section in basis {
                        let residuals = section.residual(&eq);
                        ensure!(
                            residuals.iter().all(|r| r.is_zero()),
                            "t = {}: section {section} at m = {m_val} leaves a nonzero residual",
                            sample.label()
                        );
                    }
                    found = true;
                    break;
                }
                if !found {
                    failures.push(format!(
                        "t = {}: no pseudoholomorphic section exists for any m <= 12 \
                         (every P_m up to 12 vanished)",
                        sample.label()
                    ));
                }
            }

            within(start.elapsed(), Duration::from_secs(300), "the scan")?;
            ensure!(failures.is_empty(), "{}", failures.join("; "));
            Ok(())
        },
    );
}

#[test]
fn criterion_06_projection_is_pseudoholomorphic() {
    criterion(6, "d(pi) intertwines the fiber and disc structures", || {
        let spec = kodaira_thurston_family();
        let ts = total_space(&spec).map_err(fail)?;
        ensure!(
            pseudoholomorphic_check(&ts.dpi, &ts.j, &ts.disc_j),
            "d(pi) . J != J_disc . d(pi)"
        );
        Ok(())
    });
}

#[test]
fn criterion_07_semicontinuity_of_plurigenera_but_not_kod() {
    criterion(
        7,
        "every P_m row is semicontinuous across the scan, the kod row is not",
        || {
            let spec = kodaira_thurston_family();
            let table = scan(&spec, &builtin_samples(), 6).map_err(fail)?;
            let rows = to_usc_rows(&table);
            let violations = usc_table_check(&rows);
            for v in &violations {
                ensure!(
                    v.quantity == "kod",
                    "{} is flagged non-semicontinuous at t = {} (value {})",
                    v.quantity,
                    v.at,
                    v.value
                );
            }
            ensure!(
                !violations.is_empty(),
                "the kod row was not flagged even though it drops to -infinity \
                 arbitrarily close to pi-rational samples"
            );
            Ok(())
        },
    );
}

#[test]
fn criterion_08_flat_torus_baseline() {
    criterion(
        8,
        "flat torus: P_m = 1 certified for m = 1..8, kod = 0, oracle agrees",
        || {
            let (m, acs) = builtin::pair("torus4").map_err(fail)?;
            let mut reports = Vec::new();
            for m_val in 1..=8 {
                let report = compute_plurigenus(&m, &acs, MExp::Concrete(m_val)).map_err(fail)?;
                match &report.verdict {
                    Verdict::ExactDim { dim: 1, .. } => {}
                    other => {
                        return Err(format!(
                            "m = {m_val}: expected certified dimension 1, got {other:?}"
                        ))
                    }
                }
                reports.push(report);
            }
            match kod_from_reports(&reports).map_err(fail)? {
                KodairaVerdict::Exact { kappa: 0, .. } => {}
                other => return Err(format!("expected kod = 0, got {other}")),
            }
            for m_val in 1..=8 {
                let eq = build_section_equation(&m, &acs, MExp::Concrete(m_val)).map_err(fail)?;
                let oracle = oracle_numeric_kernel(&eq, 8, DEFAULT_THRESHOLD).map_err(fail)?;
                ensure!(
                    oracle.dim == 1,
                    "m = {m_val}: oracle kernel dimension {} != 1",
                    oracle.dim
                );
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_09_oracle_matches_symbolic_dimensions() {
    criterion(
        9,
        "the numeric kernel oracle matches certified dimensions on all builtins",
        || {
            let spec = kodaira_thurston_family();
            let half = Sample {
                re: Scalar::from_ratio(1, 2),
                im: Scalar::zero(),
            };
            let kt_half = AcsData::new(&spec.base, fiber_at(&spec, &half).map_err(fail)?)
                .map_err(fail)?;

            let torus = builtin::pair("torus4").map_err(fail)?;
            let nil = builtin::pair("nilmanifold_N").map_err(fail)?;
            let kt = builtin::pair("kodaira_thurston").map_err(fail)?;
            let cases: Vec<(&str, &AcsData, usize)> = vec![
                ("torus4", &torus.1, 8),
                ("nilmanifold_N", &nil.1, 64),
                ("kodaira_thurston t=0", &kt.1, 2048),
                ("kodaira_thurston t=1/2", &kt_half, 2048),
            ];

            for (label, acs, grid) in cases {
                let manifold = acs.manifold().clone();
                for m_val in 1..=3 {
                    let report =
                        compute_plurigenus(&manifold, &acs, MExp::Concrete(m_val))
                            .map_err(fail)?;
                    let eq = build_section_equation(&manifold, &acs, MExp::Concrete(m_val))
                        .map_err(fail)?;
                    let oracle =
                        oracle_numeric_kernel(&eq, grid, DEFAULT_THRESHOLD).map_err(fail)?;
                    match &report.verdict {
                        Verdict::ExactDim { dim, .. } => ensure!(
                            oracle.dim == *dim,
                            "{label} m = {m_val}: oracle dimension {} != certified {dim}",
                            oracle.dim
                        ),
                        Verdict::VanishAllM { .. } => ensure!(
                            oracle.dim == 0,
                            "{label} m = {m_val}: oracle dimension {} != certified 0",
                            oracle.dim
                        ),
                        Verdict::Bounds { lower, upper, .. } => ensure!(
                            *lower <= oracle.dim
                                && upper.map_or(true, |u| oracle.dim <= u),
                            "{label} m = {m_val}: oracle dimension {} outside [{lower}, {upper:?}]",
                            oracle.dim
                        ),
                    }
                }
            }
            Ok(())
        },
    );
}

#[test]
fn criterion_10_calabi_yau_conditions_on_the_torus() {
    criterion(
        10,
        "torus triple passes all conditions; mutations fail exactly one each",
        || {
            let (_, acs, input) = builtin::torus_gcy().map_err(fail)?;
            let report = gcy_check(&acs, &input).map_err(fail)?;
            ensure!(
                report.all_pass(),
                "standard data: metric {}, normalization {}, parallel {}",
                report.metric,
                report.normalization,
                report.parallel
            );

            let scaled = GcyInput::new(
                &acs,
                input.sigma().clone(),
                input.epsilon().scale(&Scalar::from_int(2)),
            )
            .map_err(fail)?;
            let report = gcy_check(&acs, &scaled).map_err(fail)?;
            ensure!(
                report.metric == ConditionVerdict::Pass
                    && matches!(report.normalization, ConditionVerdict::Fail(_))
                    && report.parallel == ConditionVerdict::Pass,
                "scaled epsilon: metric {}, normalization {}, parallel {}",
                report.metric,
                report.normalization,
                report.parallel
            );

            let flipped = GcyInput::new(
                &acs,
                input.sigma().scale(&Scalar::from_int(-1)),
                input.epsilon().clone(),
            )
            .map_err(fail)?;
            let report = gcy_check(&acs, &flipped).map_err(fail)?;
            ensure!(
                matches!(report.metric, ConditionVerdict::Fail(_))
                    && report.normalization == ConditionVerdict::Pass
                    && report.parallel == ConditionVerdict::Pass,
                "flipped sigma: metric {}, normalization {}, parallel {}",
                report.metric,
                report.normalization,
                report.parallel
            );
            Ok(())
        },
    );
}

#[test]
fn criterion_11_randomized_law_suites() {
    criterion(
        11,
        "d^2 = 0, graded Leibniz, bidegree table, J^2 = -I, conjugation on 128 cases each",
        || {
            fn run<T: std::fmt::Debug>(
                name: &str,
                strategy: impl Strategy<Value = T>,
                check: impl Fn(&T) -> Result<(), String>,
            ) -> Result<(), String> {
                let mut runner = TestRunner::new(Config {
                    cases: 128,
                    ..Config::default()
                });
                runner
                    .run(&strategy, |value| {
                        check(&value).map_err(TestCaseError::fail)
                    })
                    .map_err(|e| format!("{name}: {e}"))
            }

            run("d squares to zero", manifold_and_form(), |(_, form)| {
                law_dd_zero(form)
            })?;
            run("graded Leibniz rule", form_pair(), |(left, right)| {
                law_graded_leibniz(left, right)
            })?;
            run("bidegree shift table", acs_and_form(), |(acs, form)| {
                law_bidegree_shift_table(acs, form)?;
                law_bidegree_sum_is_d(acs, form)
            })?;
            run(
                "J^2 = -I validation",
                (
                    proptest::sample::select(vec![
                        "torus4",
                        "nilmanifold_N",
                        "kodaira_thurston",
                    ]),
                    proptest::collection::vec((0usize..4, 0usize..4, rational()), 1..=3),
                    0usize..4,
                    0usize..4,
                    rational(),
                ),
                |(name, shears, r, c, delta)| {
                    let (manifold, acs) = builtin::pair(name).map_err(fail)?;
                    law_shear_conjugate_accepted(&manifold, acs.j_matrix(), shears)?;
                    let (torus, torus_acs) = builtin::pair("torus4").map_err(fail)?;
                    law_perturbation_rejected(&torus, torus_acs.j_matrix(), *r, *c, delta)
                },
            )?;
            run(
                "conjugation is an involution",
                manifold_and_form(),
                |(_, form)| law_conjugation_involution(form),
            )?;
            Ok(())
        },
    );
}

#[test]
fn criterion_12_growth_estimator_recovers_synthetic_exponents() {
    criterion(
        12,
        "synthetic P_m growing like m^kappa recovers kappa for 0..3 at M = 64",
        || {
            fn report(m: i64, dim: usize) -> PlurigenusReport {
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

            let shapes: [(&str, fn(i64, u32) -> usize); 3] = [
                ("P_m = m^kappa", |m, k| (m as usize).pow(k)),
                ("P_m = 3 m^kappa", |m, k| 3 * (m as usize).pow(k)),
                ("P_m = 0 below m = 8, then m^kappa", |m, k| {
                    if m < 8 {
                        0
                    } else {
                        (m as usize).pow(k)
                    }
                }),
            ];
            for kappa in 0..=3u32 {
                for (shape_name, shape) in &shapes {
                    let reports: Vec<PlurigenusReport> =
                        (1..=64).map(|m| report(m, shape(m, kappa))).collect();
                    match kod_from_reports(&reports).map_err(fail)? {
                        KodairaVerdict::Exact { kappa: got, .. } if got == kappa as i64 => {}
                        other => {
                            return Err(format!(
                                "{shape_name}, kappa = {kappa}: estimator returned {other}"
                            ))
                        }
                    }
                }
            }
            Ok(())
        },
    );
}
