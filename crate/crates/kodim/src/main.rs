//! Command-line front end: spec files in, reports out.
//!
//! All computation lives in the library; this file only loads inputs,
//! dispatches, and renders.  Output is deterministic: no timestamps, and
//! the version string appears only in `--version`.

use clap::{Args, Parser, Subcommand};
use kodim::acs::{gcy_check, GcyInput};
use kodim::deformation::{plot_data, scan, scan_csv, FamilySpec, Sample};
use kodim::exterior::ManifoldData;
use kodim::kodaira::{kod_from_reports, plurigenus_csv};
use kodim::plurigenera::{
    build_section_equation, compute_plurigenus, oracle_numeric_kernel, MExp, PlurigenusReport,
    Verdict,
};
use kodim::scalars::Scalar;
use kodim::spec_io::{self, builtin};
use kodim::{acs::AcsData, Error, Result};
use serde_json::{json, Value};
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "kodim", version, about = "Exact plurigenera and Kodaira dimension \
of invariant almost complex structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and report on an almost complex structure
    Acs {
        #[command(subcommand)]
        action: AcsAction,
    },
    /// Compute one plurigenus, or all of them symbolically
    Plurigenus(PlurigenusArgs),
    /// Kodaira dimension from plurigenus growth
    Kodaira(KodairaArgs),
    /// Scan a deformation family over exact parameter samples
    Scan(ScanArgs),
    /// Numerical kernel oracle for one section system
    Oracle(OracleArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Manifold spec file, or a built-in name (torus4, nilmanifold_N,
    /// kodaira_thurston, nakamura)
    #[arg(long)]
    manifold: String,
    /// J matrix file, or `builtin`/`standard` for the shipped structure
    #[arg(long)]
    acs: String,
    /// Emit the machine-readable report instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum AcsAction {
    /// Check J^2 = -I and report the structure's shape
    Validate(InputArgs),
    /// Print the complex coframe in the real frame
    Coframe(InputArgs),
    /// Print the connection form of the canonical bundle
    Alpha(InputArgs),
    /// Test integrability (vanishing of the Nijenhuis obstruction)
    Integrable(InputArgs),
    /// Check the generalized Calabi-Yau conditions
    GcyCheck(GcyArgs),
}

#[derive(Args)]
struct GcyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Symplectic form file, or `builtin` for the shipped torus data
    #[arg(long)]
    sigma: String,
    /// Trivializing (n,0)-form file, or `half-psi` for psi/2
    #[arg(long, default_value = "half-psi")]
    epsilon: String,
}

#[derive(Args)]
struct PlurigenusArgs {
    #[arg(long, required_unless_present = "verify")]
    manifold: Option<String>,
    #[arg(long, required_unless_present = "verify")]
    acs: Option<String>,
    /// Concrete exponent m >= 1
    #[arg(long, conflicts_with = "m_symbolic")]
    m: Option<i64>,
    /// Treat the exponent as a symbol and certify all m at once
    #[arg(long)]
    m_symbolic: bool,
    /// Cross-check with the numerical kernel oracle
    #[arg(long, requires = "grid")]
    oracle: bool,
    /// Oracle grid resolution per periodic direction
    #[arg(long)]
    grid: Option<usize>,
    /// Oracle singular value threshold, as a decimal string
    #[arg(long, default_value = "0.125")]
    threshold: String,
    /// Write the verdict's certificate envelope to this path
    #[arg(long)]
    emit: Option<String>,
    /// Re-check a certificate envelope instead of computing
    #[arg(long, conflicts_with_all = ["manifold", "acs", "m", "m_symbolic", "oracle", "grid", "emit"])]
    verify: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct KodairaArgs {
    #[arg(long)]
    manifold: String,
    #[arg(long)]
    acs: String,
    /// Compute P_1..P_M exactly and estimate growth
    #[arg(long, conflicts_with = "symbolic")]
    max_m: Option<i64>,
    /// Certify all exponents at once from the symbolic system
    #[arg(long)]
    symbolic: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ScanArgs {
    /// Family spec file, or `kodaira_thurston` for the shipped family
    #[arg(long)]
    family: String,
    /// Sample file, or `builtin` for the shipped samples
    #[arg(long)]
    samples: String,
    #[arg(long)]
    max_m: i64,
    /// CSV output path
    #[arg(long)]
    out: String,
    /// Also write (t_label, m, P_m) triples for external plotting
    #[arg(long)]
    plot_data: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Exponent m >= 1
    #[arg(long)]
    m: i64,
    /// Grid resolution per periodic direction
    #[arg(long)]
    grid: usize,
    /// Singular value threshold, as a decimal string
    #[arg(long, default_value = "0.125")]
    threshold: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn init_workers() -> Result<()> {
    let Ok(raw) = std::env::var("KODIM_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .map_err(|_| Error::Io(format!("KODIM_WORKERS: `{raw}` is not a worker count")))?;
    if n == 0 {
        return Err(Error::Io("KODIM_WORKERS: must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Internal(format!("worker pool: {e}")))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Acs { action } => run_acs(action),
        Command::Plurigenus(args) => run_plurigenus(args),
        Command::Kodaira(args) => run_kodaira(args),
        Command::Scan(args) => run_scan(args),
        Command::Oracle(args) => run_oracle(args),
    }
}

// ---------------------------------------------------------------------------
// Input loading

fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))
}

fn load_manifold(arg: &str) -> Result<Arc<ManifoldData>> {
    if Path::new(arg).is_file() {
        return spec_io::parse_manifold(&read_file(arg)?);
    }
    builtin::manifold(arg).map_err(|e| match e {
        Error::SpecFile(mut msgs) => {
            msgs.push(format!("`{arg}` is not a readable file either"));
            Error::SpecFile(msgs)
        }
        other => other,
    })
}

fn load_acs(arg: &str, manifold: &Arc<ManifoldData>) -> Result<AcsData> {
    if arg == "builtin" || arg == "standard" {
        return builtin::acs(manifold);
    }
    if Path::new(arg).is_file() {
        return spec_io::parse_acs(&read_file(arg)?, manifold);
    }
    Err(Error::SpecFile(vec![format!(
        "`{arg}` is not a readable file; use `builtin` or `standard` for the shipped structure"
    )]))
}

fn load_inputs(input: &InputArgs) -> Result<(Arc<ManifoldData>, AcsData)> {
    let manifold = load_manifold(&input.manifold)?;
    let acs = load_acs(&input.acs, &manifold)?;
    Ok((manifold, acs))
}

fn load_family(arg: &str) -> Result<FamilySpec> {
    if Path::new(arg).is_file() {
        return spec_io::parse_family(&read_file(arg)?);
    }
    builtin::family(arg).map_err(|e| match e {
        Error::SpecFile(mut msgs) => {
            msgs.push(format!("`{arg}` is not a readable file either"));
            Error::SpecFile(msgs)
        }
        other => other,
    })
}

fn load_samples(arg: &str) -> Result<Vec<Sample>> {
    if arg == "builtin" {
        return builtin::samples();
    }
    if Path::new(arg).is_file() {
        return spec_io::parse_samples(&read_file(arg)?);
    }
    Err(Error::SpecFile(vec![format!(
        "`{arg}` is not a readable file; use `builtin` for the shipped samples"
    )]))
}

fn parse_threshold(raw: &str) -> Result<f64> {
    let t: f64 = raw
        .parse()
        .map_err(|_| Error::SpecFile(vec![format!("threshold: `{raw}` is not a decimal")]))?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::SpecFile(vec![format!(
            "threshold: `{raw}` must be positive and finite"
        )]));
    }
    Ok(t)
}

fn write_file(path: &str, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::Io(format!("{path}: {e}")))
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json rendering"));
}

// ---------------------------------------------------------------------------
// acs

fn run_acs(action: AcsAction) -> Result<()> {
    match action {
        AcsAction::Validate(input) => {
            let (manifold, acs) = load_inputs(&input)?;
            if input.json {
                emit(&json!({
                    "manifold": manifold.name(),
                    "dimension": manifold.dim(),
                    "valid": true,
                    "constant": acs.j_matrix().iter().flatten().all(|c| c.is_constant()),
                }));
            } else {
                println!(
                    "structure on `{}` is valid: J^2 = -I on all {} frame vectors",
                    manifold.name(),
                    manifold.dim()
                );
            }
            Ok(())
        }
        AcsAction::Coframe(input) => {
            let (manifold, acs) = load_inputs(&input)?;
            let mut rows = Vec::new();
            for k in 0..acs.n() {
                rows.push(acs.phi_in_frame(k)?.to_string());
            }
            if input.json {
                emit(&json!({"manifold": manifold.name(), "phi": rows}));
            } else {
                for (k, row) in rows.iter().enumerate() {
                    println!("phi{} = {row}", k + 1);
                }
            }
            Ok(())
        }
        AcsAction::Alpha(input) => {
            let (manifold, acs) = load_inputs(&input)?;
            let coefficients: Vec<String> =
                acs.alpha_coefficients().iter().map(Scalar::to_string).collect();
            if input.json {
                emit(&json!({
                    "manifold": manifold.name(),
                    "alpha": acs.alpha().to_string(),
                    "coefficients": coefficients,
                }));
            } else {
                println!("alpha = {}", acs.alpha());
            }
            Ok(())
        }
        AcsAction::Integrable(input) => {
            let (manifold, acs) = load_inputs(&input)?;
            let report = acs.is_integrable()?;
            if input.json {
                let witness = report.witness.as_ref().map(|w| {
                    json!({
                        "coframe_index": w.coframe_index,
                        "obstruction": w.obstruction.to_string(),
                    })
                });
                emit(&json!({
                    "manifold": manifold.name(),
                    "integrable": report.integrable,
                    "witness": witness,
                }));
            } else {
                println!("{}", report.integrable);
                if let Some(w) = &report.witness {
                    println!("mubar(phi{}) = {}", w.coframe_index, w.obstruction);
                }
            }
            Ok(())
        }
        AcsAction::GcyCheck(args) => run_gcy(args),
    }
}

fn run_gcy(args: GcyArgs) -> Result<()> {
    let (manifold, acs, input) = if args.input.acs == "builtin"
        && args.sigma == "builtin"
        && args.input.manifold == "torus4"
    {
        builtin::torus_gcy()?
    } else {
        let (manifold, acs) = load_inputs(&args.input)?;
        let sigma = if args.sigma == "builtin" {
            return Err(Error::SpecFile(vec![
                "sigma: `builtin` pairs only with --manifold torus4 --acs builtin".into(),
            ]));
        } else {
            spec_io::parse_form(&read_file(&args.sigma)?, &manifold)?
        };
        let epsilon = if args.epsilon == "half-psi" {
            acs.psi().scale(&Scalar::from_ratio(1, 2))
        } else {
            spec_io::parse_form(&read_file(&args.epsilon)?, &manifold)?
        };
        let input = GcyInput::new(&acs, sigma, epsilon)?;
        (manifold, acs, input)
    };
    let report = gcy_check(&acs, &input)?;
    if args.input.json {
        emit(&json!({
            "manifold": manifold.name(),
            "metric": report.metric.to_string(),
            "normalization": report.normalization.to_string(),
            "parallel": report.parallel.to_string(),
            "all_pass": report.all_pass(),
        }));
    } else {
        println!("{report}");
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(Error::Certificate(
            "generalized Calabi-Yau check failed".into(),
        ))
    }
}

// ---------------------------------------------------------------------------
// plurigenus

fn verdict_json(report: &PlurigenusReport) -> Value {
    match &report.verdict {
        Verdict::VanishAllM { certificate } => json!({
            "kind": "vanish_all_m",
            "split": certificate.form,
        }),
        Verdict::ExactDim { dim, basis } => {
            let basis: Vec<String> = basis.iter().map(|b| b.to_string()).collect();
            json!({"kind": "exact", "dim": dim, "basis": basis})
        }
        Verdict::Bounds {
            lower,
            upper,
            reason,
        } => json!({"kind": "bounds", "lower": lower, "upper": upper, "reason": reason}),
    }
}

fn report_json(manifold: &Arc<ManifoldData>, report: &PlurigenusReport) -> Value {
    let families: Vec<Value> = report
        .families
        .iter()
        .map(|f| json!({"modulus": f.modulus, "residue": f.residue, "dim": f.dim}))
        .collect();
    json!({
        "manifold": manifold.name(),
        "m": report.m.to_string(),
        "verdict": verdict_json(report),
        "families": families,
        "trace": report.strategy_trace,
    })
}

fn print_report(report: &PlurigenusReport) {
    match &report.verdict {
        Verdict::VanishAllM { certificate } => println!(
            "P_m = 0 for every m >= 1 (certified over the {} split)",
            certificate.form
        ),
        Verdict::ExactDim { dim, basis } => {
            println!("dim = {dim}");
            for b in basis {
                println!("  section: {b}");
            }
        }
        Verdict::Bounds {
            lower,
            upper,
            reason,
        } => {
            match upper {
                Some(u) => println!("{lower} <= dim <= {u} (unresolved)"),
                None => println!("dim >= {lower} (unresolved)"),
            }
            println!("  reason: {reason}");
        }
    }
    for f in &report.families {
        println!(
            "  sections along m = {} (mod {}): dim {}",
            f.residue, f.modulus, f.dim
        );
    }
    for line in &report.strategy_trace {
        println!("  - {line}");
    }
}

fn run_plurigenus(args: PlurigenusArgs) -> Result<()> {
    if let Some(path) = &args.verify {
        let summary = spec_io::verify_certificate_file(&read_file(path)?)?;
        if args.json {
            emit(&json!({"verified": true, "kind": summary.kind, "detail": summary.detail}));
        } else {
            println!("certificate ok: {}", summary.detail);
        }
        return Ok(());
    }
    let manifold = load_manifold(args.manifold.as_deref().expect("clap enforces"))?;
    let acs = load_acs(args.acs.as_deref().expect("clap enforces"), &manifold)?;
    let m = match (args.m, args.m_symbolic) {
        (Some(m), false) => MExp::Concrete(m),
        (None, true) => MExp::Symbolic,
        (None, false) => {
            return Err(Error::SpecFile(vec![
                "give --m N or --m-symbolic".into(),
            ]))
        }
        (Some(_), true) => unreachable!("clap conflicts_with"),
    };
    let report = compute_plurigenus(&manifold, &acs, m)?;

    let oracle = if args.oracle {
        let grid = args.grid.expect("clap requires");
        let threshold = parse_threshold(&args.threshold)?;
        let eq = build_section_equation(&manifold, &acs, m)?;
        Some(oracle_numeric_kernel(&eq, grid, threshold)?)
    } else {
        None
    };

    if args.json {
        let mut v = report_json(&manifold, &report);
        if let Some(o) = &oracle {
            v["oracle"] = json!({
                "grid": o.grid,
                "dim": o.dim,
                "threshold": o.threshold,
                "dropped_characters": o.dropped_characters,
                "nearest_miss": o.nearest_miss,
            });
        }
        emit(&v);
    } else {
        println!("P_m on `{}` at m = {}", manifold.name(), report.m);
        print_report(&report);
        if let Some(o) = &oracle {
            println!("{o}");
            match report.exact_dim() {
                Some(dim) if dim == o.dim => println!("oracle agrees: dim = {dim}"),
                Some(dim) => println!("oracle DISAGREES: symbolic {dim}, oracle {}", o.dim),
                None => println!("oracle gives dim = {} against unresolved bounds", o.dim),
            }
        }
    }

    if let Some(path) = &args.emit {
        let envelope = spec_io::emit_certificate(&manifold, &acs, &report)?;
        write_file(path, &envelope)?;
        if !args.json {
            println!("certificate written to {path}");
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// kodaira

fn run_kodaira(args: KodairaArgs) -> Result<()> {
    let manifold = load_manifold(&args.manifold)?;
    let acs = load_acs(&args.acs, &manifold)?;
    let reports: Vec<PlurigenusReport> = if args.symbolic {
        vec![compute_plurigenus(&manifold, &acs, MExp::Symbolic)?]
    } else {
        let max_m = args.max_m.ok_or_else(|| {
            Error::SpecFile(vec!["give --max-m M or --symbolic".into()])
        })?;
        if max_m < 1 {
            return Err(Error::SpecFile(vec!["max-m: must be at least 1".into()]));
        }
        (1..=max_m)
            .map(|m| compute_plurigenus(&manifold, &acs, MExp::Concrete(m)))
            .collect::<Result<_>>()?
    };
    let verdict = kod_from_reports(&reports)?;
    let csv = plurigenus_csv(&reports);
    if args.json {
        emit(&json!({
            "manifold": manifold.name(),
            "verdict": verdict.to_string(),
            "detail": verdict,
            "table_csv": csv,
        }));
    } else {
        println!("{verdict}");
        print!("{csv}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scan

fn run_scan(args: ScanArgs) -> Result<()> {
    if args.max_m < 1 {
        return Err(Error::SpecFile(vec!["max-m: must be at least 1".into()]));
    }
    let family = load_family(&args.family)?;
    let samples = load_samples(&args.samples)?;
    let table = scan(&family, &samples, args.max_m)?;
    let csv = scan_csv(&table);
    write_file(&args.out, &csv)?;
    if let Some(path) = &args.plot_data {
        write_file(path, &plot_data(&table))?;
    }
    if args.json {
        let rows: Vec<Value> = table
            .rows
            .iter()
            .map(|r| {
                json!({
                    "t": r.label,
                    "is_pi_rational": r.pi_rational,
                    "kod": r.kod.to_string(),
                    "kod_certified": r.kod_certified,
                })
            })
            .collect();
        emit(&json!({
            "family": family.name,
            "rows": rows,
            "skipped": table.skipped,
            "out": args.out,
        }));
    } else {
        println!(
            "scanned `{}` at {} sample(s), m = 1..{}",
            family.name,
            table.rows.len(),
            args.max_m
        );
        for row in &table.rows {
            println!("  t = {}: {}", row.label, row.kod);
        }
        for notice in &table.skipped {
            println!("  skipped: {notice}");
        }
        println!("table written to {}", args.out);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// oracle

fn run_oracle(args: OracleArgs) -> Result<()> {
    let (manifold, acs) = load_inputs(&args.input)?;
    if args.m < 1 {
        return Err(Error::SpecFile(vec!["m: must be at least 1".into()]));
    }
    let threshold = parse_threshold(&args.threshold)?;
    let eq = build_section_equation(&manifold, &acs, MExp::Concrete(args.m))?;
    let report = oracle_numeric_kernel(&eq, args.grid, threshold)?;
    if args.input.json {
        emit(&json!({
            "manifold": manifold.name(),
            "m": args.m,
            "grid": report.grid,
            "index_lo": report.index_lo,
            "index_hi": report.index_hi,
            "threshold": report.threshold,
            "dim": report.dim,
            "kernel_values": report.kernel_values,
            "nearest_miss": report.nearest_miss,
            "dropped_characters": report.dropped_characters,
            "notes": report.notes,
        }));
    } else {
        println!("{report}");
    }
    Ok(())
}
