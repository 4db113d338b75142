//! JSON spec files, the built-in example registry, and certificate
//! envelopes.
//!
//! Parsing is strict and total: unknown keys are rejected, and a bad file
//! reports every problem found, not just the first.  Grammar errors carry
//! line and column; semantic errors carry the entry coordinates
//! (`frame_vectors[2][3]`) of the offending field.

use crate::acs::{AcsData, GcyInput};
use crate::deformation::{self, FamilySpec, Sample};
use crate::error::Error;
use crate::exterior::{Backend, BasisKind, Form, LatticeShift, ManifoldData};
use crate::linalg::Matrix;
use crate::plurigenera::{
    build_section_equation, ExpFn, MExp, PlurigenusReport, VanishingCertificate, Verdict,
};
use crate::scalars::{parse_coeff_fn, parse_ratfn, parse_scalar, CoeffFn, RatFn, Scalar, Symbol};
use crate::Result;
use num::{BigRational, Zero};
use serde_json::{json, Map, Value};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

// ---------------------------------------------------------------------------
// JSON plumbing

fn parse_json(text: &str) -> Result<Value> {
    if text.trim().is_empty() {
        return Err(Error::SpecFile(vec!["file is empty".into()]));
    }
    serde_json::from_str(text).map_err(|e| Error::SpecFile(vec![e.to_string()]))
}

fn as_object<'v>(v: &'v Value, what: &str, errs: &mut Vec<String>) -> Option<&'v Map<String, Value>> {
    match v.as_object() {
        Some(o) => Some(o),
        None => {
            errs.push(format!("{what}: expected a JSON object"));
            None
        }
    }
}

fn reject_unknown_keys(o: &Map<String, Value>, allowed: &[&str], what: &str, errs: &mut Vec<String>) {
    for key in o.keys() {
        if !allowed.contains(&key.as_str()) {
            errs.push(format!("{what}: unknown key `{key}`"));
        }
    }
}

fn require<'v>(
    o: &'v Map<String, Value>,
    key: &str,
    what: &str,
    errs: &mut Vec<String>,
) -> Option<&'v Value> {
    match o.get(key) {
        Some(v) => Some(v),
        None => {
            errs.push(format!("{what}: missing required key `{key}`"));
            None
        }
    }
}

fn string_field(v: &Value, what: &str, errs: &mut Vec<String>) -> Option<String> {
    match v.as_str() {
        Some(s) => Some(s.to_string()),
        None => {
            errs.push(format!("{what}: expected a string"));
            None
        }
    }
}

fn array_field<'v>(v: &'v Value, what: &str, errs: &mut Vec<String>) -> Option<&'v Vec<Value>> {
    match v.as_array() {
        Some(a) => Some(a),
        None => {
            errs.push(format!("{what}: expected an array"));
            None
        }
    }
}

fn coeff_field(
    v: &Value,
    declared: &BTreeSet<Symbol>,
    what: &str,
    errs: &mut Vec<String>,
) -> Option<CoeffFn> {
    let s = string_field(v, what, errs)?;
    match parse_coeff_fn(&s, declared) {
        Ok(c) => Some(c),
        Err(e) => {
            errs.push(format!("{what}: {e}"));
            None
        }
    }
}

fn scalar_field(v: &Value, what: &str, errs: &mut Vec<String>) -> Option<Scalar> {
    let s = string_field(v, what, errs)?;
    match parse_scalar(&s) {
        Ok(c) => Some(c),
        Err(e) => {
            errs.push(format!("{what}: {e}"));
            None
        }
    }
}

/// Parses an n-by-n matrix of entries, pushing one error per bad cell.
fn matrix_field(
    v: &Value,
    n: usize,
    declared: &BTreeSet<Symbol>,
    what: &str,
    errs: &mut Vec<String>,
) -> Option<Matrix<CoeffFn>> {
    let rows = array_field(v, what, errs)?;
    if rows.len() != n {
        errs.push(format!("{what}: expected {n} rows, found {}", rows.len()));
        return None;
    }
    let mut out = Vec::with_capacity(n);
    let mut ok = true;
    for (i, row) in rows.iter().enumerate() {
        let Some(cells) = array_field(row, &format!("{what}[{i}]"), errs) else {
            ok = false;
            continue;
        };
        if cells.len() != n {
            errs.push(format!(
                "{what}[{i}]: expected {n} entries, found {}",
                cells.len()
            ));
            ok = false;
            continue;
        }
        let mut parsed = Vec::with_capacity(n);
        for (j, cell) in cells.iter().enumerate() {
            match coeff_field(cell, declared, &format!("{what}[{i}][{j}]"), errs) {
                Some(c) => parsed.push(c),
                None => ok = false,
            }
        }
        out.push(parsed);
    }
    if ok {
        Some(out)
    } else {
        None
    }
}

fn finish<T>(value: Option<T>, errs: Vec<String>) -> Result<T> {
    match (value, errs.is_empty()) {
        (Some(v), true) => Ok(v),
        (_, _) => Err(Error::SpecFile(if errs.is_empty() {
            vec!["file is incomplete".into()]
        } else {
            errs
        })),
    }
}

// ---------------------------------------------------------------------------
// Manifold spec files

const MANIFOLD_KEYS: &[&str] = &[
    "name",
    "dimension",
    "coordinates",
    "periodic",
    "frame_vectors",
    "coframe",
    "lattice_shifts",
    "structure_equations",
];

/// Reads a manifold spec file.  Coordinate data wants `coordinates`,
/// `frame_vectors`, `coframe` and optionally `periodic`, `lattice_shifts`;
/// structure data wants `structure_equations` instead.
pub fn parse_manifold(text: &str) -> Result<Arc<ManifoldData>> {
    let v = parse_json(text)?;
    let mut errs = Vec::new();
    let m = manifold_from_value(&v, &mut errs);
    finish(m, errs)
}

fn manifold_from_value(v: &Value, errs: &mut Vec<String>) -> Option<Arc<ManifoldData>> {
    let o = as_object(v, "manifold", errs)?;
    reject_unknown_keys(o, MANIFOLD_KEYS, "manifold", errs);
    let name = require(o, "name", "manifold", errs)
        .and_then(|v| string_field(v, "name", errs))
        .unwrap_or_default();
    let dim = match require(o, "dimension", "manifold", errs).and_then(Value::as_u64) {
        Some(d) if d >= 2 && d % 2 == 0 => d as usize,
        Some(d) => {
            errs.push(format!("dimension: {d} is not a positive even integer"));
            return None;
        }
        None => {
            errs.push("dimension: expected a positive even integer".into());
            return None;
        }
    };

    let has_structure = o.contains_key("structure_equations");
    let has_coordinate = o.contains_key("coordinates")
        || o.contains_key("frame_vectors")
        || o.contains_key("coframe");
    if has_structure && has_coordinate {
        errs.push("manifold: give either coordinate data or structure_equations, not both".into());
        return None;
    }
    if has_structure {
        return structure_manifold(o, &name, dim, errs);
    }
    if !has_coordinate {
        errs.push("manifold: needs coordinates/frame_vectors/coframe or structure_equations".into());
        return None;
    }
    coordinate_manifold(o, &name, dim, errs)
}

fn coordinate_manifold(
    o: &Map<String, Value>,
    name: &str,
    dim: usize,
    errs: &mut Vec<String>,
) -> Option<Arc<ManifoldData>> {
    let coords_v = require(o, "coordinates", "manifold", errs)?;
    let coord_names = array_field(coords_v, "coordinates", errs)?;
    if coord_names.len() != dim {
        errs.push(format!(
            "coordinates: expected {dim} names, found {}",
            coord_names.len()
        ));
        return None;
    }
    let mut coords = Vec::with_capacity(dim);
    for (k, c) in coord_names.iter().enumerate() {
        let s = string_field(c, &format!("coordinates[{k}]"), errs)?;
        if s.is_empty() || !s.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_') {
            errs.push(format!("coordinates[{k}]: `{s}` is not an identifier"));
            return None;
        }
        let sym = Symbol::new(&s);
        if coords.contains(&sym) {
            errs.push(format!("coordinates[{k}]: `{s}` repeats an earlier name"));
            return None;
        }
        coords.push(sym);
    }
    let declared: BTreeSet<Symbol> = coords.iter().copied().collect();

    let mut periodic: BTreeMap<Symbol, BigRational> = BTreeMap::new();
    if let Some(pv) = o.get("periodic") {
        if let Some(po) = as_object(pv, "periodic", errs) {
            for (key, val) in po {
                let what = format!("periodic.{key}");
                let sym = Symbol::new(key);
                if !declared.contains(&sym) {
                    errs.push(format!("{what}: `{key}` is not a coordinate"));
                    continue;
                }
                let Some(s) = scalar_field(val, &what, errs) else {
                    continue;
                };
                match s.as_rational() {
                    Some(r) if r > BigRational::zero() => {
                        periodic.insert(sym, r);
                    }
                    _ => errs.push(format!("{what}: period must be a positive rational")),
                }
            }
        }
    }

    let frame = require(o, "frame_vectors", "manifold", errs)
        .and_then(|v| matrix_field(v, dim, &declared, "frame_vectors", errs));
    let coframe = require(o, "coframe", "manifold", errs)
        .and_then(|v| matrix_field(v, dim, &declared, "coframe", errs));

    let mut shifts = Vec::new();
    if let Some(sv) = o.get("lattice_shifts") {
        if let Some(list) = array_field(sv, "lattice_shifts", errs) {
            for (k, entry) in list.iter().enumerate() {
                let what = format!("lattice_shifts[{k}]");
                let Some(so) = as_object(entry, &what, errs) else {
                    continue;
                };
                reject_unknown_keys(so, &["name", "map"], &what, errs);
                let sname = require(so, "name", &what, errs)
                    .and_then(|v| string_field(v, &format!("{what}.name"), errs))
                    .unwrap_or_else(|| format!("shift_{k}"));
                let Some(map_v) = require(so, "map", &what, errs) else {
                    continue;
                };
                let Some(cells) = array_field(map_v, &format!("{what}.map"), errs) else {
                    continue;
                };
                if cells.len() != dim {
                    errs.push(format!(
                        "{what}.map: expected {dim} components, found {}",
                        cells.len()
                    ));
                    continue;
                }
                let mut map = Vec::with_capacity(dim);
                for (j, cell) in cells.iter().enumerate() {
                    if let Some(c) =
                        coeff_field(cell, &declared, &format!("{what}.map[{j}]"), errs)
                    {
                        map.push(c);
                    }
                }
                if map.len() == dim {
                    shifts.push(LatticeShift { name: sname, map });
                }
            }
        }
    }

    let (frame, coframe) = (frame?, coframe?);
    if !errs.is_empty() {
        return None;
    }
    match ManifoldData::new_coordinate(name, coords, periodic, frame, coframe, shifts) {
        Ok(m) => Some(m),
        Err(e) => {
            errs.push(e.to_string());
            None
        }
    }
}

fn structure_manifold(
    o: &Map<String, Value>,
    name: &str,
    dim: usize,
    errs: &mut Vec<String>,
) -> Option<Arc<ManifoldData>> {
    for key in ["coordinates", "periodic", "frame_vectors", "coframe", "lattice_shifts"] {
        if o.contains_key(key) {
            errs.push(format!("manifold: `{key}` does not belong with structure_equations"));
        }
    }
    let eqs_v = require(o, "structure_equations", "manifold", errs)?;
    let eqs = array_field(eqs_v, "structure_equations", errs)?;
    if eqs.len() != dim {
        errs.push(format!(
            "structure_equations: expected {dim} entries, found {}",
            eqs.len()
        ));
        return None;
    }
    let mut d_coframe = Vec::with_capacity(dim);
    for (i, eq) in eqs.iter().enumerate() {
        let what = format!("structure_equations[{i}]");
        let Some(terms) = array_field(eq, &what, errs) else {
            continue;
        };
        let mut form: BTreeMap<u32, Scalar> = BTreeMap::new();
        for (k, term) in terms.iter().enumerate() {
            let twhat = format!("{what}[{k}]");
            let Some(to) = as_object(term, &twhat, errs) else {
                continue;
            };
            reject_unknown_keys(to, &["wedge", "coeff"], &twhat, errs);
            let wedge = require(to, "wedge", &twhat, errs)
                .and_then(|v| array_field(v, &format!("{twhat}.wedge"), errs));
            let coeff = require(to, "coeff", &twhat, errs)
                .and_then(|v| scalar_field(v, &format!("{twhat}.coeff"), errs));
            let (Some(wedge), Some(coeff)) = (wedge, coeff) else {
                continue;
            };
            let idx: Vec<u64> = wedge.iter().filter_map(Value::as_u64).collect();
            if idx.len() != 2 || idx[0] < 1 || idx[1] as usize > dim || idx[0] >= idx[1] {
                errs.push(format!(
                    "{twhat}.wedge: expected two increasing indices in 1..={dim}"
                ));
                continue;
            }
            let mask = (1u32 << (idx[0] - 1)) | (1u32 << (idx[1] - 1));
            if form.insert(mask, coeff).is_some() {
                errs.push(format!(
                    "{twhat}.wedge: [{}, {}] repeats an earlier term",
                    idx[0], idx[1]
                ));
            }
        }
        d_coframe.push(form);
    }
    if !errs.is_empty() || d_coframe.len() != dim {
        return None;
    }
    match ManifoldData::new_structure(name, dim, d_coframe) {
        Ok(m) => Some(m),
        Err(e) => {
            errs.push(e.to_string());
            None
        }
    }
}

/// Renders a manifold back to its spec file schema.
pub fn render_manifold(m: &Arc<ManifoldData>) -> Value {
    let mut o = Map::new();
    o.insert("name".into(), json!(m.name()));
    o.insert("dimension".into(), json!(m.dim()));
    match m.backend() {
        Backend::Coordinate { frame, coframe } => {
            let names: Vec<String> = m.coords().iter().map(|c| c.name().to_string()).collect();
            o.insert("coordinates".into(), json!(names));
            let periodic: Map<String, Value> = m
                .periodic()
                .iter()
                .map(|(c, p)| (c.name().to_string(), json!(p.to_string())))
                .collect();
            o.insert("periodic".into(), Value::Object(periodic));
            o.insert("frame_vectors".into(), render_matrix(frame));
            o.insert("coframe".into(), render_matrix(coframe));
            let shifts: Vec<Value> = m
                .shifts()
                .iter()
                .map(|s| {
                    let map: Vec<String> = s.map.iter().map(|c| c.to_string()).collect();
                    json!({"name": s.name, "map": map})
                })
                .collect();
            o.insert("lattice_shifts".into(), json!(shifts));
        }
        Backend::Structure { d_coframe } => {
            let eqs: Vec<Value> = d_coframe
                .iter()
                .map(|form| {
                    let terms: Vec<Value> = form
                        .iter()
                        .map(|(mask, c)| {
                            let idx: Vec<u32> =
                                (0..32).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect();
                            json!({"wedge": idx, "coeff": c.to_string()})
                        })
                        .collect();
                    json!(terms)
                })
                .collect();
            o.insert("structure_equations".into(), json!(eqs));
        }
    }
    Value::Object(o)
}

fn render_matrix(m: &Matrix<CoeffFn>) -> Value {
    let rows: Vec<Vec<String>> = m
        .iter()
        .map(|row| row.iter().map(|c| c.to_string()).collect())
        .collect();
    json!(rows)
}

// ---------------------------------------------------------------------------
// Almost complex structure files

/// Reads a J matrix file (`{"name": ..., "j": [[...]]}`) against a manifold.
pub fn parse_acs(text: &str, manifold: &Arc<ManifoldData>) -> Result<AcsData> {
    let v = parse_json(text)?;
    let mut errs = Vec::new();
    let acs = acs_from_value(&v, manifold, &mut errs);
    finish(acs, errs)
}

fn acs_from_value(
    v: &Value,
    manifold: &Arc<ManifoldData>,
    errs: &mut Vec<String>,
) -> Option<AcsData> {
    let o = as_object(v, "acs", errs)?;
    reject_unknown_keys(o, &["name", "j"], "acs", errs);
    if let Some(nv) = o.get("name") {
        string_field(nv, "name", errs);
    }
    let declared: BTreeSet<Symbol> = manifold.coords().iter().copied().collect();
    let j = require(o, "j", "acs", errs)
        .and_then(|v| matrix_field(v, manifold.dim(), &declared, "j", errs))?;
    if !errs.is_empty() {
        return None;
    }
    match AcsData::new(manifold, j) {
        Ok(acs) => Some(acs),
        Err(e) => {
            errs.push(e.to_string());
            None
        }
    }
}

/// Renders a structure back to its J matrix file schema.
pub fn render_acs(acs: &AcsData) -> Value {
    json!({"j": render_matrix(acs.j_matrix())})
}

// ---------------------------------------------------------------------------
// Family spec files

/// Reads a family spec file.  `base` is a built-in manifold name or an
/// inline manifold object; `j` entries are rational functions of the
/// coordinates and the parameter symbols `ret`, `imt`.
pub fn parse_family(text: &str) -> Result<FamilySpec> {
    let v = parse_json(text)?;
    let mut errs = Vec::new();
    let fam = family_from_value(&v, &mut errs);
    finish(fam, errs)
}

fn family_from_value(v: &Value, errs: &mut Vec<String>) -> Option<FamilySpec> {
    let o = as_object(v, "family", errs)?;
    reject_unknown_keys(o, &["name", "base", "radius", "j"], "family", errs);
    let name = require(o, "name", "family", errs)
        .and_then(|v| string_field(v, "name", errs))
        .unwrap_or_default();
    let base = match require(o, "base", "family", errs)? {
        Value::String(s) => match builtin::manifold(s) {
            Ok(m) => Some(m),
            Err(e) => {
                errs.push(format!("base: {e}"));
                None
            }
        },
        other => manifold_from_value(other, errs),
    };
    let radius = require(o, "radius", "family", errs)
        .and_then(|v| scalar_field(v, "radius", errs));
    let base = base?;

    let mut declared: BTreeSet<Symbol> = base.coords().iter().copied().collect();
    declared.insert(deformation::re_symbol());
    declared.insert(deformation::im_symbol());
    let dim = base.dim();
    let j_v = require(o, "j", "family", errs)?;
    let rows = array_field(j_v, "j", errs)?;
    if rows.len() != dim {
        errs.push(format!("j: expected {dim} rows, found {}", rows.len()));
        return None;
    }
    let mut j: Matrix<RatFn> = Vec::with_capacity(dim);
    for (i, row) in rows.iter().enumerate() {
        let Some(cells) = array_field(row, &format!("j[{i}]"), errs) else {
            continue;
        };
        if cells.len() != dim {
            errs.push(format!("j[{i}]: expected {dim} entries, found {}", cells.len()));
            continue;
        }
        let mut parsed = Vec::with_capacity(dim);
        for (c, cell) in cells.iter().enumerate() {
            let what = format!("j[{i}][{c}]");
            let Some(s) = string_field(cell, &what, errs) else {
                continue;
            };
            match parse_ratfn(&s, &declared) {
                Ok(r) => parsed.push(r),
                Err(e) => errs.push(format!("{what}: {e}")),
            }
        }
        if parsed.len() == dim {
            j.push(parsed);
        }
    }
    let radius = radius?;
    if !errs.is_empty() || j.len() != dim {
        return None;
    }
    let spec = FamilySpec {
        name,
        base,
        j,
        radius,
    };
    match deformation::family_validate(&spec) {
        Ok(()) => Some(spec),
        Err(e) => {
            errs.push(e.to_string());
            None
        }
    }
}

// ---------------------------------------------------------------------------
// Sample files

/// Reads a sample file: `{"samples": [...]}` where each entry is a scalar
/// string (a real parameter value, possibly involving `i`) or an object
/// `{"re": ..., "im": ...}`.
pub fn parse_samples(text: &str) -> Result<Vec<Sample>> {
    let v = parse_json(text)?;
    let mut errs = Vec::new();
    let samples = samples_from_value(&v, &mut errs);
    finish(samples, errs)
}

fn samples_from_value(v: &Value, errs: &mut Vec<String>) -> Option<Vec<Sample>> {
    let o = as_object(v, "samples", errs)?;
    reject_unknown_keys(o, &["samples"], "samples", errs);
    let list = require(o, "samples", "samples", errs)
        .and_then(|v| array_field(v, "samples", errs))?;
    let mut out = Vec::with_capacity(list.len());
    for (k, entry) in list.iter().enumerate() {
        let what = format!("samples[{k}]");
        match entry {
            Value::String(_) => {
                if let Some(s) = scalar_field(entry, &what, errs) {
                    let (re, im) = split_real_imag(&s);
                    out.push(Sample { re, im });
                }
            }
            Value::Object(so) => {
                reject_unknown_keys(so, &["re", "im"], &what, errs);
                let re = require(so, "re", &what, errs)
                    .and_then(|v| real_scalar_field(v, &format!("{what}.re"), errs));
                let im = require(so, "im", &what, errs)
                    .and_then(|v| real_scalar_field(v, &format!("{what}.im"), errs));
                if let (Some(re), Some(im)) = (re, im) {
                    out.push(Sample { re, im });
                }
            }
            _ => errs.push(format!("{what}: expected a string or {{re, im}} object")),
        }
    }
    if errs.is_empty() {
        Some(out)
    } else {
        None
    }
}

fn split_real_imag(s: &Scalar) -> (Scalar, Scalar) {
    let (re, im) = CoeffFn::from(s.clone()).real_imag_parts();
    (
        re.as_constant().unwrap_or_else(Scalar::zero),
        im.as_constant().unwrap_or_else(Scalar::zero),
    )
}

fn real_scalar_field(v: &Value, what: &str, errs: &mut Vec<String>) -> Option<Scalar> {
    let s = scalar_field(v, what, errs)?;
    let (re, im) = split_real_imag(&s);
    if !im.is_zero() {
        errs.push(format!("{what}: expected a real value"));
        return None;
    }
    Some(re)
}

// ---------------------------------------------------------------------------
// Form files

/// Reads a differential form file: `{"basis": "frame"|"coordinate",
/// "terms": [{"factors": [1, 2], "coeff": ...}]}` with strictly increasing
/// 1-based factor indices.
pub fn parse_form(text: &str, manifold: &Arc<ManifoldData>) -> Result<Form> {
    let v = parse_json(text)?;
    let mut errs = Vec::new();
    let form = form_from_value(&v, manifold, &mut errs);
    finish(form, errs)
}

fn form_from_value(
    v: &Value,
    manifold: &Arc<ManifoldData>,
    errs: &mut Vec<String>,
) -> Option<Form> {
    let o = as_object(v, "form", errs)?;
    reject_unknown_keys(o, &["basis", "terms"], "form", errs);
    let kind = match require(o, "basis", "form", errs)
        .and_then(|v| string_field(v, "basis", errs))
        .as_deref()
    {
        Some("frame") => Some(BasisKind::Frame),
        Some("coordinate") => Some(BasisKind::Coord),
        Some(other) => {
            errs.push(format!("basis: `{other}` is not \"frame\" or \"coordinate\""));
            None
        }
        None => None,
    };
    let declared: BTreeSet<Symbol> = manifold.coords().iter().copied().collect();
    let list = require(o, "terms", "form", errs)
        .and_then(|v| array_field(v, "terms", errs))?;
    let dim = manifold.dim();
    let mut terms: Vec<(u32, CoeffFn)> = Vec::with_capacity(list.len());
    for (k, term) in list.iter().enumerate() {
        let what = format!("terms[{k}]");
        let Some(to) = as_object(term, &what, errs) else {
            continue;
        };
        reject_unknown_keys(to, &["factors", "coeff"], &what, errs);
        let factors = require(to, "factors", &what, errs)
            .and_then(|v| array_field(v, &format!("{what}.factors"), errs));
        let coeff = require(to, "coeff", &what, errs)
            .and_then(|v| coeff_field(v, &declared, &format!("{what}.coeff"), errs));
        let (Some(factors), Some(coeff)) = (factors, coeff) else {
            continue;
        };
        let idx: Vec<u64> = factors.iter().filter_map(Value::as_u64).collect();
        let increasing = idx.windows(2).all(|w| w[0] < w[1]);
        if idx.len() != factors.len()
            || idx.is_empty()
            || !increasing
            || idx[0] < 1
            || *idx.last().unwrap() as usize > dim
        {
            errs.push(format!(
                "{what}.factors: expected strictly increasing indices in 1..={dim}"
            ));
            continue;
        }
        let mask = idx.iter().fold(0u32, |m, i| m | (1 << (i - 1)));
        terms.push((mask, coeff));
    }
    if !errs.is_empty() {
        return None;
    }
    match Form::from_terms(manifold, kind?, terms) {
        Ok(f) => Some(f),
        Err(e) => {
            errs.push(e.to_string());
            None
        }
    }
}

// ---------------------------------------------------------------------------
// Certificate envelopes

/// Outcome of re-checking a certificate file.
#[derive(Clone, Debug)]
pub struct VerifySummary {
    pub kind: String,
    pub detail: String,
}

/// Writes the verdict's certificate as a self-contained JSON envelope:
/// the manifold, the structure, and either the all-m vanishing case tree
/// or an explicit section basis.
pub fn emit_certificate(
    manifold: &Arc<ManifoldData>,
    acs: &AcsData,
    report: &PlurigenusReport,
) -> Result<String> {
    let envelope = match &report.verdict {
        Verdict::VanishAllM { certificate } => {
            let cert = serde_json::to_value(certificate)
                .map_err(|e| Error::Internal(format!("certificate serialization: {e}")))?;
            json!({
                "kind": "vanishing",
                "manifold": render_manifold(manifold),
                "acs": render_acs(acs),
                "certificate": cert,
            })
        }
        Verdict::ExactDim { dim, basis } if !basis.is_empty() => {
            let m = match report.m {
                MExp::Concrete(v) => v,
                MExp::Symbolic => {
                    return Err(Error::Unsupported(
                        "a section basis certificate needs a concrete exponent".into(),
                    ))
                }
            };
            let basis_v: Vec<Value> = basis.iter().map(render_expfn).collect();
            json!({
                "kind": "sections",
                "manifold": render_manifold(manifold),
                "acs": render_acs(acs),
                "m": m,
                "dim": dim,
                "basis": basis_v,
            })
        }
        _ => {
            return Err(Error::Unsupported(
                "the verdict carries no emittable certificate (need an all-m vanishing \
                 certificate or a nonempty section basis)"
                    .into(),
            ))
        }
    };
    serde_json::to_string_pretty(&envelope)
        .map_err(|e| Error::Internal(format!("certificate serialization: {e}")))
}

fn render_expfn(f: &ExpFn) -> Value {
    let exponents: Map<String, Value> = f
        .exponents()
        .iter()
        .map(|(c, e)| (c.name().to_string(), json!(e.to_string())))
        .collect();
    json!({"coef": f.coef().to_string(), "exponents": Value::Object(exponents)})
}

/// Re-checks a certificate envelope from scratch: the manifold and
/// structure are re-parsed, and the claim is re-derived (vanishing) or
/// re-verified by substitution (sections).
pub fn verify_certificate_file(text: &str) -> Result<VerifySummary> {
    let v = parse_json(text)?;
    let mut errs = Vec::new();
    let o = as_object(&v, "certificate", &mut errs);
    let Some(o) = o else {
        return Err(Error::SpecFile(errs));
    };
    let kind = require(o, "kind", "certificate", &mut errs)
        .and_then(|v| string_field(v, "kind", &mut errs))
        .unwrap_or_default();
    let manifold = match require(o, "manifold", "certificate", &mut errs) {
        Some(Value::String(s)) => match builtin::manifold(s) {
            Ok(m) => Some(m),
            Err(e) => {
                errs.push(format!("manifold: {e}"));
                None
            }
        },
        Some(other) => manifold_from_value(other, &mut errs),
        None => None,
    };
    let acs = manifold.as_ref().and_then(|m| {
        match require(o, "acs", "certificate", &mut errs) {
            Some(Value::String(s)) if s == "builtin" || s == "standard" => {
                match builtin::acs(m) {
                    Ok(a) => Some(a),
                    Err(e) => {
                        errs.push(format!("acs: {e}"));
                        None
                    }
                }
            }
            Some(other) => acs_from_value(other, m, &mut errs),
            None => None,
        }
    });
    match kind.as_str() {
        "vanishing" => {
            reject_unknown_keys(o, &["kind", "manifold", "acs", "certificate"], "certificate", &mut errs);
            let cert = require(o, "certificate", "certificate", &mut errs).and_then(|v| {
                serde_json::from_value::<VanishingCertificate>(v.clone())
                    .map_err(|e| errs.push(format!("certificate: {e}")))
                    .ok()
            });
            let (Some(manifold), Some(acs), Some(cert)) = (manifold, acs, cert) else {
                return Err(Error::SpecFile(errs));
            };
            if !errs.is_empty() {
                return Err(Error::SpecFile(errs));
            }
            crate::plurigenera::verify_certificate(&manifold, &acs, &cert)?;
            Ok(VerifySummary {
                kind: "vanishing".into(),
                detail: format!(
                    "all-m vanishing re-verified over the {} split on `{}`",
                    cert.form,
                    manifold.name()
                ),
            })
        }
        "sections" => {
            reject_unknown_keys(
                o,
                &["kind", "manifold", "acs", "m", "dim", "basis"],
                "certificate",
                &mut errs,
            );
            let m_exp = match require(o, "m", "certificate", &mut errs).and_then(Value::as_i64) {
                Some(m) if m >= 1 => Some(m),
                _ => {
                    errs.push("m: expected a positive integer".into());
                    None
                }
            };
            let basis_v = require(o, "basis", "certificate", &mut errs)
                .and_then(|v| array_field(v, "basis", &mut errs))
                .cloned();
            let (Some(manifold), Some(acs), Some(m_exp), Some(basis_v)) =
                (manifold, acs, m_exp, basis_v)
            else {
                return Err(Error::SpecFile(errs));
            };
            let basis = sections_from_values(&basis_v, &manifold, &mut errs);
            let Some(basis) = basis else {
                return Err(Error::SpecFile(errs));
            };
            if !errs.is_empty() {
                return Err(Error::SpecFile(errs));
            }
            verify_sections(&manifold, &acs, m_exp, &basis)?;
            Ok(VerifySummary {
                kind: "sections".into(),
                detail: format!(
                    "{} pseudoholomorphic section(s) at m = {m_exp} on `{}` re-verified \
                     by substitution",
                    basis.len(),
                    manifold.name()
                ),
            })
        }
        other => {
            errs.push(format!("kind: `{other}` is not \"vanishing\" or \"sections\""));
            Err(Error::SpecFile(errs))
        }
    }
}

fn sections_from_values(
    list: &[Value],
    manifold: &Arc<ManifoldData>,
    errs: &mut Vec<String>,
) -> Option<Vec<ExpFn>> {
    if list.is_empty() {
        errs.push("basis: a section certificate needs at least one section".into());
        return None;
    }
    let declared: BTreeSet<Symbol> = manifold.coords().iter().copied().collect();
    let mut out = Vec::with_capacity(list.len());
    for (k, entry) in list.iter().enumerate() {
        let what = format!("basis[{k}]");
        let Some(eo) = as_object(entry, &what, errs) else {
            continue;
        };
        reject_unknown_keys(eo, &["coef", "exponents"], &what, errs);
        let coef = require(eo, "coef", &what, errs)
            .and_then(|v| coeff_field(v, &declared, &format!("{what}.coef"), errs));
        let mut exponents = BTreeMap::new();
        if let Some(ev) = require(eo, "exponents", &what, errs) {
            if let Some(exo) = as_object(ev, &format!("{what}.exponents"), errs) {
                for (key, val) in exo {
                    let ewhat = format!("{what}.exponents.{key}");
                    let sym = Symbol::new(key);
                    if !declared.contains(&sym) {
                        errs.push(format!("{ewhat}: `{key}` is not a coordinate"));
                        continue;
                    }
                    if let Some(s) = scalar_field(val, &ewhat, errs) {
                        exponents.insert(sym, s);
                    }
                }
            }
        }
        if let Some(coef) = coef {
            out.push(ExpFn::new(coef, exponents));
        }
    }
    if errs.is_empty() {
        Some(out)
    } else {
        None
    }
}

/// Substitution check: every listed section solves the section system, and
/// the exponential parts are pairwise distinct (so the sections are
/// linearly independent over the polynomial coefficients).
fn verify_sections(
    manifold: &Arc<ManifoldData>,
    acs: &AcsData,
    m: i64,
    basis: &[ExpFn],
) -> Result<()> {
    let eq = build_section_equation(manifold, acs, MExp::Concrete(m))?;
    for (k, section) in basis.iter().enumerate() {
        if section.coef().is_zero() {
            return Err(Error::Certificate(format!("section {k} is zero")));
        }
        for (j, residual) in section.residual(&eq).iter().enumerate() {
            if !residual.is_zero() {
                return Err(Error::Certificate(format!(
                    "section {k} fails equation {}: residual {residual}",
                    j + 1
                )));
            }
        }
        for other in &basis[..k] {
            if other.exponents() == section.exponents() {
                return Err(Error::Certificate(format!(
                    "section {k} repeats an exponential part; independence is not certified"
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Built-in registry

/// Shipped example data, parsed from the spec files embedded in the
/// binary.  Manifolds are cached so repeated lookups share one instance.
pub mod builtin {
    use super::*;
    use std::sync::OnceLock;

    const MANIFOLDS: &[(&str, &str)] = &[
        ("torus4", include_str!("../data/torus4.json")),
        ("nilmanifold_N", include_str!("../data/nilmanifold_N.json")),
        ("kodaira_thurston", include_str!("../data/kodaira_thurston.json")),
        ("nakamura", include_str!("../data/nakamura.json")),
    ];

    const ACS_FILES: &[(&str, &str)] = &[
        ("torus4", include_str!("../data/torus4.acs.json")),
        ("nilmanifold_N", include_str!("../data/nilmanifold_N.acs.json")),
        ("kodaira_thurston", include_str!("../data/kodaira_thurston.acs.json")),
        ("nakamura", include_str!("../data/nakamura.acs.json")),
    ];

    /// Names of the shipped manifolds.
    pub fn names() -> Vec<&'static str> {
        MANIFOLDS.iter().map(|(n, _)| *n).collect()
    }

    fn cache() -> &'static [OnceLock<Arc<ManifoldData>>; 4] {
        static CACHE: [OnceLock<Arc<ManifoldData>>; 4] =
            [OnceLock::new(), OnceLock::new(), OnceLock::new(), OnceLock::new()];
        &CACHE
    }

    /// Looks up a shipped manifold by name.
    pub fn manifold(name: &str) -> Result<Arc<ManifoldData>> {
        let idx = MANIFOLDS
            .iter()
            .position(|(n, _)| *n == name)
            .ok_or_else(|| {
                Error::SpecFile(vec![format!(
                    "`{name}` is not a built-in manifold (shipped: {})",
                    names().join(", ")
                )])
            })?;
        let cell = &cache()[idx];
        if let Some(m) = cell.get() {
            return Ok(m.clone());
        }
        let parsed = parse_manifold(MANIFOLDS[idx].1)
            .map_err(|e| Error::Internal(format!("shipped file for `{name}` is invalid: {e}")))?;
        Ok(cell.get_or_init(|| parsed).clone())
    }

    /// The shipped standard structure for a built-in manifold.
    pub fn acs(manifold: &Arc<ManifoldData>) -> Result<AcsData> {
        let text = ACS_FILES
            .iter()
            .find(|(n, _)| *n == manifold.name())
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                Error::SpecFile(vec![format!(
                    "no built-in structure for manifold `{}`",
                    manifold.name()
                )])
            })?;
        parse_acs(text, manifold).map_err(|e| {
            Error::Internal(format!(
                "shipped structure for `{}` is invalid: {e}",
                manifold.name()
            ))
        })
    }

    /// A shipped manifold together with its standard structure.
    pub fn pair(name: &str) -> Result<(Arc<ManifoldData>, AcsData)> {
        let m = manifold(name)?;
        let a = acs(&m)?;
        Ok((m, a))
    }

    /// The 2-step nilmanifold example with its standard structure.
    pub fn nilmanifold_n() -> Result<(Arc<ManifoldData>, AcsData)> {
        pair("nilmanifold_N")
    }

    /// Looks up a shipped deformation family by name.
    pub fn family(name: &str) -> Result<FamilySpec> {
        if name != "kodaira_thurston" {
            return Err(Error::SpecFile(vec![format!(
                "`{name}` is not a built-in family (shipped: kodaira_thurston)"
            )]));
        }
        parse_family(include_str!("../data/kodaira_thurston.family.json"))
            .map_err(|e| Error::Internal(format!("shipped family file is invalid: {e}")))
    }

    /// The shipped scan samples: rational and pi-rational points mixed.
    pub fn samples() -> Result<Vec<Sample>> {
        parse_samples(include_str!("../data/kodaira_thurston.samples.json"))
            .map_err(|e| Error::Internal(format!("shipped sample file is invalid: {e}")))
    }

    /// The flat torus with the structure, symplectic form, and trivializing
    /// section of its standard generalized Calabi-Yau presentation.
    pub fn torus_gcy() -> Result<(Arc<ManifoldData>, AcsData, GcyInput)> {
        let m = manifold("torus4")?;
        let acs = parse_acs(include_str!("../data/torus4.gcy.acs.json"), &m)
            .map_err(|e| Error::Internal(format!("shipped gcy structure is invalid: {e}")))?;
        let sigma = parse_form(include_str!("../data/torus4.gcy.sigma.json"), &m)
            .map_err(|e| Error::Internal(format!("shipped gcy form is invalid: {e}")))?;
        let epsilon = acs.psi().scale(&Scalar::from_ratio(1, 2));
        let input = GcyInput::new(&acs, sigma, epsilon)?;
        Ok((m, acs, input))
    }
}
