//! Shared random generators and algebraic law checks for the property and
//! acceptance suites.

use kodim::acs::AcsData;
use kodim::exterior::{
    bidegree_split, del, delbar, mu, mubar, BasisKind, Form, ManifoldData,
};
use kodim::linalg::{mat_identity, mat_mul, mat_neg, Matrix};
use kodim::scalars::{CoeffFn, Scalar, Symbol};
use kodim::spec_io::builtin;
use proptest::prelude::*;
use std::sync::Arc;

pub fn manifold_choice() -> impl Strategy<Value = Arc<ManifoldData>> {
    prop::sample::select(vec!["torus4", "nilmanifold_N", "kodaira_thurston"])
        .prop_map(|name| builtin::manifold(name).unwrap())
}

pub fn acs_choice() -> impl Strategy<Value = AcsData> {
    prop::sample::select(vec!["torus4", "nilmanifold_N", "kodaira_thurston"])
        .prop_map(|name| builtin::pair(name).unwrap().1)
}

pub fn rational() -> impl Strategy<Value = Scalar> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| Scalar::from_ratio(p, q))
}

/// (a + b i) pi^e with small rational a, b.
pub fn scalar() -> impl Strategy<Value = Scalar> {
    (rational(), rational(), 0u32..=1).prop_map(|(a, b, e)| {
        let mut s = a.add(&b.mul(&Scalar::i()));
        for _ in 0..e {
            s = s.mul(&Scalar::pi());
        }
        s
    })
}

pub fn monomial(coords: Vec<Symbol>) -> impl Strategy<Value = CoeffFn> {
    (scalar(), prop::collection::vec(0u32..=2, coords.len())).prop_map(move |(c, exps)| {
        let mut f = CoeffFn::constant(c);
        for (sym, e) in coords.iter().zip(exps) {
            for _ in 0..e {
                f = f.mul(&CoeffFn::symbol(*sym));
            }
        }
        f
    })
}

pub fn coeff_fn(coords: Vec<Symbol>) -> impl Strategy<Value = CoeffFn> {
    prop::collection::vec(monomial(coords), 1..=3)
        .prop_map(|terms| terms.iter().fold(CoeffFn::zero(), |acc, t| acc.add(t)))
}

/// A homogeneous random form of the given degree over the real frame.
pub fn form_of_degree(m: Arc<ManifoldData>, deg: usize) -> BoxedStrategy<Form> {
    let dim = m.dim();
    let coords: Vec<Symbol> = m.coords().to_vec();
    let indices: Vec<usize> = (0..dim).collect();
    prop::collection::vec(
        (prop::sample::subsequence(indices, deg), coeff_fn(coords)),
        1..=3,
    )
    .prop_map(move |terms| {
        let entries = terms.into_iter().map(|(idx, c)| {
            let mask = idx.iter().fold(0u32, |acc, i| acc | (1 << i));
            (mask, c)
        });
        Form::from_terms(&m, BasisKind::Frame, entries).unwrap()
    })
    .boxed()
}

pub fn manifold_and_form() -> impl Strategy<Value = (Arc<ManifoldData>, Form)> {
    manifold_choice().prop_flat_map(|m| {
        let dim = m.dim();
        (0..=dim).prop_flat_map(move |deg| {
            let m = m.clone();
            form_of_degree(m.clone(), deg).prop_map(move |f| (m.clone(), f))
        })
    })
}

pub fn acs_and_form() -> impl Strategy<Value = (AcsData, Form)> {
    acs_choice().prop_flat_map(|acs| {
        let m = acs.manifold().clone();
        let dim = m.dim();
        (0..=dim).prop_flat_map(move |deg| {
            let acs = acs.clone();
            form_of_degree(m.clone(), deg).prop_map(move |f| (acs.clone(), f))
        })
    })
}

/// Two random forms over one manifold, the left one homogeneous.
pub fn form_pair() -> impl Strategy<Value = (Form, Form)> {
    manifold_choice().prop_flat_map(|m| {
        let dim = m.dim();
        (0..=dim, 0..=2usize).prop_flat_map(move |(dl, dr)| {
            let m = m.clone();
            (form_of_degree(m.clone(), dl), form_of_degree(m.clone(), dr))
        })
    })
}

// ---------------------------------------------------------------------------
// Law checks, shared verbatim by both suites

pub fn law_dd_zero(form: &Form) -> Result<(), String> {
    let dd = form.d().map_err(|e| e.to_string())?.d().map_err(|e| e.to_string())?;
    if dd.is_zero() {
        Ok(())
    } else {
        Err(format!("d(d(omega)) = {dd}"))
    }
}

pub fn law_graded_leibniz(left: &Form, right: &Form) -> Result<(), String> {
    let err = |e: kodim::Error| e.to_string();
    let p = left.degree().unwrap_or(0);
    let lhs = left.wedge(right).map_err(err)?.d().map_err(err)?;
    let mut second = left.wedge(&right.d().map_err(err)?).map_err(err)?;
    if p % 2 == 1 {
        second = second.neg();
    }
    let rhs = left
        .d()
        .map_err(err)?
        .wedge(right)
        .map_err(err)?
        .add(&second)
        .map_err(err)?;
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("d(a^b) = {lhs}, but the rule gives {rhs}"))
    }
}

pub fn law_bidegree_shift_table(acs: &AcsData, form: &Form) -> Result<(), String> {
    let err = |e: kodim::Error| e.to_string();
    let basis = acs.basis();
    let n = acs.n();
    for ((p, q), component) in bidegree_split(form, basis).map_err(err)? {
        let frame = basis.to_frame(&component).map_err(err)?;
        let cases: [(Form, Option<(usize, usize)>); 4] = [
            (mu(&frame, basis).map_err(err)?, (q >= 1).then(|| (p + 2, q - 1))),
            (del(&frame, basis).map_err(err)?, Some((p + 1, q))),
            (delbar(&frame, basis).map_err(err)?, Some((p, q + 1))),
            (mubar(&frame, basis).map_err(err)?, (p >= 1).then(|| (p - 1, q + 2))),
        ];
        for (result, expected) in cases {
            match expected {
                Some((ep, eq)) if ep <= n && eq <= n => {
                    if !(result.is_zero() || result.bidegree() == Some((ep, eq))) {
                        return Err(format!(
                            "component ({p},{q}) mapped to bidegree {:?}, expected ({ep},{eq})",
                            result.bidegree()
                        ));
                    }
                }
                _ => {
                    if !result.is_zero() {
                        return Err(format!(
                            "image of ({p},{q}) out of range must vanish, got {result}"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn law_bidegree_sum_is_d(acs: &AcsData, form: &Form) -> Result<(), String> {
    let err = |e: kodim::Error| e.to_string();
    let basis = acs.basis();
    for (_, component) in bidegree_split(form, basis).map_err(err)? {
        let frame = basis.to_frame(&component).map_err(err)?;
        let total = mu(&frame, basis)
            .map_err(err)?
            .add(&del(&frame, basis).map_err(err)?)
            .map_err(err)?
            .add(&delbar(&frame, basis).map_err(err)?)
            .map_err(err)?
            .add(&mubar(&frame, basis).map_err(err)?)
            .map_err(err)?;
        let d = basis
            .to_complex(&frame.d().map_err(err)?)
            .map_err(err)?;
        if total != d {
            return Err(format!("mu+del+delbar+mubar = {total}, but d = {d}"));
        }
    }
    Ok(())
}

/// Conjugating a valid structure by elementary shears keeps J^2 = -I; the
/// validator must accept the result.
pub fn law_shear_conjugate_accepted(
    manifold: &Arc<ManifoldData>,
    base_j: &Matrix<CoeffFn>,
    shears: &[(usize, usize, Scalar)],
) -> Result<(), String> {
    let dim = manifold.dim();
    let mut p = mat_identity::<CoeffFn>(dim);
    let mut p_inv = mat_identity::<CoeffFn>(dim);
    for (r, c, lambda) in shears {
        if r == c {
            continue;
        }
        let mut e = mat_identity::<CoeffFn>(dim);
        e[*r][*c] = CoeffFn::constant(lambda.clone());
        let mut e_inv = mat_identity::<CoeffFn>(dim);
        e_inv[*r][*c] = CoeffFn::constant(lambda.neg());
        p = mat_mul(&p, &e);
        p_inv = mat_mul(&e_inv, &p_inv);
    }
    let conjugated = mat_mul(&p, &mat_mul(base_j, &p_inv));
    AcsData::new(manifold, conjugated)
        .map(|_| ())
        .map_err(|e| format!("conjugated structure rejected: {e}"))
}

/// Perturbing one entry almost always breaks J^2 = -I; whenever it does,
/// the validator must reject.  Vacuously passes if the perturbation lands
/// on another valid structure.
pub fn law_perturbation_rejected(
    manifold: &Arc<ManifoldData>,
    base_j: &Matrix<CoeffFn>,
    r: usize,
    c: usize,
    delta: &Scalar,
) -> Result<(), String> {
    if delta.is_zero() {
        return Ok(());
    }
    let mut j = base_j.clone();
    j[r][c] = j[r][c].add(&CoeffFn::constant(delta.clone()));
    let square = mat_mul(&j, &j);
    if square == mat_neg(&mat_identity::<CoeffFn>(manifold.dim())) {
        return Ok(());
    }
    match AcsData::new(manifold, j) {
        Err(_) => Ok(()),
        Ok(_) => Err(format!(
            "validator accepted a matrix with J^2 != -I (entry ({r},{c}) shifted by {delta})"
        )),
    }
}

pub fn law_conjugation_involution(form: &Form) -> Result<(), String> {
    let back = form.conjugate().conjugate();
    if &back == form {
        Ok(())
    } else {
        Err(format!("conjugate twice gave {back}, expected {form}"))
    }
}

pub fn law_conjugation_distributes_over_wedge(left: &Form, right: &Form) -> Result<(), String> {
    let err = |e: kodim::Error| e.to_string();
    let lhs = left.wedge(right).map_err(err)?.conjugate();
    let rhs = left
        .conjugate()
        .wedge(&right.conjugate())
        .map_err(err)?;
    if lhs == rhs {
        Ok(())
    } else {
        Err(format!("conj(a^b) = {lhs}, but conj(a)^conj(b) = {rhs}"))
    }
}
