//! Hand-built fixtures shared by unit tests across modules. The shipped
//! spec files must reproduce these exactly (cross-checked in spec_io).

use super::{ComplexBasis, LatticeShift, ManifoldData};
use crate::linalg::Matrix;
use crate::scalars::{parse_coeff_fn, CoeffFn, Scalar, Symbol};
use num::BigRational;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

fn declared(names: &[&str]) -> BTreeSet<Symbol> {
    names.iter().map(|n| Symbol::new(n)).collect()
}

fn pmat(rows: &[&[&str]], vars: &BTreeSet<Symbol>) -> Matrix<CoeffFn> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|s| parse_coeff_fn(s, vars).unwrap())
                .collect()
        })
        .collect()
}

fn periods(names: &[&str], period: i64) -> BTreeMap<Symbol, BigRational> {
    names
        .iter()
        .map(|n| (Symbol::new(n), BigRational::from_integer(period.into())))
        .collect()
}

/// The 2-step nilmanifold with coframe dx, dy, dz - x dy,
/// dt + x^2/2 dy - x dz; y, z, t translation-periodic of period 2 and one
/// x-shift generator mixing z and t.
pub(crate) fn nil_n() -> Arc<ManifoldData> {
    let vars = declared(&["x", "y", "z", "t"]);
    let coords = vec![
        Symbol::new("x"),
        Symbol::new("y"),
        Symbol::new("z"),
        Symbol::new("t"),
    ];
    let frame = pmat(
        &[
            &["1", "0", "0", "0"],
            &["0", "1", "x", "1/2*x^2"],
            &["0", "0", "1", "x"],
            &["0", "0", "0", "1"],
        ],
        &vars,
    );
    let coframe = pmat(
        &[
            &["1", "0", "0", "0"],
            &["0", "1", "0", "0"],
            &["0", "-x", "1", "0"],
            &["0", "1/2*x^2", "-x", "1"],
        ],
        &vars,
    );
    let shift = LatticeShift {
        name: "x_shift".into(),
        map: ["x + 2", "y", "z + 2*y", "t + 2*y + 2*z"]
            .iter()
            .map(|s| parse_coeff_fn(s, &vars).unwrap())
            .collect(),
    };
    ManifoldData::new_coordinate(
        "nilmanifold_N",
        coords,
        periods(&["y", "z", "t"], 2),
        frame,
        coframe,
        vec![shift],
    )
    .unwrap()
}

/// J with J(e1) = e3, J(e2) = e4 in the column convention (entry (i,j) is
/// the e_i coefficient of J(e_j)).
pub(crate) fn nil_n_j() -> Matrix<CoeffFn> {
    let vars = declared(&[]);
    pmat(
        &[
            &["0", "0", "-1", "0"],
            &["0", "0", "0", "-1"],
            &["1", "0", "0", "0"],
            &["0", "1", "0", "0"],
        ],
        &vars,
    )
}

/// phi1 = e1 + i e3, phi2 = e2 + i e4.
pub(crate) fn nil_n_complex_basis(m: &Arc<ManifoldData>) -> ComplexBasis {
    let one = Scalar::one();
    let zero = Scalar::zero();
    let i = Scalar::i();
    ComplexBasis::new(
        m,
        vec![
            vec![one.clone(), zero.clone(), i.clone(), zero.clone()],
            vec![zero.clone(), one, zero, i],
        ],
    )
    .unwrap()
}

/// Flat 4-torus: identity frame, all coordinates periodic of period 1.
pub(crate) fn torus4() -> Arc<ManifoldData> {
    let vars = declared(&["x1", "x2", "x3", "x4"]);
    let coords = vec![
        Symbol::new("x1"),
        Symbol::new("x2"),
        Symbol::new("x3"),
        Symbol::new("x4"),
    ];
    let eye = pmat(
        &[
            &["1", "0", "0", "0"],
            &["0", "1", "0", "0"],
            &["0", "0", "1", "0"],
            &["0", "0", "0", "1"],
        ],
        &vars,
    );
    ManifoldData::new_coordinate(
        "torus4",
        coords,
        periods(&["x1", "x2", "x3", "x4"], 1),
        eye.clone(),
        eye,
        Vec::new(),
    )
    .unwrap()
}

/// Standard torus J: J(e1) = e2, J(e3) = e4.
pub(crate) fn torus4_j() -> Matrix<CoeffFn> {
    let vars = declared(&[]);
    pmat(
        &[
            &["0", "-1", "0", "0"],
            &["1", "0", "0", "0"],
            &["0", "0", "0", "-1"],
            &["0", "0", "1", "0"],
        ],
        &vars,
    )
}

/// phi1 = e1 + i e2, phi2 = e3 + i e4.
pub(crate) fn torus4_complex_basis(m: &Arc<ManifoldData>) -> ComplexBasis {
    let one = Scalar::one();
    let zero = Scalar::zero();
    let i = Scalar::i();
    ComplexBasis::new(
        m,
        vec![
            vec![one.clone(), i.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), zero, one, i],
        ],
    )
    .unwrap()
}

/// Kodaira-Thurston manifold: coordinates (t, x, y, z), frame twisted by
/// x in the y-z block, integer lattice with one x-shift.
pub(crate) fn kodaira_thurston() -> Arc<ManifoldData> {
    let vars = declared(&["t", "x", "y", "z"]);
    let coords = vec![
        Symbol::new("t"),
        Symbol::new("x"),
        Symbol::new("y"),
        Symbol::new("z"),
    ];
    let frame = pmat(
        &[
            &["1", "0", "0", "0"],
            &["0", "1", "0", "0"],
            &["0", "0", "1", "x"],
            &["0", "0", "0", "1"],
        ],
        &vars,
    );
    let coframe = pmat(
        &[
            &["1", "0", "0", "0"],
            &["0", "1", "0", "0"],
            &["0", "0", "1", "0"],
            &["0", "0", "-x", "1"],
        ],
        &vars,
    );
    let shift = LatticeShift {
        name: "x_shift".into(),
        map: ["t", "x + 1", "y", "z + y"]
            .iter()
            .map(|s| parse_coeff_fn(s, &vars).unwrap())
            .collect(),
    };
    ManifoldData::new_coordinate(
        "kodaira_thurston",
        coords,
        periods(&["t", "y", "z"], 1),
        frame,
        coframe,
        vec![shift],
    )
    .unwrap()
}

/// Fiber structure of the Kodaira-Thurston family at a real parameter
/// value: J(e1) = e2, J(e3) = e4/(s+pi), J(e4) = -(s+pi) e3.
pub(crate) fn kt_j(s: &Scalar) -> Matrix<CoeffFn> {
    let sp = s.add(&Scalar::pi());
    let z = CoeffFn::zero();
    let one = CoeffFn::one();
    vec![
        vec![z.clone(), one.neg(), z.clone(), z.clone()],
        vec![one.clone(), z.clone(), z.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone(), CoeffFn::from(sp.neg())],
        vec![
            z.clone(),
            z.clone(),
            CoeffFn::from(sp.inv().unwrap()),
            z,
        ],
    ]
}

/// Solvmanifold given by structure equations only (complex structure
/// equations dphi2 = phi1∧phi2, dphi3 = -phi1∧phi3, written out real).
pub(crate) fn nakamura() -> Arc<ManifoldData> {
    let two_form = |entries: &[(u32, i64)]| -> BTreeMap<u32, Scalar> {
        entries
            .iter()
            .map(|(mask, c)| (*mask, Scalar::from_int(*c)))
            .collect()
    };
    let d_coframe = vec![
        two_form(&[]),
        two_form(&[]),
        // d(e3) = e1∧e3 - e2∧e4
        two_form(&[(0b0101, 1), (0b1010, -1)]),
        // d(e4) = e1∧e4 + e2∧e3
        two_form(&[(0b1001, 1), (0b0110, 1)]),
        // d(e5) = -e1∧e5 + e2∧e6
        two_form(&[(0b010001, -1), (0b100010, 1)]),
        // d(e6) = -e1∧e6 - e2∧e5
        two_form(&[(0b100001, -1), (0b010010, -1)]),
    ];
    ManifoldData::new_structure("nakamura", 6, d_coframe).unwrap()
}

/// phi^k = e^{2k-1} + i e^{2k} for the standard block J on the Nakamura
/// frame.
pub(crate) fn nakamura_complex_basis(m: &Arc<ManifoldData>) -> ComplexBasis {
    let one = Scalar::one();
    let zero = Scalar::zero();
    let i = Scalar::i();
    let mut p = vec![vec![zero.clone(); 6]; 3];
    for k in 0..3 {
        p[k][2 * k] = one.clone();
        p[k][2 * k + 1] = i.clone();
    }
    ComplexBasis::new(m, p).unwrap()
}
