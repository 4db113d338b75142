//! Manifold presentations: coordinates, frame, coframe, lattice.

use super::form::{BasisKind, Form};
use crate::linalg::{mat_mul, mat_transpose, Matrix};
use crate::scalars::{CoeffFn, Scalar, Symbol};
use crate::{Error, Result};
use num::BigRational;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

static NEXT_MANIFOLD_ID: AtomicU64 = AtomicU64::new(1);

/// A non-translation lattice generator: coordinates map to affine images.
#[derive(Clone, Debug)]
pub struct LatticeShift {
    pub name: String,
    /// Image of each coordinate under the shift, in declaration order.
    pub map: Vec<CoeffFn>,
}

/// How derivatives are computed.
pub enum Backend {
    /// Frame and coframe given as polynomial matrices over the coordinates;
    /// row i of `frame` is e_i as a derivation (entry (i,j) = e_i applied to
    /// coordinate j), row i of `coframe` expresses e^i in coordinate
    /// differentials.
    Coordinate {
        frame: Matrix<CoeffFn>,
        coframe: Matrix<CoeffFn>,
    },
    /// Only the structure equations are known: entry i is d(e^{i+1}) as a
    /// constant-coefficient 2-form over the frame basis, keyed by bitmask.
    Structure { d_coframe: Vec<BTreeMap<u32, Scalar>> },
}

/// An immutable manifold presentation, shared by all forms living on it.
pub struct ManifoldData {
    id: u64,
    name: String,
    dim: usize,
    coords: Vec<Symbol>,
    periodic: BTreeMap<Symbol, BigRational>,
    shifts: Vec<LatticeShift>,
    backend: Backend,
}

impl ManifoldData {
    /// Builds and fully validates a coordinate-backed manifold.
    pub fn new_coordinate(
        name: impl Into<String>,
        coords: Vec<Symbol>,
        periodic: BTreeMap<Symbol, BigRational>,
        frame: Matrix<CoeffFn>,
        coframe: Matrix<CoeffFn>,
        shifts: Vec<LatticeShift>,
    ) -> Result<Arc<Self>> {
        let name = name.into();
        let dim = coords.len();
        check_dimension(dim)?;
        let distinct: BTreeSet<_> = coords.iter().collect();
        if distinct.len() != dim {
            return Err(Error::Manifold(format!(
                "manifold `{name}`: coordinate names must be distinct"
            )));
        }
        check_square(&frame, dim, &name, "frame_vectors")?;
        check_square(&coframe, dim, &name, "coframe")?;
        for (label, m) in [("frame_vectors", &frame), ("coframe", &coframe)] {
            for (i, row) in m.iter().enumerate() {
                for (j, entry) in row.iter().enumerate() {
                    for s in entry.symbols() {
                        if !coords.contains(&s) {
                            return Err(Error::Manifold(format!(
                                "manifold `{name}`: {label} entry ({}, {}) uses `{s}` \
                                 which is not a coordinate",
                                i + 1,
                                j + 1
                            )));
                        }
                    }
                }
            }
        }
        for (sym, period) in &periodic {
            if !coords.contains(sym) {
                return Err(Error::Manifold(format!(
                    "manifold `{name}`: periodic entry `{sym}` is not a coordinate"
                )));
            }
            if *period <= BigRational::from_integer(0.into()) {
                return Err(Error::Manifold(format!(
                    "manifold `{name}`: period of `{sym}` must be positive"
                )));
            }
        }
        // Duality: e^i(e_j) = sum_k C_ik F_jk must be the identity.
        let product = mat_mul(&coframe, &mat_transpose(&frame));
        for (i, row) in product.iter().enumerate() {
            for (j, entry) in row.iter().enumerate() {
                let expected = if i == j {
                    CoeffFn::one()
                } else {
                    CoeffFn::zero()
                };
                if *entry != expected {
                    return Err(Error::Manifold(format!(
                        "manifold `{name}`: coframe and frame are not dual, \
                         pairing e^{}(e_{}) = {} instead of {}",
                        i + 1,
                        j + 1,
                        entry,
                        expected
                    )));
                }
            }
        }
        for shift in &shifts {
            if shift.map.len() != dim {
                return Err(Error::Manifold(format!(
                    "manifold `{name}`: lattice shift `{}` maps {} coordinates, \
                     expected {dim}",
                    shift.name,
                    shift.map.len()
                )));
            }
            for (j, component) in shift.map.iter().enumerate() {
                if component.total_degree() > 1 {
                    return Err(Error::Manifold(format!(
                        "manifold `{name}`: lattice shift `{}` component for `{}` \
                         is not affine: {component}",
                        shift.name, coords[j]
                    )));
                }
                for s in component.symbols() {
                    if !coords.contains(&s) {
                        return Err(Error::Manifold(format!(
                            "manifold `{name}`: lattice shift `{}` uses `{s}` which \
                             is not a coordinate",
                            shift.name
                        )));
                    }
                }
            }
        }
        let data = Arc::new(ManifoldData {
            id: NEXT_MANIFOLD_ID.fetch_add(1, Ordering::Relaxed),
            name,
            dim,
            coords,
            periodic,
            shifts,
            backend: Backend::Coordinate { frame, coframe },
        });
        data.validate_shift_invariance()?;
        Ok(data)
    }

    /// Builds a structure-equation-backed manifold (constant coefficients
    /// only; no coordinate calculus available).
    pub fn new_structure(
        name: impl Into<String>,
        dim: usize,
        d_coframe: Vec<BTreeMap<u32, Scalar>>,
    ) -> Result<Arc<Self>> {
        let name = name.into();
        check_dimension(dim)?;
        if d_coframe.len() != dim {
            return Err(Error::Manifold(format!(
                "manifold `{name}`: expected {dim} structure equations, got {}",
                d_coframe.len()
            )));
        }
        for (i, terms) in d_coframe.iter().enumerate() {
            for mask in terms.keys() {
                if mask.count_ones() != 2 || *mask >= (1u32 << dim) {
                    return Err(Error::Manifold(format!(
                        "manifold `{name}`: d(e^{}) contains a non-2-form term",
                        i + 1
                    )));
                }
            }
        }
        let data = Arc::new(ManifoldData {
            id: NEXT_MANIFOLD_ID.fetch_add(1, Ordering::Relaxed),
            name: name.clone(),
            dim,
            coords: Vec::new(),
            periodic: BTreeMap::new(),
            shifts: Vec::new(),
            backend: Backend::Structure { d_coframe },
        });
        // d must square to zero on the declared equations.
        for i in 0..dim {
            let ei = Form::basis_covector(&data, BasisKind::Frame, i);
            let dde = ei.d()?.d()?;
            if !dde.is_zero() {
                return Err(Error::Manifold(format!(
                    "manifold `{name}`: structure equations are inconsistent, \
                     d(d(e^{})) = {dde} is nonzero",
                    i + 1
                )));
            }
        }
        Ok(data)
    }

    /// Every coframe element must pull back to itself under every declared
    /// lattice shift; otherwise the frame does not descend to the quotient.
    fn validate_shift_invariance(self: &Arc<Self>) -> Result<()> {
        for shift in &self.shifts {
            for i in 0..self.dim {
                let ei = self.coframe_element_coord(i)?;
                let pulled = ei.pullback_coords(&shift.map)?;
                if pulled != ei {
                    return Err(Error::Manifold(format!(
                        "manifold `{}`: lattice shift `{}` does not preserve the \
                         frame: pullback of e^{} is {pulled}, expected {ei}",
                        self.name,
                        shift.name,
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Real dimension 2n.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Complex dimension n.
    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn coords(&self) -> &[Symbol] {
        &self.coords
    }

    pub fn coord_index(&self, s: Symbol) -> Option<usize> {
        self.coords.iter().position(|c| *c == s)
    }

    pub fn period_of(&self, s: Symbol) -> Option<&BigRational> {
        self.periodic.get(&s)
    }

    pub fn periodic(&self) -> &BTreeMap<Symbol, BigRational> {
        &self.periodic
    }

    /// Coordinates without a declared translation period, in order.
    pub fn nonperiodic_coords(&self) -> Vec<Symbol> {
        self.coords
            .iter()
            .copied()
            .filter(|c| !self.periodic.contains_key(c))
            .collect()
    }

    pub fn shifts(&self) -> &[LatticeShift] {
        &self.shifts
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn is_structure_backend(&self) -> bool {
        matches!(self.backend, Backend::Structure { .. })
    }

    pub fn frame_matrix(&self) -> Result<&Matrix<CoeffFn>> {
        match &self.backend {
            Backend::Coordinate { frame, .. } => Ok(frame),
            Backend::Structure { .. } => Err(Error::Unsupported(format!(
                "manifold `{}` is given by structure equations only and has no \
                 coordinate frame",
                self.name
            ))),
        }
    }

    pub fn coframe_matrix(&self) -> Result<&Matrix<CoeffFn>> {
        match &self.backend {
            Backend::Coordinate { coframe, .. } => Ok(coframe),
            Backend::Structure { .. } => Err(Error::Unsupported(format!(
                "manifold `{}` is given by structure equations only and has no \
                 coordinate coframe",
                self.name
            ))),
        }
    }

    pub(super) fn d_coframe_terms(&self, i: usize) -> Result<&BTreeMap<u32, Scalar>> {
        match &self.backend {
            Backend::Structure { d_coframe } => Ok(&d_coframe[i]),
            Backend::Coordinate { .. } => Err(Error::Internal(
                "structure-equation lookup on a coordinate-backed manifold".into(),
            )),
        }
    }

    /// The derivation e_i applied to a coordinate function.
    pub fn apply_frame_vector(&self, i: usize, f: &CoeffFn) -> Result<CoeffFn> {
        match &self.backend {
            Backend::Coordinate { frame, .. } => {
                let mut acc = CoeffFn::zero();
                for (j, coord) in self.coords.iter().enumerate() {
                    let df = f.derivative(*coord);
                    if !df.is_zero() {
                        acc = acc.add(&frame[i][j].mul(&df));
                    }
                }
                Ok(acc)
            }
            Backend::Structure { .. } => {
                if f.is_constant() {
                    Ok(CoeffFn::zero())
                } else {
                    Err(Error::Unsupported(format!(
                        "manifold `{}` has no coordinate derivations; cannot \
                         differentiate the non-constant coefficient {f}",
                        self.name
                    )))
                }
            }
        }
    }

    /// e^i as a coordinate-differential form (coordinate backend only).
    pub(super) fn coframe_element_coord(self: &Arc<Self>, i: usize) -> Result<Form> {
        let coframe = self.coframe_matrix()?;
        Form::from_terms(
            self,
            BasisKind::Coord,
            (0..self.dim).map(|k| (1u32 << k, coframe[i][k].clone())),
        )
    }

    /// Human label of the k-th basis covector in the given basis mode.
    pub fn basis_label(&self, kind: &BasisKind, k: usize) -> String {
        match kind {
            BasisKind::Frame => format!("e{}", k + 1),
            BasisKind::Coord => format!("d{}", self.coords[k]),
            BasisKind::Complex { .. } => {
                let n = self.n();
                if k < n {
                    format!("phi{}", k + 1)
                } else {
                    format!("phibar{}", k - n + 1)
                }
            }
        }
    }
}

impl std::fmt::Debug for ManifoldData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ManifoldData({}, dim {})", self.name, self.dim)
    }
}

fn check_dimension(dim: usize) -> Result<()> {
    if dim == 0 || dim % 2 != 0 {
        return Err(Error::Dimension(format!(
            "manifold dimension must be a positive even integer, got {dim}"
        )));
    }
    if dim > 30 {
        return Err(Error::Dimension(format!(
            "manifold dimension {dim} exceeds the supported maximum of 30"
        )));
    }
    Ok(())
}

fn check_square(m: &Matrix<CoeffFn>, dim: usize, name: &str, label: &str) -> Result<()> {
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(Error::Manifold(format!(
            "manifold `{name}`: {label} must be a {dim}x{dim} matrix"
        )));
    }
    Ok(())
}
