//! Graded exterior-algebra elements with exact coefficients.

use super::manifold::ManifoldData;
use crate::linalg::{mat_invert, Matrix};
use crate::scalars::{CoeffFn, Scalar, Symbol};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Which covector basis the bitmask indices of a [`Form`] refer to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// Frame covectors e^1..e^2n.
    Frame,
    /// Coordinate differentials dx^1..dx^2n.
    Coord,
    /// phi^1..phi^n, phibar^1..phibar^n of one almost complex structure;
    /// the id pins which one, so forms over different structures never mix.
    Complex { acs_id: u64 },
}

/// A homogeneous differential form. Terms map a strictly-increasing
/// multi-index (stored as a bitmask over basis covectors, bit k = covector
/// k+1) to a nonzero polynomial coefficient. The zero form has no terms and
/// any degree.
#[derive(Clone)]
pub struct Form {
    manifold: Arc<ManifoldData>,
    kind: BasisKind,
    terms: BTreeMap<u32, CoeffFn>,
}

impl Form {
    pub fn zero(manifold: &Arc<ManifoldData>, kind: BasisKind) -> Self {
        Form {
            manifold: Arc::clone(manifold),
            kind,
            terms: BTreeMap::new(),
        }
    }

    /// Degree-0 form with the given coefficient.
    pub fn function(manifold: &Arc<ManifoldData>, kind: BasisKind, f: CoeffFn) -> Self {
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(0u32, f);
        }
        Form {
            manifold: Arc::clone(manifold),
            kind,
            terms,
        }
    }

    /// The k-th basis covector (0-based) as a 1-form.
    pub fn basis_covector(manifold: &Arc<ManifoldData>, kind: BasisKind, k: usize) -> Self {
        assert!(k < manifold.dim(), "basis covector index out of range");
        let mut terms = BTreeMap::new();
        terms.insert(1u32 << k, CoeffFn::one());
        Form {
            manifold: Arc::clone(manifold),
            kind,
            terms,
        }
    }

    /// Builds a form from (bitmask, coefficient) pairs; zero coefficients
    /// are pruned, homogeneity and index range are enforced.
    pub fn from_terms(
        manifold: &Arc<ManifoldData>,
        kind: BasisKind,
        entries: impl IntoIterator<Item = (u32, CoeffFn)>,
    ) -> Result<Self> {
        let mut terms: BTreeMap<u32, CoeffFn> = BTreeMap::new();
        for (mask, coeff) in entries {
            if mask >= (1u32 << manifold.dim()) {
                return Err(Error::Dimension(format!(
                    "multi-index {mask:#b} exceeds the manifold dimension {}",
                    manifold.dim()
                )));
            }
            if coeff.is_zero() {
                continue;
            }
            let entry = terms.entry(mask).or_insert_with(CoeffFn::zero);
            *entry = entry.add(&coeff);
            if entry.is_zero() {
                terms.remove(&mask);
            }
        }
        if let Some(first) = terms.keys().next() {
            let deg = first.count_ones();
            if terms.keys().any(|m| m.count_ones() != deg) {
                return Err(Error::Dimension(
                    "form terms do not share a single degree".into(),
                ));
            }
        }
        Ok(Form {
            manifold: Arc::clone(manifold),
            kind,
            terms,
        })
    }

    pub fn manifold(&self) -> &Arc<ManifoldData> {
        &self.manifold
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree of a nonzero form; the zero form reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().next().map(|m| m.count_ones() as usize)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &CoeffFn)> {
        self.terms.iter().map(|(m, c)| (*m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient at the given multi-index (zero when absent).
    pub fn coefficient(&self, mask: u32) -> CoeffFn {
        self.terms.get(&mask).cloned().unwrap_or_else(CoeffFn::zero)
    }

    fn compatible(&self, rhs: &Form, op: &str) -> Result<()> {
        if self.manifold.id() != rhs.manifold.id() {
            return Err(Error::Manifold(format!(
                "{op} of forms on different manifolds (`{}` vs `{}`)",
                self.manifold.name(),
                rhs.manifold.name()
            )));
        }
        if self.kind != rhs.kind {
            return Err(Error::Manifold(format!(
                "{op} of forms over different bases ({:?} vs {:?})",
                self.kind, rhs.kind
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Form) -> Result<Form> {
        self.compatible(rhs, "sum")?;
        if let (Some(a), Some(b)) = (self.degree(), rhs.degree()) {
            if a != b {
                return Err(Error::Dimension(format!(
                    "sum of forms of different degrees {a} and {b}"
                )));
            }
        }
        Form::from_terms(
            &self.manifold,
            self.kind,
            self.terms
                .iter()
                .chain(rhs.terms.iter())
                .map(|(m, c)| (*m, c.clone())),
        )
    }

    pub fn neg(&self) -> Form {
        Form {
            manifold: Arc::clone(&self.manifold),
            kind: self.kind,
            terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect(),
        }
    }

    pub fn sub(&self, rhs: &Form) -> Result<Form> {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, s: &Scalar) -> Form {
        if s.is_zero() {
            return Form::zero(&self.manifold, self.kind);
        }
        Form {
            manifold: Arc::clone(&self.manifold),
            kind: self.kind,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (*m, c.scale(s)))
                .collect(),
        }
    }

    pub fn scale_fn(&self, f: &CoeffFn) -> Form {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let prod = c.mul(f);
            if !prod.is_zero() {
                terms.insert(*m, prod);
            }
        }
        Form {
            manifold: Arc::clone(&self.manifold),
            kind: self.kind,
            terms,
        }
    }

    /// Exterior product with canonical reordering signs.
    pub fn wedge(&self, rhs: &Form) -> Result<Form> {
        self.compatible(rhs, "wedge")?;
        let mut terms: BTreeMap<u32, CoeffFn> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                if ma & mb != 0 {
                    continue;
                }
                let mut prod = ca.mul(cb);
                if merge_sign_is_negative(*ma, *mb) {
                    prod = prod.neg();
                }
                let mask = ma | mb;
                let entry = terms.entry(mask).or_insert_with(CoeffFn::zero);
                *entry = entry.add(&prod);
                if entry.is_zero() {
                    terms.remove(&mask);
                }
            }
        }
        Ok(Form {
            manifold: Arc::clone(&self.manifold),
            kind: self.kind,
            terms,
        })
    }

    /// Complex conjugation. Over a real basis this conjugates coefficients;
    /// over a complex basis it also swaps phi^k with phibar^k, with the
    /// (-1)^{pq} reordering sign.
    pub fn conjugate(&self) -> Form {
        match self.kind {
            BasisKind::Frame | BasisKind::Coord => Form {
                manifold: Arc::clone(&self.manifold),
                kind: self.kind,
                terms: self
                    .terms
                    .iter()
                    .map(|(m, c)| (*m, c.conjugate()))
                    .collect(),
            },
            BasisKind::Complex { .. } => {
                let n = self.manifold.n() as u32;
                let low = (1u32 << n) - 1;
                let mut terms = BTreeMap::new();
                for (m, c) in &self.terms {
                    let holo = m & low;
                    let anti = m >> n;
                    let new_mask = (anti & low) | (holo << n);
                    let p = holo.count_ones();
                    let q = anti.count_ones();
                    let mut coeff = c.conjugate();
                    if (p * q) % 2 == 1 {
                        coeff = coeff.neg();
                    }
                    terms.insert(new_mask, coeff);
                }
                Form {
                    manifold: Arc::clone(&self.manifold),
                    kind: self.kind,
                    terms,
                }
            }
        }
    }

    /// Applies a linear change of covector basis: `images[k]` is the image
    /// of basis covector k as a 1-form in the target basis; coefficients
    /// pass through `coeff_map`.
    pub(super) fn map_basis(
        &self,
        out_kind: BasisKind,
        images: &[Form],
        coeff_map: impl Fn(&CoeffFn) -> CoeffFn,
    ) -> Result<Form> {
        debug_assert_eq!(images.len(), self.manifold.dim());
        let mut out = Form::zero(&self.manifold, out_kind);
        for (mask, coeff) in &self.terms {
            let mut acc = Form::function(&self.manifold, out_kind, CoeffFn::one());
            for k in 0..self.manifold.dim() {
                if mask & (1u32 << k) != 0 {
                    acc = acc.wedge(&images[k])?;
                }
            }
            out = out.add(&acc.scale_fn(&coeff_map(coeff)))?;
        }
        Ok(out)
    }

    /// Rewrites a frame-basis form over the coordinate differentials.
    pub fn to_coord_basis(&self) -> Result<Form> {
        match self.kind {
            BasisKind::Coord => Ok(self.clone()),
            BasisKind::Frame => {
                let coframe = self.manifold.coframe_matrix()?;
                let images: Vec<Form> = (0..self.manifold.dim())
                    .map(|i| {
                        Form::from_terms(
                            &self.manifold,
                            BasisKind::Coord,
                            (0..self.manifold.dim()).map(|k| (1u32 << k, coframe[i][k].clone())),
                        )
                    })
                    .collect::<Result<_>>()?;
                self.map_basis(BasisKind::Coord, &images, CoeffFn::clone)
            }
            BasisKind::Complex { .. } => Err(Error::Unsupported(
                "rewrite the form over the real frame before converting to \
                 coordinate differentials"
                    .into(),
            )),
        }
    }

    /// Rewrites a coordinate-differential form over the frame covectors,
    /// using dx^k = sum_i F_ik e^i (the transposed frame matrix inverts the
    /// coframe exactly, by duality).
    pub fn to_frame_basis(&self) -> Result<Form> {
        match self.kind {
            BasisKind::Frame => Ok(self.clone()),
            BasisKind::Coord => {
                let frame = self.manifold.frame_matrix()?;
                let images: Vec<Form> = (0..self.manifold.dim())
                    .map(|k| {
                        Form::from_terms(
                            &self.manifold,
                            BasisKind::Frame,
                            (0..self.manifold.dim()).map(|i| (1u32 << i, frame[i][k].clone())),
                        )
                    })
                    .collect::<Result<_>>()?;
                self.map_basis(BasisKind::Frame, &images, CoeffFn::clone)
            }
            BasisKind::Complex { .. } => Err(Error::Unsupported(
                "complex-basis forms need their ComplexBasis to convert; use \
                 ComplexBasis::to_frame"
                    .into(),
            )),
        }
    }

    /// Pullback along an affine coordinate self-map (coordinate basis only):
    /// coefficients substitute the map, differentials push through its
    /// Jacobian.
    pub fn pullback_coords(&self, map: &[CoeffFn]) -> Result<Form> {
        if self.kind != BasisKind::Coord {
            return Err(Error::Unsupported(
                "pullback is computed over coordinate differentials".into(),
            ));
        }
        let coords = self.manifold.coords();
        debug_assert_eq!(map.len(), coords.len());
        let subst: BTreeMap<Symbol, CoeffFn> = coords
            .iter()
            .copied()
            .zip(map.iter().cloned())
            .collect();
        let images: Vec<Form> = map
            .iter()
            .map(|component| {
                Form::from_terms(
                    &self.manifold,
                    BasisKind::Coord,
                    coords
                        .iter()
                        .enumerate()
                        .map(|(l, c)| (1u32 << l, component.derivative(*c))),
                )
            })
            .collect::<Result<_>>()?;
        self.map_basis(BasisKind::Coord, &images, |c| c.substitute_fns(&subst))
    }

    /// (p,q) type of a homogeneous complex-basis form; `None` when terms mix
    /// types or the form is zero.
    pub fn bidegree(&self) -> Option<(usize, usize)> {
        if !matches!(self.kind, BasisKind::Complex { .. }) {
            return None;
        }
        let n = self.manifold.n() as u32;
        let low = (1u32 << n) - 1;
        let mut result = None;
        for mask in self.terms.keys() {
            let p = (mask & low).count_ones() as usize;
            let q = (mask >> n).count_ones() as usize;
            match result {
                None => result = Some((p, q)),
                Some(r) if r == (p, q) => {}
                Some(_) => return None,
            }
        }
        result
    }
}

/// Parity of the transpositions needed to merge two disjoint ascending
/// multi-indices: one inversion per pair (i in a, j in b) with i > j.
fn merge_sign_is_negative(a: u32, b: u32) -> bool {
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    inversions % 2 == 1
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        self.manifold.id() == other.manifold.id()
            && self.kind == other.kind
            && self.terms == other.terms
    }
}

impl std::fmt::Display for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let rendered: Vec<String> = self
            .terms
            .iter()
            .map(|(mask, coeff)| {
                let labels: Vec<String> = (0..self.manifold.dim())
                    .filter(|k| mask & (1u32 << k) != 0)
                    .map(|k| self.manifold.basis_label(&self.kind, k))
                    .collect();
                if labels.is_empty() {
                    return coeff.to_string();
                }
                let basis = labels.join("∧");
                if coeff.is_one() {
                    basis
                } else if coeff.neg().is_one() {
                    format!("-{basis}")
                } else {
                    let text = coeff.to_string();
                    if coeff.num_terms() == 1 && !text.contains(' ') {
                        format!("{text}*{basis}")
                    } else {
                        format!("({text})*{basis}")
                    }
                }
            })
            .collect();
        write!(f, "{}", crate::scalars::join_signed_terms(&rendered))
    }
}

impl std::fmt::Debug for Form {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self} [{:?} basis]", self.kind)
    }
}

static NEXT_ACS_ID: AtomicU64 = AtomicU64::new(1);

/// Change of basis between the real frame covectors and the complex
/// covectors phi^1..phi^n, phibar^1..phibar^n of one almost complex
/// structure. Rows of `p` give phi^k = sum_i p[k][i] e^i over Scalar.
/// Clones share the identity of the original basis.
#[derive(Clone)]
pub struct ComplexBasis {
    acs_id: u64,
    manifold: Arc<ManifoldData>,
    p: Matrix<Scalar>,
    q_inv: Matrix<Scalar>,
}

impl ComplexBasis {
    pub fn new(manifold: &Arc<ManifoldData>, p: Matrix<Scalar>) -> Result<Self> {
        let dim = manifold.dim();
        let n = manifold.n();
        if p.len() != n || p.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension(format!(
                "complex coframe must be {n} rows of length {dim}"
            )));
        }
        // Q stacks the phi rows over their conjugates; invertibility is
        // exactly the statement that phi, phibar span the coframe.
        let mut q: Matrix<Scalar> = Vec::with_capacity(dim);
        for row in &p {
            q.push(row.clone());
        }
        for row in &p {
            q.push(row.iter().map(Scalar::conj).collect());
        }
        let q_inv = mat_invert(&q).ok_or_else(|| {
            Error::Manifold(
                "the (1,0)-coframe and its conjugate do not span the complexified \
                 coframe"
                    .into(),
            )
        })?;
        Ok(ComplexBasis {
            acs_id: NEXT_ACS_ID.fetch_add(1, Ordering::Relaxed),
            manifold: Arc::clone(manifold),
            p,
            q_inv,
        })
    }

    pub fn acs_id(&self) -> u64 {
        self.acs_id
    }

    pub fn manifold(&self) -> &Arc<ManifoldData> {
        &self.manifold
    }

    pub fn kind(&self) -> BasisKind {
        BasisKind::Complex {
            acs_id: self.acs_id,
        }
    }

    /// Coefficient rows of phi^k over the frame covectors.
    pub fn p_matrix(&self) -> &Matrix<Scalar> {
        &self.p
    }

    /// Inverse of the stacked [phi; phibar] coefficient matrix.
    pub fn q_inv_matrix(&self) -> &Matrix<Scalar> {
        &self.q_inv
    }

    /// phi^k (0-based k) as a frame-basis 1-form.
    pub fn phi_in_frame(&self, k: usize) -> Result<Form> {
        Form::from_terms(
            &self.manifold,
            BasisKind::Frame,
            (0..self.manifold.dim()).map(|i| (1u32 << i, CoeffFn::from(self.p[k][i].clone()))),
        )
    }

    /// phi^k (0-based k) as a complex-basis 1-form.
    pub fn phi(&self, k: usize) -> Form {
        Form::basis_covector(&self.manifold, self.kind(), k)
    }

    /// phibar^k (0-based k) as a complex-basis 1-form.
    pub fn phibar(&self, k: usize) -> Form {
        Form::basis_covector(&self.manifold, self.kind(), self.manifold.n() + k)
    }

    /// Rewrites a frame-basis form over phi/phibar.
    pub fn to_complex(&self, a: &Form) -> Result<Form> {
        let a = match a.kind() {
            BasisKind::Complex { acs_id } if acs_id == self.acs_id => return Ok(a.clone()),
            BasisKind::Complex { .. } => {
                return Err(Error::Manifold(
                    "form belongs to a different almost complex structure".into(),
                ))
            }
            BasisKind::Coord => a.to_frame_basis()?,
            BasisKind::Frame => a.clone(),
        };
        let dim = self.manifold.dim();
        let images: Vec<Form> = (0..dim)
            .map(|i| {
                Form::from_terms(
                    &self.manifold,
                    self.kind(),
                    (0..dim).map(|j| (1u32 << j, CoeffFn::from(self.q_inv[i][j].clone()))),
                )
            })
            .collect::<Result<_>>()?;
        a.map_basis(self.kind(), &images, CoeffFn::clone)
    }

    /// Rewrites a complex-basis form of this structure over the real frame.
    pub fn to_frame(&self, a: &Form) -> Result<Form> {
        match a.kind() {
            BasisKind::Frame => return Ok(a.clone()),
            BasisKind::Coord => return a.to_frame_basis(),
            BasisKind::Complex { acs_id } if acs_id == self.acs_id => {}
            BasisKind::Complex { .. } => {
                return Err(Error::Manifold(
                    "form belongs to a different almost complex structure".into(),
                ))
            }
        }
        let dim = self.manifold.dim();
        let n = self.manifold.n();
        let images: Vec<Form> = (0..dim)
            .map(|j| {
                let row: Vec<Scalar> = if j < n {
                    self.p[j].clone()
                } else {
                    self.p[j - n].iter().map(Scalar::conj).collect()
                };
                Form::from_terms(
                    &self.manifold,
                    BasisKind::Frame,
                    (0..dim).map(|i| (1u32 << i, CoeffFn::from(row[i].clone()))),
                )
            })
            .collect::<Result<_>>()?;
        a.map_basis(BasisKind::Frame, &images, CoeffFn::clone)
    }
}

impl std::fmt::Debug for ComplexBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ComplexBasis(acs {}, on {})",
            self.acs_id,
            self.manifold.name()
        )
    }
}
