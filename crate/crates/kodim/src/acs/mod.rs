//! Almost-complex structures on frame-equipped manifolds.
//!
//! An almost-complex structure is a matrix `J` acting on the invariant frame,
//! `J(e_j) = sum_i J[i][j] e_i`, with `J^2 = -I`.  From a validated `J` this
//! module derives the objects everything downstream consumes:
//!
//! * the (1,0)-coframe `phi^1..phi^n` extracted from the projector
//!   `(I - i J^T)/2` by pivoted elimination (deterministic, leading
//!   coefficient normalized to 1),
//! * the canonical section `psi = phi^1 ∧ … ∧ phi^n` of the anticanonical
//!   dual and the connection form `alpha` with `dbar psi = alpha ∧ psi`,
//! * the dual (0,1) vector fields `Xbar_j`,
//! * the integrability test (vanishing of `mubar` on the coframe),
//! * pseudoholomorphicity of linear maps between frames,
//! * the generalized Calabi-Yau check ([`gcy::gcy_check`]).
//!
//! `J` entries may depend on coordinates for validation purposes, but the
//! derived data requires constant entries; [`ValidatedJ::into_acs`] reports
//! the first non-constant entry otherwise.

mod gcy;

pub use gcy::{gcy_check, ConditionVerdict, GcyInput, GcyReport};

use std::sync::Arc;

use crate::error::Error;
use crate::exterior::{bidegree_split, mubar, ComplexBasis, Form, ManifoldData};
use crate::linalg::{mat_identity, mat_mul, mat_neg, mat_shape, Matrix};
use crate::scalars::{CoeffFn, RatFn, Scalar};
use crate::Result;

/// A matrix confirmed to square to `-I` over the frame of `manifold`.
///
/// Entries may still depend on coordinates; [`ValidatedJ::into_acs`] performs
/// the constant-coefficient promotion needed by the derived data.
#[derive(Debug, Clone)]
pub struct ValidatedJ {
    manifold: Arc<ManifoldData>,
    j: Matrix<CoeffFn>,
}

/// Check that `j` is square of the manifold dimension, uses only declared
/// coordinates, and satisfies `J^2 = -I` exactly.
///
/// The error names the first offending entry of `J^2` (1-based indices).
pub fn validate(manifold: &Arc<ManifoldData>, j: Matrix<CoeffFn>) -> Result<ValidatedJ> {
    let dim = manifold.dim();
    let (rows, cols) = mat_shape(&j);
    if rows != dim || cols != dim {
        return Err(Error::Dimension(format!(
            "almost-complex matrix must be {dim}x{dim}, got {rows}x{cols}"
        )));
    }
    let declared = manifold.coords().iter().cloned().collect::<std::collections::BTreeSet<_>>();
    for (i, row) in j.iter().enumerate() {
        for (k, entry) in row.iter().enumerate() {
            for sym in entry.symbols() {
                if !declared.contains(&sym) {
                    return Err(Error::Manifold(format!(
                        "J entry ({}, {}) uses symbol `{}` which is not a coordinate of `{}`",
                        i + 1,
                        k + 1,
                        sym,
                        manifold.name()
                    )));
                }
            }
        }
    }
    let square = mat_mul(&j, &j);
    let minus_identity: Matrix<CoeffFn> = mat_neg(&mat_identity::<CoeffFn>(dim));
    for i in 0..dim {
        for k in 0..dim {
            if square[i][k] != minus_identity[i][k] {
                return Err(Error::NotAlmostComplex {
                    row: i + 1,
                    col: k + 1,
                    entry: square[i][k].to_string(),
                });
            }
        }
    }
    Ok(ValidatedJ {
        manifold: Arc::clone(manifold),
        j,
    })
}

impl ValidatedJ {
    pub fn manifold(&self) -> &Arc<ManifoldData> {
        &self.manifold
    }

    pub fn j_matrix(&self) -> &Matrix<CoeffFn> {
        &self.j
    }

    /// Whether every entry is a constant scalar.
    pub fn is_constant(&self) -> bool {
        self.j.iter().flatten().all(|e| e.is_constant())
    }

    /// Promote to full almost-complex data.  Requires constant entries.
    pub fn into_acs(self) -> Result<AcsData> {
        let dim = self.manifold.dim();
        let mut j_scalar: Matrix<Scalar> = Vec::with_capacity(dim);
        for (i, row) in self.j.iter().enumerate() {
            let mut out = Vec::with_capacity(dim);
            for (k, entry) in row.iter().enumerate() {
                match entry.as_constant() {
                    Some(c) => out.push(c),
                    None => {
                        return Err(Error::NonConstantJ {
                            row: i + 1,
                            col: k + 1,
                            entry: entry.to_string(),
                        })
                    }
                }
            }
            j_scalar.push(out);
        }
        AcsData::from_validated(self.manifold, self.j, j_scalar)
    }
}

/// An almost-complex structure together with its derived data.
#[derive(Debug, Clone)]
pub struct AcsData {
    manifold: Arc<ManifoldData>,
    j: Matrix<CoeffFn>,
    j_scalar: Matrix<Scalar>,
    basis: ComplexBasis,
    psi: Form,
    alpha: Form,
    alpha_coeffs: Vec<Scalar>,
}

impl AcsData {
    /// Validate `j` and derive the coframe, `psi`, and `alpha` in one step.
    pub fn new(manifold: &Arc<ManifoldData>, j: Matrix<CoeffFn>) -> Result<AcsData> {
        validate(manifold, j)?.into_acs()
    }

    /// Convenience constructor from a constant matrix.
    pub fn from_scalar_matrix(manifold: &Arc<ManifoldData>, j: Matrix<Scalar>) -> Result<AcsData> {
        let lifted = j
            .into_iter()
            .map(|row| row.into_iter().map(CoeffFn::constant).collect())
            .collect();
        AcsData::new(manifold, lifted)
    }

    fn from_validated(
        manifold: Arc<ManifoldData>,
        j: Matrix<CoeffFn>,
        j_scalar: Matrix<Scalar>,
    ) -> Result<AcsData> {
        let p = coframe10_rows(&j_scalar)?;
        let basis = ComplexBasis::new(&manifold, p)?;
        let n = manifold.n();
        let low_mask: u32 = (1u32 << n) - 1;
        let psi = Form::from_terms(&manifold, basis.kind(), vec![(low_mask, CoeffFn::one())])?;

        // dbar psi is the (n,1) component of d psi; solve dbar psi = alpha ∧ psi.
        let dpsi = basis.to_complex(&basis.to_frame(&psi)?.d()?)?;
        let mut alpha_coeffs = Vec::with_capacity(n);
        let mut alpha_terms = Vec::with_capacity(n);
        for jj in 0..n {
            let mask = low_mask | (1u32 << (n + jj));
            // phibar^j ∧ psi = (-1)^n psi ∧ phibar^j, so the coefficient picks
            // up (-1)^n relative to the ascending-mask basis element.
            let mut a = dpsi.coefficient(mask);
            if n % 2 == 1 {
                a = a.neg();
            }
            let a_scalar = a.as_constant().ok_or_else(|| {
                Error::Unsupported(format!(
                    "connection form coefficient a_{} = {} is not constant on `{}`",
                    jj + 1,
                    a,
                    manifold.name()
                ))
            })?;
            if !a.is_zero() {
                alpha_terms.push((1u32 << (n + jj), a.clone()));
            }
            alpha_coeffs.push(a_scalar);
        }
        let alpha = Form::from_terms(&manifold, basis.kind(), alpha_terms)?;

        let acs = AcsData {
            manifold,
            j,
            j_scalar,
            basis,
            psi,
            alpha,
            alpha_coeffs,
        };
        acs.check_alpha_residual()?;
        Ok(acs)
    }

    /// Recompute `dbar psi - alpha ∧ psi` and insist it is exactly zero.
    fn check_alpha_residual(&self) -> Result<()> {
        let dpsi = self
            .basis
            .to_complex(&self.basis.to_frame(&self.psi)?.d()?)?;
        let parts = bidegree_split(&dpsi, &self.basis)?;
        let n = self.manifold.n();
        let dbar_psi = parts
            .get(&(n, 1))
            .cloned()
            .unwrap_or_else(|| Form::zero(&self.manifold, self.basis.kind()));
        let wedge = self.alpha.wedge(&self.psi)?;
        if dbar_psi != wedge {
            return Err(Error::Internal(format!(
                "connection form residual is nonzero on `{}`: dbar psi = {}, alpha ∧ psi = {}",
                self.manifold.name(),
                dbar_psi,
                wedge
            )));
        }
        Ok(())
    }

    pub fn manifold(&self) -> &Arc<ManifoldData> {
        &self.manifold
    }

    /// Half the real dimension.
    pub fn n(&self) -> usize {
        self.manifold.n()
    }

    pub fn j_matrix(&self) -> &Matrix<CoeffFn> {
        &self.j
    }

    pub fn j_scalar_matrix(&self) -> &Matrix<Scalar> {
        &self.j_scalar
    }

    pub fn basis(&self) -> &ComplexBasis {
        &self.basis
    }

    /// The (1,0)-coframe element `phi^{k+1}` expressed over the real frame.
    pub fn phi_in_frame(&self, k: usize) -> Result<Form> {
        self.basis.phi_in_frame(k)
    }

    /// `psi = phi^1 ∧ … ∧ phi^n` in the complex basis.
    pub fn psi(&self) -> &Form {
        &self.psi
    }

    /// The connection form `alpha` with `dbar psi = alpha ∧ psi`, as a
    /// (0,1)-form in the complex basis.
    pub fn alpha(&self) -> &Form {
        &self.alpha
    }

    /// Coefficients `a_j` of `alpha = sum_j a_j phibar^j`.
    pub fn alpha_coefficients(&self) -> &[Scalar] {
        &self.alpha_coeffs
    }

    /// Frame coefficients of the (0,1) fields `Xbar_1..Xbar_n` dual to the
    /// conjugate coframe: row `j` holds `u` with `Xbar_{j+1} = sum_i u_i e_i`.
    pub fn x_bar_frame_coefficients(&self) -> Matrix<Scalar> {
        let dim = self.manifold.dim();
        let n = self.n();
        let q_inv = self.basis.q_inv_matrix();
        let mut rows = Vec::with_capacity(n);
        for j in 0..n {
            // X_j is column j of Q^{-1}; Xbar_j is its conjugate.
            let mut row = Vec::with_capacity(dim);
            for i in 0..dim {
                row.push(q_inv[i][j].conj());
            }
            rows.push(row);
        }
        rows
    }

    /// Apply `Xbar_{j+1}` to a function of the coordinates.
    pub fn apply_x_bar(&self, j: usize, f: &CoeffFn) -> Result<CoeffFn> {
        let coeffs = self.x_bar_frame_coefficients();
        let mut acc = CoeffFn::zero();
        for (i, c) in coeffs[j].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let df = self.manifold.apply_frame_vector(i, f)?;
            acc = acc.add(&df.scale(c));
        }
        Ok(acc)
    }

    /// Split a real-frame form into its bidegree components.
    pub fn bidegree_split(&self, form: &Form) -> Result<std::collections::BTreeMap<(usize, usize), Form>> {
        let complex = if form.kind() == self.basis.kind() {
            form.clone()
        } else {
            self.basis.to_complex(form)?
        };
        bidegree_split(&complex, &self.basis)
    }

    /// Integrability via vanishing of `mubar` on the whole (1,0)-coframe.
    pub fn is_integrable(&self) -> Result<IntegrabilityReport> {
        for k in 0..self.n() {
            let phi = self.basis.phi(k);
            let obstruction = mubar(&phi, &self.basis)?;
            if !obstruction.is_zero() {
                return Ok(IntegrabilityReport {
                    integrable: false,
                    witness: Some(IntegrabilityWitness {
                        coframe_index: k + 1,
                        obstruction,
                    }),
                });
            }
        }
        Ok(IntegrabilityReport {
            integrable: true,
            witness: None,
        })
    }
}

/// Outcome of the integrability test.
#[derive(Debug, Clone)]
pub struct IntegrabilityReport {
    pub integrable: bool,
    pub witness: Option<IntegrabilityWitness>,
}

/// The first nonvanishing `mubar(phi^k)`, as evidence of non-integrability.
#[derive(Debug, Clone)]
pub struct IntegrabilityWitness {
    /// 1-based index of the coframe element.
    pub coframe_index: usize,
    /// `mubar(phi^k)`, a nonzero (0,2)-form.
    pub obstruction: Form,
}

impl std::fmt::Display for IntegrabilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.witness {
            None => write!(f, "integrable: mubar vanishes on the (1,0)-coframe"),
            Some(w) => write!(
                f,
                "not integrable: mubar(phi{}) = {}",
                w.coframe_index, w.obstruction
            ),
        }
    }
}

/// Rows of the (1,0)-coframe matrix `P` (each row lists the `e^k` coefficients
/// of one `phi^j`), extracted from the projector `(I - i J^T)/2`.
///
/// Candidate covectors are the projector columns, processed in index order
/// with pivoted elimination; each selected covector is normalized so its
/// leading coefficient is 1.  The result is deterministic.
fn coframe10_rows(j: &Matrix<Scalar>) -> Result<Matrix<Scalar>> {
    let dim = j.len();
    let n = dim / 2;
    let half = Scalar::from_ratio(1, 2);
    let i_unit = Scalar::i();
    let mut selected: Vec<(usize, Vec<Scalar>)> = Vec::with_capacity(n);
    for cand in 0..dim {
        if selected.len() == n {
            break;
        }
        let mut c: Vec<Scalar> = (0..dim)
            .map(|k| {
                let delta = if k == cand { Scalar::one() } else { Scalar::zero() };
                delta.sub(&i_unit.mul(&j[cand][k])).mul(&half)
            })
            .collect();
        for (pivot, row) in &selected {
            let factor = c[*pivot].clone();
            if !factor.is_zero() {
                for k in 0..dim {
                    c[k] = c[k].sub(&factor.mul(&row[k]));
                }
            }
        }
        if let Some(pivot) = c.iter().position(|x| !x.is_zero()) {
            let lead = c[pivot].inv().expect("pivot entry is nonzero");
            for entry in &mut c {
                *entry = entry.mul(&lead);
            }
            selected.push((pivot, c));
        }
    }
    if selected.len() != n {
        return Err(Error::Internal(format!(
            "projector (I - i J^T)/2 has rank {} instead of {n}",
            selected.len()
        )));
    }
    Ok(selected.into_iter().map(|(_, row)| row).collect())
}

/// Check `dmap . J_src = J_tgt . dmap` exactly over rational functions.
///
/// `dmap` must be `r x c` with `J_src` of size `c` and `J_tgt` of size `r`.
pub fn pseudoholomorphic_check(
    dmap: &Matrix<RatFn>,
    j_src: &Matrix<RatFn>,
    j_tgt: &Matrix<RatFn>,
) -> Result<bool> {
    let (r, c) = mat_shape(dmap);
    let (sr, sc) = mat_shape(j_src);
    let (tr, tc) = mat_shape(j_tgt);
    if sr != c || sc != c {
        return Err(Error::Dimension(format!(
            "source structure must be {c}x{c} to compose with a {r}x{c} map, got {sr}x{sc}"
        )));
    }
    if tr != r || tc != r {
        return Err(Error::Dimension(format!(
            "target structure must be {r}x{r} to compose with a {r}x{c} map, got {tr}x{tc}"
        )));
    }
    let lhs = mat_mul(dmap, j_src);
    let rhs = mat_mul(j_tgt, dmap);
    Ok(lhs == rhs)
}
