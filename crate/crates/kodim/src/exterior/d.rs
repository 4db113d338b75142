//! Exterior derivative and its four bidegree components.

use super::form::{BasisKind, ComplexBasis, Form};
use crate::scalars::CoeffFn;
use crate::{Error, Result};
use std::collections::BTreeMap;

impl Form {
    /// Exterior derivative. Coordinate-backed manifolds compute it through
    /// coordinate differentials, so d∘d = 0 holds by construction;
    /// structure-backed manifolds expand the declared d(e^i) under the
    /// graded Leibniz rule (constant coefficients required).
    pub fn d(&self) -> Result<Form> {
        match self.kind() {
            BasisKind::Complex { .. } => Err(Error::Unsupported(
                "express the form over the real frame before differentiating \
                 (ComplexBasis::to_frame)"
                    .into(),
            )),
            BasisKind::Frame if self.manifold().is_structure_backend() => self.d_structure(),
            BasisKind::Coord if self.manifold().is_structure_backend() => {
                Err(Error::Unsupported(
                    "structure-backed manifolds have no coordinate differentials".into(),
                ))
            }
            BasisKind::Frame | BasisKind::Coord => self.d_coordinate(),
        }
    }

    fn d_coordinate(&self) -> Result<Form> {
        let m = self.manifold();
        let a = self.to_coord_basis()?;
        let mut out: Vec<(u32, CoeffFn)> = Vec::new();
        for (mask, f) in a.terms() {
            for (j, coord) in m.coords().iter().enumerate() {
                if mask & (1u32 << j) != 0 {
                    continue;
                }
                let df = f.derivative(*coord);
                if df.is_zero() {
                    continue;
                }
                let signed = if lower_bits_below(mask, j) % 2 == 1 {
                    df.neg()
                } else {
                    df
                };
                out.push((mask | (1u32 << j), signed));
            }
        }
        let d_coord = Form::from_terms(m, BasisKind::Coord, out)?;
        match self.kind() {
            BasisKind::Frame => d_coord.to_frame_basis(),
            _ => Ok(d_coord),
        }
    }

    fn d_structure(&self) -> Result<Form> {
        let m = self.manifold();
        let mut out = Form::zero(m, BasisKind::Frame);
        for (mask, c) in self.terms() {
            if !c.is_constant() {
                return Err(Error::Unsupported(format!(
                    "manifold `{}` carries structure equations only; the \
                     coefficient {c} is not constant",
                    m.name()
                )));
            }
            // d(e^{i_1}∧…∧e^{i_k}) = sum_r (-1)^{r-1} d(e^{i_r}) ∧ (rest);
            // the 2-form d(e^{i_r}) commutes past the leading 1-forms.
            let mut position = 0u32;
            for i in 0..m.dim() {
                if mask & (1u32 << i) == 0 {
                    continue;
                }
                let de_i = Form::from_terms(
                    m,
                    BasisKind::Frame,
                    m.d_coframe_terms(i)?
                        .iter()
                        .map(|(w, s)| (*w, CoeffFn::from(s.clone()))),
                )?;
                let rest = Form::from_terms(
                    m,
                    BasisKind::Frame,
                    [(mask & !(1u32 << i), CoeffFn::one())],
                )?;
                let mut piece = de_i.wedge(&rest)?.scale_fn(c);
                if position % 2 == 1 {
                    piece = piece.neg();
                }
                out = out.add(&piece)?;
                position += 1;
            }
        }
        Ok(out)
    }
}

/// Number of set bits of `mask` strictly below bit `j`.
fn lower_bits_below(mask: u32, j: usize) -> u32 {
    (mask & ((1u32 << j) - 1)).count_ones()
}

/// Splits a form into its (p,q) components relative to the given complex
/// coframe. Components sum back to the input exactly.
pub fn bidegree_split(
    a: &Form,
    basis: &ComplexBasis,
) -> Result<BTreeMap<(usize, usize), Form>> {
    let ac = basis.to_complex(a)?;
    let n = basis.manifold().n() as u32;
    let low = (1u32 << n) - 1;
    let mut buckets: BTreeMap<(usize, usize), Vec<(u32, CoeffFn)>> = BTreeMap::new();
    for (mask, coeff) in ac.terms() {
        let p = (mask & low).count_ones() as usize;
        let q = (mask >> n).count_ones() as usize;
        buckets.entry((p, q)).or_default().push((mask, coeff.clone()));
    }
    buckets
        .into_iter()
        .map(|(pq, entries)| Ok((pq, Form::from_terms(basis.manifold(), basis.kind(), entries)?)))
        .collect()
}

fn d_component(a: &Form, basis: &ComplexBasis, dp: i64, dq: i64) -> Result<Form> {
    if a.is_zero() {
        return Ok(Form::zero(basis.manifold(), basis.kind()));
    }
    let ac = basis.to_complex(a)?;
    let (p, q) = ac.bidegree().ok_or_else(|| {
        Error::Dimension(
            "the form mixes bidegrees; apply bidegree_split and feed the \
             components separately"
                .into(),
        )
    })?;
    let da = basis.to_frame(&ac)?.d()?;
    let target = (p as i64 + dp, q as i64 + dq);
    let n = basis.manifold().n() as i64;
    if target.0 < 0 || target.1 < 0 || target.0 > n || target.1 > n {
        return Ok(Form::zero(basis.manifold(), basis.kind()));
    }
    let split = bidegree_split(&da, basis)?;
    Ok(split
        .get(&(target.0 as usize, target.1 as usize))
        .cloned()
        .unwrap_or_else(|| Form::zero(basis.manifold(), basis.kind())))
}

/// (p,q) → (p+2, q−1) component of d.
pub fn mu(a: &Form, basis: &ComplexBasis) -> Result<Form> {
    d_component(a, basis, 2, -1)
}

/// (p,q) → (p+1, q) component of d.
pub fn del(a: &Form, basis: &ComplexBasis) -> Result<Form> {
    d_component(a, basis, 1, 0)
}

/// (p,q) → (p, q+1) component of d.
pub fn delbar(a: &Form, basis: &ComplexBasis) -> Result<Form> {
    d_component(a, basis, 0, 1)
}

/// (p,q) → (p−1, q+2) component of d.
pub fn mubar(a: &Form, basis: &ComplexBasis) -> Result<Form> {
    d_component(a, basis, -1, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::testdata;
    use crate::scalars::{parse_coeff_fn, Scalar};

    #[test]
    fn structure_equations_of_the_nilmanifold() {
        let m = testdata::nil_n();
        let e = |k: usize| Form::basis_covector(&m, BasisKind::Frame, k);
        assert!(e(0).d().unwrap().is_zero());
        assert!(e(1).d().unwrap().is_zero());
        // d(dz - x dy) = -dx∧dy = -e1∧e2
        let de3 = e(2).d().unwrap();
        let expected = e(0).wedge(&e(1)).unwrap().neg();
        assert_eq!(de3, expected);
        // d(dt + x^2/2 dy - x dz) = x dx∧dy - dx∧dz = -e1∧e3
        let de4 = e(3).d().unwrap();
        let expected = e(0).wedge(&e(2)).unwrap().neg();
        assert_eq!(de4, expected);
    }

    #[test]
    fn flat_torus_coframe_is_closed() {
        let m = testdata::torus4();
        for k in 0..4 {
            let e = Form::basis_covector(&m, BasisKind::Frame, k);
            assert!(e.d().unwrap().is_zero());
        }
    }

    #[test]
    fn wedge_signs() {
        let m = testdata::nil_n();
        let e = |k: usize| Form::basis_covector(&m, BasisKind::Frame, k);
        assert!(e(0).wedge(&e(0)).unwrap().is_zero());
        let ab = e(0).wedge(&e(1)).unwrap();
        let ba = e(1).wedge(&e(0)).unwrap();
        assert_eq!(ab, ba.neg());
        // moving a 1-form past a 2-form is an even permutation
        let two = e(0).wedge(&e(1)).unwrap();
        assert_eq!(two.wedge(&e(2)).unwrap(), e(2).wedge(&two).unwrap());
    }

    #[test]
    fn d_squares_to_zero_with_polynomial_coefficients() {
        let m = testdata::nil_n();
        let coords = m.coords().iter().copied().collect();
        let f = parse_coeff_fn("x^2*y - 3*z*t + x", &coords).unwrap();
        let form = Form::function(&m, BasisKind::Frame, f)
            .wedge(&Form::basis_covector(&m, BasisKind::Frame, 2))
            .unwrap();
        let dd = form.d().unwrap().d().unwrap();
        assert!(dd.is_zero(), "d(d(omega)) = {dd}");
    }

    #[test]
    fn nilmanifold_bidegree_components_match_known_splitting() {
        let m = testdata::nil_n();
        let basis = testdata::nil_n_complex_basis(&m);
        let phi1 = basis.phi(0);
        let phi2 = basis.phi(1);

        // delbar(phi1) = -1/4 i phi1∧phibar2 + 1/4 i phi2∧phibar1
        let quarter_i = Scalar::i().mul(&Scalar::from_ratio(1, 4));
        let expected_db1 = basis
            .phi(0)
            .wedge(&basis.phibar(1))
            .unwrap()
            .scale(&quarter_i.neg())
            .add(
                &basis
                    .phi(1)
                    .wedge(&basis.phibar(0))
                    .unwrap()
                    .scale(&quarter_i),
            )
            .unwrap();
        assert_eq!(delbar(&phi1, &basis).unwrap(), expected_db1);

        // delbar(phi2) = 1/2 phi1∧phibar1
        let expected_db2 = basis
            .phi(0)
            .wedge(&basis.phibar(0))
            .unwrap()
            .scale(&Scalar::from_ratio(1, 2));
        assert_eq!(delbar(&phi2, &basis).unwrap(), expected_db2);

        // mubar(phi1) = -1/4 i phibar1∧phibar2 (nonzero: not integrable)
        let expected_mb1 = basis
            .phibar(0)
            .wedge(&basis.phibar(1))
            .unwrap()
            .scale(&quarter_i.neg());
        assert_eq!(mubar(&phi1, &basis).unwrap(), expected_mb1);
        assert!(mubar(&phi2, &basis).unwrap().is_zero());

        // the four components reassemble d
        let d_frame = basis.to_frame(&phi1).unwrap().d().unwrap();
        let total = mu(&phi1, &basis)
            .unwrap()
            .add(&del(&phi1, &basis).unwrap())
            .unwrap()
            .add(&delbar(&phi1, &basis).unwrap())
            .unwrap()
            .add(&mubar(&phi1, &basis).unwrap())
            .unwrap();
        assert_eq!(basis.to_frame(&total).unwrap(), d_frame);
    }

    #[test]
    fn split_components_sum_to_input() {
        let m = testdata::nil_n();
        let basis = testdata::nil_n_complex_basis(&m);
        let e = |k: usize| Form::basis_covector(&m, BasisKind::Frame, k);
        let a = e(0)
            .wedge(&e(1))
            .unwrap()
            .add(&e(2).wedge(&e(3)).unwrap().scale(&Scalar::pi()))
            .unwrap();
        let split = bidegree_split(&a, &basis).unwrap();
        let mut sum = Form::zero(&m, basis.kind());
        for part in split.values() {
            sum = sum.add(part).unwrap();
        }
        assert_eq!(basis.to_frame(&sum).unwrap(), a);
    }

    #[test]
    fn conjugation_is_an_involution_on_complex_forms() {
        let m = testdata::nil_n();
        let basis = testdata::nil_n_complex_basis(&m);
        let a = basis
            .phi(0)
            .wedge(&basis.phibar(1))
            .unwrap()
            .scale(&Scalar::i())
            .add(&basis.phi(1).wedge(&basis.phi(0)).unwrap())
            .unwrap();
        assert_eq!(a.conjugate().conjugate(), a);
        // conjugation must commute with the change of basis
        let through_frame = basis.to_complex(&basis.to_frame(&a).unwrap().conjugate()).unwrap();
        assert_eq!(through_frame, a.conjugate());
    }

    #[test]
    fn nakamura_structure_backend_differentiates() {
        let m = testdata::nakamura();
        let e = |k: usize| Form::basis_covector(&m, BasisKind::Frame, k);
        // d(e3) = e1∧e3 - e2∧e4
        let de3 = e(2).d().unwrap();
        let expected = e(0)
            .wedge(&e(2))
            .unwrap()
            .sub(&e(1).wedge(&e(3)).unwrap())
            .unwrap();
        assert_eq!(de3, expected);
        // Leibniz on a product of coframe elements
        let a = e(2).wedge(&e(3)).unwrap();
        let da = a.d().unwrap();
        let leibniz = e(2)
            .d()
            .unwrap()
            .wedge(&e(3))
            .unwrap()
            .sub(&e(2).wedge(&e(3).d().unwrap()).unwrap())
            .unwrap();
        assert_eq!(da, leibniz);
    }

    #[test]
    fn kodaira_thurston_structure_equation() {
        let m = testdata::kodaira_thurston();
        let e = |k: usize| Form::basis_covector(&m, BasisKind::Frame, k);
        // e4 = dz - x dy, so d(e4) = -dx∧dy = -e2∧e3
        let de4 = e(3).d().unwrap();
        assert_eq!(de4, e(1).wedge(&e(2)).unwrap().neg());
        for k in 0..3 {
            assert!(e(k).d().unwrap().is_zero());
        }
    }
}
