//! Numerical cross-check of the section-space dimension.
//!
//! Runs entirely outside the symbolic pipeline: characters are sampled in
//! a finite index box, the compactified non-periodic direction is put on a
//! uniform grid with forward differences and the twisted wrap-around, and
//! kernel vectors are counted through singular values against an absolute
//! threshold.  Forward differences keep the difference symbol injective on
//! the mode circle; a centered stencil would admit spurious near-Nyquist
//! kernels.  The scheme is first order, so the smallest true kernel value
//! scales like (resonant rate)^2 / grid; arithmetic near-resonances closer
//! to zero than the threshold are not distinguishable at a given grid.
//!
//! pi enters as a float here and nowhere else in the crate.

use super::{MExp, SectionEquation};
use crate::error::Error;
use crate::Result;
use crate::scalars::{CoeffFn, Scalar, Symbol};
use nalgebra::{Complex, DMatrix};
use num::{BigRational, ToPrimitive};
use std::f64::consts::PI;
use std::fmt;

type C64 = Complex<f64>;

/// Default absolute singular-value threshold.  Sits below the smallest
/// algebraic gap of the shipped geometries (m/4 at m = 1) with a factor
/// two margin.
pub const DEFAULT_THRESHOLD: f64 = 0.125;

/// Cap on the character box half-width.
const INDEX_CAP: i64 = 8;

/// Largest dense orbit problem attempted.
const DENSE_LIMIT: usize = 4096;

#[derive(Clone, Debug)]
pub struct OracleReport {
    /// Points per compactified direction.
    pub grid: usize,
    /// Character indices ran over `-index_lo ..= index_hi` per direction.
    pub index_lo: i64,
    pub index_hi: i64,
    pub threshold: f64,
    /// Counted kernel dimension.
    pub dim: usize,
    /// Singular values below the threshold, sorted.
    pub kernel_values: Vec<f64>,
    /// Smallest singular value that was not counted.
    pub nearest_miss: Option<f64>,
    /// Characters whose shift orbit left the index box.
    pub dropped_characters: usize,
    pub notes: Vec<String>,
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kernel dimension: {}", self.dim)?;
        writeln!(
            f,
            "grid: {} points, characters -{}..={} per direction, threshold {}",
            self.grid, self.index_lo, self.index_hi, self.threshold
        )?;
        if !self.kernel_values.is_empty() {
            let rendered: Vec<String> = self
                .kernel_values
                .iter()
                .map(|s| format!("{s:.3e}"))
                .collect();
            writeln!(f, "kernel singular values: {}", rendered.join(", "))?;
        }
        if let Some(miss) = self.nearest_miss {
            writeln!(f, "smallest rejected singular value: {miss:.4}")?;
        }
        if self.dropped_characters > 0 {
            writeln!(
                f,
                "dropped characters (shift orbit leaves the box): {}",
                self.dropped_characters
            )?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

fn rat_f64(r: &BigRational) -> Result<f64> {
    r.to_f64()
        .ok_or_else(|| Error::Internal("rational constant overflows f64".into()))
}

fn scalar_c64(s: &Scalar) -> Result<C64> {
    let eval = |coeffs: &[crate::scalars::GaussRational]| -> Result<C64> {
        let mut acc = C64::new(0.0, 0.0);
        let mut pi_pow = 1.0;
        for g in coeffs {
            acc += C64::new(rat_f64(&g.re)?, rat_f64(&g.im)?) * pi_pow;
            pi_pow *= PI;
        }
        Ok(acc)
    };
    let num = eval(s.num().coeffs())?;
    let den = eval(s.den().coeffs())?;
    if den.norm() < 1e-12 {
        return Err(Error::Internal("scalar denominator evaluates to zero".into()));
    }
    Ok(num / den)
}

/// Evaluates a coefficient function of the single symbol `x` (or of no
/// symbol at all) at a grid point.
fn coeff_c64(c: &CoeffFn, x: Option<(Symbol, f64)>) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for (mono, s) in c.terms() {
        let mut factor = 1.0;
        for (sym, e) in mono.pairs() {
            match x {
                Some((xs, xv)) if *sym == xs => factor *= xv.powi(*e as i32),
                _ => {
                    return Err(Error::Internal(format!(
                        "coefficient {c} depends on {} at evaluation time",
                        sym.name()
                    )))
                }
            }
        }
        acc += scalar_c64(s)? * factor;
    }
    Ok(acc)
}

/// One closed shift orbit discretized in the compactified direction.
/// `alg[j][o][r]` is the multiplication part of equation `j` at orbit
/// member `o` and grid point `r`; `n[j]` the constant derivative
/// coefficient; `phases[o]` the wrap phase angle of member `o`.
struct OrbitProblem {
    n: Vec<C64>,
    alg: Vec<Vec<Vec<C64>>>,
    phases: Vec<f64>,
    h: f64,
    grid: usize,
}

impl OrbitProblem {
    fn members(&self) -> usize {
        self.phases.len()
    }

    fn constant_along_x(&self) -> bool {
        self.alg
            .iter()
            .flatten()
            .all(|per_r| per_r.iter().all(|v| (*v - per_r[0]).norm() < 1e-12))
    }

    /// Singular values via the twisted Fourier modes.  Valid when the
    /// orbit is a fixed point and the multiplication part is constant in
    /// x: the problem is then diagonal in the mode basis.
    fn diagonal_sigmas(&self) -> Vec<f64> {
        debug_assert!(self.members() == 1 && self.constant_along_x());
        let r_f = self.grid as f64;
        (0..self.grid)
            .map(|k| {
                let theta = (self.phases[0] + 2.0 * PI * k as f64) / r_f;
                let nu = (C64::from_polar(1.0, theta) - 1.0) * r_f / self.h;
                self.n
                    .iter()
                    .zip(&self.alg)
                    .map(|(n_j, a_j)| (n_j * nu + a_j[0][0]).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// Singular values of the assembled dense forward-difference matrix.
    fn dense_sigmas(&self) -> Result<Vec<f64>> {
        let l = self.members();
        let r = self.grid;
        let cols = l * r;
        if cols > DENSE_LIMIT {
            return Err(Error::Unsupported(format!(
                "orbit problem of size {cols} exceeds the dense oracle limit; \
                 reduce the grid"
            )));
        }
        let n_eq = self.n.len();
        let step = r as f64 / self.h;
        let mut mat = DMatrix::<C64>::zeros(n_eq * cols, cols);
        for (j, n_j) in self.n.iter().enumerate() {
            for o in 0..l {
                for rr in 0..r {
                    let row = (j * l + o) * r + rr;
                    let col = o * r + rr;
                    mat[(row, col)] += self.alg[j][o][rr];
                    if n_j.norm() > 0.0 {
                        mat[(row, col)] -= n_j * step;
                        if rr + 1 < r {
                            mat[(row, col + 1)] += n_j * step;
                        } else {
                            // F_{J_o}(h) = exp(i phase(J_{o-1})) F_{J_{o-1}}(0)
                            let prev = (o + l - 1) % l;
                            let twist = C64::from_polar(1.0, self.phases[prev]);
                            mat[(row, prev * r)] += n_j * step * twist;
                        }
                    }
                }
            }
        }
        Ok(mat.svd(false, false).singular_values.iter().copied().collect())
    }
}

/// Integer action of the lattice shift on character indices, with the
/// constant phase picked up per unit index.
struct IndexAction {
    remap: Vec<Vec<i64>>,
    phase: Vec<f64>,
    h: f64,
}

impl IndexAction {
    fn apply(&self, idx: &[i64]) -> Vec<i64> {
        self.remap
            .iter()
            .map(|row| row.iter().zip(idx).map(|(r, i)| r * i).sum())
            .collect()
    }

    fn phase_angle(&self, idx: &[i64]) -> f64 {
        self.phase.iter().zip(idx).map(|(p, i)| p * *i as f64).sum()
    }
}

fn analyze_shift_numeric(
    eq: &SectionEquation,
    periodic: &[(usize, f64)],
    x: Symbol,
) -> Result<IndexAction> {
    let manifold = eq.manifold();
    let coords = manifold.coords();
    let shifts = manifold.shifts();
    if shifts.len() != 1 {
        return Err(Error::Unsupported(format!(
            "the numerical oracle expects exactly one lattice shift, found {}",
            shifts.len()
        )));
    }
    let shift = &shifts[0];
    let x_idx = manifold.coord_index(x).expect("x is a coordinate");
    let step = shift.map[x_idx]
        .sub(&CoeffFn::symbol(x))
        .as_constant()
        .and_then(|s| s.as_rational())
        .ok_or_else(|| {
            Error::Unsupported(format!(
                "shift {} does not translate {} by a rational constant",
                shift.name,
                x.name()
            ))
        })?;
    let h = rat_f64(&step)?;
    if h == 0.0 {
        return Err(Error::Unsupported(format!(
            "shift {} does not move the {} direction",
            shift.name,
            x.name()
        )));
    }

    let k = periodic.len();
    let mut remap = vec![vec![0i64; k]; k];
    let mut phase = vec![0.0; k];
    for (w, (coord_idx, freq_w)) in periodic.iter().enumerate() {
        let image = &shift.map[*coord_idx];
        let mut rest = image.clone();
        for (l, other) in coords.iter().enumerate() {
            let a = image.derivative(*other).as_constant().ok_or_else(|| {
                Error::Unsupported(format!("shift {} is not affine", shift.name))
            })?;
            if a.is_zero() {
                continue;
            }
            let a_rat = a.as_rational().ok_or_else(|| {
                Error::Unsupported(format!(
                    "shift {} has a non-rational linear part",
                    shift.name
                ))
            })?;
            rest = rest.sub(&CoeffFn::symbol(*other).scale(&Scalar::from_rational(a_rat.clone())));
            match periodic.iter().position(|(ci, _)| *ci == l) {
                Some(lp) => {
                    // New index at lp picks up (freq_w / freq_lp) * a per
                    // unit of index w; must be an integer.
                    let ratio = freq_w / periodic[lp].1;
                    let entry = ratio * rat_f64(&a_rat)?;
                    let rounded = entry.round();
                    if (entry - rounded).abs() > 1e-9 {
                        return Err(Error::Unsupported(format!(
                            "shift {} does not preserve the character lattice",
                            shift.name
                        )));
                    }
                    remap[lp][w] = rounded as i64;
                }
                None => {
                    return Err(Error::Unsupported(format!(
                        "shift {} mixes periodic and non-periodic coordinates",
                        shift.name
                    )))
                }
            }
        }
        let b = rest.as_constant().ok_or_else(|| {
            Error::Unsupported(format!("shift {} is not affine", shift.name))
        })?;
        let b = scalar_c64(&b)?;
        if b.im.abs() > 1e-12 {
            return Err(Error::Unsupported(format!(
                "shift {} has a non-real translation part",
                shift.name
            )));
        }
        phase[w] = freq_w * b.re;
    }
    Ok(IndexAction { remap, phase, h })
}

/// Counts the numerical kernel of the section system.
///
/// `grid` is the number of points per compactified direction; the
/// character box takes the frequency range of a `grid`-point lattice,
/// capped at ±8 per direction.
pub fn oracle_numeric_kernel(
    eq: &SectionEquation,
    grid: usize,
    threshold: f64,
) -> Result<OracleReport> {
    let m = match eq.m() {
        MExp::Concrete(v) => v as f64,
        MExp::Symbolic => {
            return Err(Error::Unsupported(
                "the numerical oracle needs a concrete exponent m".into(),
            ))
        }
    };
    if grid < 4 {
        return Err(Error::Unsupported("oracle grid must be at least 4".into()));
    }
    if !(threshold > 0.0) {
        return Err(Error::Unsupported("oracle threshold must be positive".into()));
    }

    let manifold = eq.manifold();
    let coords = manifold.coords();
    let mut periodic: Vec<(usize, f64)> = Vec::new();
    for (l, c) in coords.iter().enumerate() {
        if let Some(p) = manifold.period_of(*c) {
            periodic.push((l, 2.0 * PI / rat_f64(p)?));
        }
    }
    let x_opt = manifold.nonperiodic_coords().first().copied();
    let action = match x_opt {
        Some(x) => Some(analyze_shift_numeric(eq, &periodic, x)?),
        None => {
            if !manifold.shifts().is_empty() {
                return Err(Error::Unsupported(
                    "lattice shifts without a non-periodic direction are not \
                     handled by the numerical oracle"
                        .into(),
                ));
            }
            None
        }
    };

    // Constant derivative coefficients and the multiplication data.
    let n_eq = eq.xbar_coefficients().len();
    let mut n_consts = vec![C64::new(0.0, 0.0); n_eq];
    if let Some(x) = x_opt {
        let x_idx = manifold.coord_index(x).expect("x is a coordinate");
        for (j, row) in eq.xbar_coefficients().iter().enumerate() {
            let c = row[x_idx].as_constant().ok_or_else(|| {
                Error::Unsupported(format!(
                    "derivative coefficient {} is not constant",
                    row[x_idx]
                ))
            })?;
            n_consts[j] = scalar_c64(&c)?;
        }
    }
    let m_alpha: Vec<C64> = eq
        .connection_coefficients()
        .iter()
        .map(|a| scalar_c64(a).map(|v| v * m))
        .collect::<Result<_>>()?;

    // alg_j(J, x) = sum_w c_jw(x) (i freq_w J_w) + m alpha_j
    let alg_at = |j: usize, idx: &[i64], x: Option<(Symbol, f64)>| -> Result<C64> {
        let row = &eq.xbar_coefficients()[j];
        let mut acc = m_alpha[j];
        for ((ci, freq), i_w) in periodic.iter().zip(idx) {
            if *i_w == 0 {
                continue;
            }
            let c = coeff_c64(&row[*ci], x)?;
            acc += c * C64::new(0.0, freq * *i_w as f64);
        }
        Ok(acc)
    };

    let index_hi = ((grid / 2) as i64).min(INDEX_CAP);
    let index_lo = (((grid - 1) / 2) as i64).min(INDEX_CAP);
    let ranges: Vec<Vec<i64>> = periodic
        .iter()
        .map(|_| (-index_lo..=index_hi).collect())
        .collect();

    let mut dim = 0usize;
    let mut kernel_values = Vec::new();
    let mut nearest_miss: Option<f64> = None;
    let mut dropped = 0usize;
    let mut notes = Vec::new();
    let classify = |sigma: f64, dim: &mut usize, kernel: &mut Vec<f64>, miss: &mut Option<f64>| {
        if sigma < threshold {
            *dim += 1;
            kernel.push(sigma);
        } else if miss.is_none_or(|m| sigma < m) {
            *miss = Some(sigma);
        }
    };

    let mut cursor = vec![0usize; periodic.len()];
    let box_size: usize = ranges.iter().map(Vec::len).product();
    'characters: for _ in 0..box_size {
        let idx: Vec<i64> = cursor.iter().zip(&ranges).map(|(c, r)| r[*c]).collect();
        // Odometer advance for the next round.
        for (c, r) in cursor.iter_mut().zip(&ranges) {
            *c += 1;
            if *c < r.len() {
                break;
            }
            *c = 0;
        }

        let Some(action) = &action else {
            // No compactified direction: the block is a single column.
            let mut sq: f64 = 0.0;
            for j in 0..n_eq {
                sq += alg_at(j, &idx, None)?.norm_sqr();
            }
            classify(sq.sqrt(), &mut dim, &mut kernel_values, &mut nearest_miss);
            continue;
        };

        // Close the shift orbit inside the box.
        let in_box =
            |v: &[i64]| v.iter().all(|i| (-index_lo..=index_hi).contains(i));
        let mut orbit = vec![idx.clone()];
        loop {
            let next = action.apply(orbit.last().expect("nonempty"));
            if next == idx {
                break;
            }
            if !in_box(&next) || orbit.len() > box_size {
                dropped += 1;
                continue 'characters;
            }
            orbit.push(next);
        }
        // Each closed orbit is processed once, at its smallest member.
        if orbit.iter().min() != Some(&idx) {
            continue;
        }

        let x = x_opt.expect("action implies a compactified direction");
        let dx = action.h / grid as f64;
        // Contributing coefficients are the ones paired with a nonzero
        // index; evaluate per grid point only when one of them carries x.
        let x_dependent = orbit.iter().any(|member| {
            eq.xbar_coefficients().iter().any(|row| {
                periodic
                    .iter()
                    .zip(member)
                    .any(|((ci, _), i_w)| *i_w != 0 && row[*ci].contains_symbol(x))
            })
        });
        let mut alg = vec![Vec::with_capacity(orbit.len()); n_eq];
        for member in &orbit {
            for (j, alg_j) in alg.iter_mut().enumerate() {
                let per_r: Vec<C64> = if x_dependent {
                    (0..grid)
                        .map(|r| alg_at(j, member, Some((x, r as f64 * dx))))
                        .collect::<Result<_>>()?
                } else {
                    vec![alg_at(j, member, None)?; grid]
                };
                alg_j.push(per_r);
            }
        }
        let phases: Vec<f64> = orbit.iter().map(|v| action.phase_angle(v)).collect();
        let problem = OrbitProblem {
            n: n_consts.clone(),
            alg,
            phases,
            h: action.h,
            grid,
        };
        let sigmas = if problem.members() == 1 && problem.constant_along_x() {
            problem.diagonal_sigmas()
        } else {
            problem.dense_sigmas()?
        };
        for s in sigmas {
            classify(s, &mut dim, &mut kernel_values, &mut nearest_miss);
        }
    }

    kernel_values.sort_by(|a, b| a.total_cmp(b));
    if let Some(worst) = kernel_values.last() {
        if *worst > threshold / 2.0 {
            notes.push(format!(
                "marginal kernel singular value {worst:.4}; increase the grid to confirm"
            ));
        }
    }
    if let Some(miss) = nearest_miss {
        if miss < 2.0 * threshold {
            notes.push(format!(
                "rejected singular value {miss:.4} is close to the threshold"
            ));
        }
    }

    Ok(OracleReport {
        grid,
        index_lo,
        index_hi,
        threshold,
        dim,
        kernel_values,
        nearest_miss,
        dropped_characters: dropped,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::super::build_section_equation;
    use super::*;
    use crate::acs::AcsData;
    use crate::exterior::testdata::{kodaira_thurston, kt_j, nil_n, nil_n_j, torus4, torus4_j};
    use crate::plurigenera::MExp;

    #[test]
    fn torus_counts_exactly_the_constant_section() {
        let manifold = torus4();
        let acs = AcsData::new(&manifold, torus4_j()).unwrap();
        for m in [1i64, 5, 8] {
            let eq = build_section_equation(&manifold, &acs, MExp::Concrete(m)).unwrap();
            let report = oracle_numeric_kernel(&eq, 8, DEFAULT_THRESHOLD).unwrap();
            assert_eq!(report.dim, 1, "m = {m}");
            assert!(report.kernel_values[0] < 1e-12);
            // Smallest nonzero block norm is pi at the unit characters.
            assert!(report.nearest_miss.unwrap() > 3.0);
            assert_eq!(report.dropped_characters, 0);
        }
    }

    #[test]
    fn kodaira_thurston_resonances_match_the_arithmetic() {
        let manifold = kodaira_thurston();
        let acs = AcsData::new(&manifold, kt_j(&Scalar::zero())).unwrap();
        for (m, expect) in [(1i64, 0), (2, 0), (3, 0), (4, 1), (5, 0), (8, 1)] {
            let eq = build_section_equation(&manifold, &acs, MExp::Concrete(m)).unwrap();
            let report = oracle_numeric_kernel(&eq, 2048, DEFAULT_THRESHOLD).unwrap();
            assert_eq!(report.dim, expect, "m = {m}: {report}");
        }
    }

    #[test]
    fn kodaira_thurston_half_parameter_has_no_kernel_at_small_exponents() {
        let manifold = kodaira_thurston();
        let acs = AcsData::new(&manifold, kt_j(&Scalar::from_ratio(1, 2))).unwrap();
        for m in 1i64..=3 {
            let eq = build_section_equation(&manifold, &acs, MExp::Concrete(m)).unwrap();
            let report = oracle_numeric_kernel(&eq, 2048, DEFAULT_THRESHOLD).unwrap();
            assert_eq!(report.dim, 0, "m = {m}: {report}");
        }
    }

    #[test]
    fn nilmanifold_gap_sits_at_a_quarter_of_the_exponent() {
        let manifold = nil_n();
        let acs = AcsData::new(&manifold, nil_n_j()).unwrap();
        for m in 1i64..=3 {
            let eq = build_section_equation(&manifold, &acs, MExp::Concrete(m)).unwrap();
            let report = oracle_numeric_kernel(&eq, 64, DEFAULT_THRESHOLD).unwrap();
            assert_eq!(report.dim, 0, "m = {m}");
            if m == 1 {
                let miss = report.nearest_miss.unwrap();
                assert!((0.2..0.3).contains(&miss), "{miss}");
            }
        }
        let eq = build_section_equation(&manifold, &acs, MExp::Concrete(0)).unwrap();
        let report = oracle_numeric_kernel(&eq, 64, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(report.dim, 1);
    }

    #[test]
    fn dense_assembly_agrees_with_the_mode_diagonalization() {
        // Synthetic fixed-point orbit with a nontrivial wrap phase.
        let problem = OrbitProblem {
            n: vec![C64::new(0.0, 0.5)],
            alg: vec![vec![vec![C64::new(0.7, 2.9); 48]]],
            phases: vec![0.7],
            h: 1.0,
            grid: 48,
        };
        let mut diag = problem.diagonal_sigmas();
        let mut dense = problem.dense_sigmas().unwrap();
        diag.sort_by(|a, b| a.total_cmp(b));
        dense.sort_by(|a, b| a.total_cmp(b));
        assert_eq!(diag.len(), dense.len());
        for (a, b) in diag.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn symbolic_exponent_is_rejected() {
        let manifold = torus4();
        let acs = AcsData::new(&manifold, torus4_j()).unwrap();
        let eq = build_section_equation(&manifold, &acs, MExp::Symbolic).unwrap();
        assert!(oracle_numeric_kernel(&eq, 8, DEFAULT_THRESHOLD).is_err());
    }
}
