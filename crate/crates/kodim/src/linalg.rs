//! Exact dense matrices over the scalar towers.
//!
//! Everything here is small (dimension at most 6), so the implementations
//! favour clarity over asymptotics: naive products and Gauss-Jordan
//! elimination with first-nonzero pivoting. Exactness of the entry types
//! makes pivot tests decidable.

use crate::scalars::{CoeffFn, RatFn, Scalar};

/// Commutative ring operations, by reference to avoid clone storms.
pub trait Ring: Clone + PartialEq + std::fmt::Debug + std::fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }
}

/// Rings in which every nonzero element is invertible.
pub trait Field: Ring {
    fn inv(&self) -> Option<Self>;
}

impl Ring for Scalar {
    fn zero() -> Self {
        Scalar::zero()
    }
    fn one() -> Self {
        Scalar::one()
    }
    fn add(&self, rhs: &Self) -> Self {
        Scalar::add(self, rhs)
    }
    fn neg(&self) -> Self {
        Scalar::neg(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        Scalar::mul(self, rhs)
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

impl Field for Scalar {
    fn inv(&self) -> Option<Self> {
        Scalar::inv(self).ok()
    }
}

impl Ring for CoeffFn {
    fn zero() -> Self {
        CoeffFn::zero()
    }
    fn one() -> Self {
        CoeffFn::one()
    }
    fn add(&self, rhs: &Self) -> Self {
        CoeffFn::add(self, rhs)
    }
    fn neg(&self) -> Self {
        CoeffFn::neg(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        CoeffFn::mul(self, rhs)
    }
    fn is_zero(&self) -> bool {
        CoeffFn::is_zero(self)
    }
}

impl Ring for RatFn {
    fn zero() -> Self {
        RatFn::zero()
    }
    fn one() -> Self {
        RatFn::one()
    }
    fn add(&self, rhs: &Self) -> Self {
        RatFn::add(self, rhs)
    }
    fn neg(&self) -> Self {
        RatFn::neg(self)
    }
    fn mul(&self, rhs: &Self) -> Self {
        RatFn::mul(self, rhs)
    }
    fn is_zero(&self) -> bool {
        RatFn::is_zero(self)
    }
}

impl Field for RatFn {
    fn inv(&self) -> Option<Self> {
        RatFn::inv(self).ok()
    }
}

/// Row-major rectangular matrix.
pub type Matrix<T> = Vec<Vec<T>>;

pub fn mat_identity<T: Ring>(n: usize) -> Matrix<T> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { T::one() } else { T::zero() })
                .collect()
        })
        .collect()
}

pub fn mat_shape<T>(a: &Matrix<T>) -> (usize, usize) {
    (a.len(), a.first().map_or(0, |r| r.len()))
}

pub fn mat_mul<T: Ring>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let (ra, ca) = mat_shape(a);
    let (rb, cb) = mat_shape(b);
    assert_eq!(ca, rb, "matrix product shape mismatch {ra}x{ca} * {rb}x{cb}");
    (0..ra)
        .map(|i| {
            (0..cb)
                .map(|j| {
                    let mut acc = T::zero();
                    for k in 0..ca {
                        acc = acc.add(&a[i][k].mul(&b[k][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn mat_add<T: Ring>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    assert_eq!(mat_shape(a), mat_shape(b), "matrix sum shape mismatch");
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.add(y)).collect())
        .collect()
}

pub fn mat_neg<T: Ring>(a: &Matrix<T>) -> Matrix<T> {
    a.iter()
        .map(|r| r.iter().map(|x| x.neg()).collect())
        .collect()
}

pub fn mat_sub<T: Ring>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    mat_add(a, &mat_neg(b))
}

pub fn mat_scale<T: Ring>(a: &Matrix<T>, s: &T) -> Matrix<T> {
    a.iter()
        .map(|r| r.iter().map(|x| x.mul(s)).collect())
        .collect()
}

pub fn mat_transpose<T: Clone>(a: &Matrix<T>) -> Matrix<T> {
    let (r, c) = (a.len(), a.first().map_or(0, |row| row.len()));
    (0..c).map(|j| (0..r).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn mat_is_zero<T: Ring>(a: &Matrix<T>) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

pub fn mat_map<T: Clone, U>(a: &Matrix<T>, f: impl Fn(&T) -> U) -> Matrix<U> {
    a.iter().map(|r| r.iter().map(&f).collect()).collect()
}

/// Gauss-Jordan inverse; `None` when singular. Pivot choice is the first
/// row with a nonzero entry, which the exact zero test makes sound.
pub fn mat_invert<T: Field>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let (n, c) = mat_shape(a);
    assert_eq!(n, c, "inverse of a non-square matrix");
    let mut work = a.clone();
    let mut inv = mat_identity::<T>(n);
    for col in 0..n {
        let pivot_row = (col..n).find(|&r| !work[r][col].is_zero())?;
        work.swap(col, pivot_row);
        inv.swap(col, pivot_row);
        let pivot_inv = work[col][col].inv()?;
        for j in 0..n {
            work[col][j] = work[col][j].mul(&pivot_inv);
            inv[col][j] = inv[col][j].mul(&pivot_inv);
        }
        for r in 0..n {
            if r == col || work[r][col].is_zero() {
                continue;
            }
            let factor = work[r][col].clone();
            for j in 0..n {
                work[r][j] = work[r][j].sub(&factor.mul(&work[col][j]));
                inv[r][j] = inv[r][j].sub(&factor.mul(&inv[col][j]));
            }
        }
    }
    Some(inv)
}

/// Determinant by fraction-free expansion along the first row; fine at the
/// sizes used here (at most 6).
pub fn mat_det<T: Ring>(a: &Matrix<T>) -> T {
    let (n, c) = mat_shape(a);
    assert_eq!(n, c, "determinant of a non-square matrix");
    match n {
        0 => T::one(),
        1 => a[0][0].clone(),
        _ => {
            let mut acc = T::zero();
            for j in 0..n {
                if a[0][j].is_zero() {
                    continue;
                }
                let minor: Matrix<T> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, x)| x.clone())
                            .collect()
                    })
                    .collect();
                let term = a[0][j].mul(&mat_det(&minor));
                acc = if j % 2 == 0 {
                    acc.add(&term)
                } else {
                    acc.sub(&term)
                };
            }
            acc
        }
    }
}

/// Leading principal minor of order `k` (determinant of the top-left k by k
/// block).
pub fn leading_principal_minor<T: Ring>(a: &Matrix<T>, k: usize) -> T {
    let block: Matrix<T> = a[..k].iter().map(|row| row[..k].to_vec()).collect();
    mat_det(&block)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn inverse_with_pi_entries() {
        // [[pi, 1], [0, 2]] has inverse [[1/pi, -1/(2 pi)], [0, 1/2]]
        let a = vec![vec![Scalar::pi(), s(1)], vec![s(0), s(2)]];
        let inv = mat_invert(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), mat_identity(2));
        assert_eq!(mat_mul(&inv, &a), mat_identity(2));
        assert_eq!(inv[0][0], Scalar::pi().inv().unwrap());
    }

    #[test]
    fn singular_matrix_is_detected() {
        let a = vec![vec![s(1), s(2)], vec![s(2), s(4)]];
        assert!(mat_invert(&a).is_none());
        assert!(mat_det(&a).is_zero());
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = vec![vec![s(0), s(1)], vec![s(1), s(0)]];
        let inv = mat_invert(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), mat_identity(2));
    }

    #[test]
    fn ratfn_matrix_inverse() {
        use crate::scalars::{CoeffFn, Symbol};
        // [[1, t], [0, t + pi]] over rational functions in t
        let t = RatFn::from(CoeffFn::symbol(Symbol::new("t")));
        let tp = t.add(&RatFn::from(Scalar::pi()));
        let a = vec![
            vec![RatFn::one(), t.clone()],
            vec![RatFn::zero(), tp.clone()],
        ];
        let inv = mat_invert(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), mat_identity(2));
        assert_eq!(inv[1][1], tp.inv().unwrap());
    }

    #[test]
    fn determinant_of_rotation_block() {
        // J = [[0, -1], [1, 0]] has det 1; 4x4 block diagonal has det 1
        let j2 = vec![vec![s(0), s(-1)], vec![s(1), s(0)]];
        assert_eq!(mat_det(&j2), s(1));
        let mut j4 = mat_identity::<Scalar>(4);
        for (i, row) in [(0, 2), (2, 0), (1, 3), (3, 1)] {
            j4[i][row] = if i < row { s(-1) } else { s(1) };
            j4[i][i] = s(0);
        }
        assert_eq!(mat_mul(&j4, &j4), mat_scale(&mat_identity(4), &s(-1)));
        assert_eq!(mat_det(&j4), s(1));
        assert_eq!(leading_principal_minor(&j4, 2), s(0));
    }
}
