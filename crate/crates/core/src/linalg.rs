//! Exact dense linear algebra over a field (row reduction, null spaces,
//! solvability with a certificate).

use num_rational::BigRational;
use num_traits::Zero;

use crate::poly::{Coeff, QI};

pub trait Field: Coeff {
    fn inverse(&self) -> Option<Self>;
}

impl Field for QI {
    fn inverse(&self) -> Option<Self> {
        self.inv()
    }
}

impl Field for BigRational {
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref<T: Field>(m: &mut [Vec<T>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].inverse().expect("nonzero pivot");
        for x in m[row].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let pivot_row = m[row].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i == row || r[col].is_zero() {
                continue;
            }
            let f = r[col].clone();
            for (x, p) in r.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x = x.clone() - f.clone() * p.clone();
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Basis of `{x : m x = 0}`.
pub fn null_space<T: Field>(m: &[Vec<T>], cols: usize) -> Vec<Vec<T>> {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

pub fn rank<T: Field>(m: &[Vec<T>]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Outcome of `A x = b`.
#[derive(Clone, Debug, PartialEq)]
pub enum Solvability<T> {
    Solvable(Vec<T>),
    /// `y` with `yᵀA = 0` and `yᵀb = 1`.
    Unsolvable(Vec<T>),
}

/// Decide `A x = b` exactly; `a` is row-major with `rows × cols`.
pub fn solve<T: Field>(a: &[Vec<T>], b: &[T], cols: usize) -> Solvability<T> {
    let rows = a.len();
    let mut aug: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(r, v)| {
            let mut r = r.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        // left null vectors of A are the null space of Aᵀ
        let at: Vec<Vec<T>> = (0..cols)
            .map(|c| (0..rows).map(|r| a[r][c].clone()).collect())
            .collect();
        for y in null_space(&at, rows) {
            let yb = y
                .iter()
                .zip(b)
                .fold(T::zero(), |s, (u, v)| s + u.clone() * v.clone());
            if let Some(inv) = yb.inverse() {
                return Solvability::Unsolvable(y.into_iter().map(|u| u * inv.clone()).collect());
            }
        }
        unreachable!("inconsistent system has a separating left null vector");
    }
    let mut x = vec![T::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = aug[r][cols].clone();
    }
    Solvability::Solvable(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| q(x)).collect())
            .collect()
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = mat(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = null_space(&m, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            for r in &m {
                let s = r.iter().zip(&v).fold(q(0), |s, (a, b)| s + a * b);
                assert!(s.is_zero());
            }
        }
        assert_eq!(rank(&m), 1);
    }

    #[test]
    fn solvable_and_certificate() {
        let a = mat(&[&[1, 0], &[0, 1], &[1, 1]]);
        match solve(&a, &[q(1), q(2), q(3)], 2) {
            Solvability::Solvable(x) => assert_eq!(x, vec![q(1), q(2)]),
            other => panic!("{other:?}"),
        }
        match solve(&a, &[q(1), q(2), q(4)], 2) {
            Solvability::Unsolvable(y) => {
                for c in 0..2 {
                    let s = (0..3).fold(q(0), |s, r| s + &y[r] * &a[r][c]);
                    assert!(s.is_zero());
                }
                let yb = y[0].clone() + &y[1] * q(2) + &y[2] * q(4);
                assert_eq!(yb, q(1));
            }
            other => panic!("{other:?}"),
        }
    }
}
