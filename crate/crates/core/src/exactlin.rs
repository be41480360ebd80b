//! Exact linear algebra over ℚ: reduced row-echelon subspaces.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{format_q, Q};

/// Reduces `rows` in place to reduced row-echelon form (pivot = first
/// nonzero column), drops zero rows and returns the pivot columns.
pub fn rref(rows: &mut Vec<Vec<Q>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        if !inv.is_one() {
            for v in rows[r].iter_mut() {
                *v *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// A linear subspace of ℚ^d stored by its canonical RREF basis.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<Q>>,
    pivots: Vec<usize>,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> =
            self.basis.iter().map(|r| r.iter().map(format_q).collect()).collect();
        rows.serialize(s)
    }
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| (0..ambient_dim).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
        Subspace { ambient_dim, basis, pivots: (0..ambient_dim).collect() }
    }

    /// Span of `vectors` in ℚ^ambient_dim.
    pub fn span<I>(ambient_dim: usize, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<Q>>,
    {
        let mut rows = Vec::new();
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, got: v.len() });
            }
            if v.iter().any(|x| !x.is_zero()) {
                rows.push(v);
            }
        }
        let pivots = rref(&mut rows, ambient_dim);
        Ok(Subspace { ambient_dim, basis: rows, pivots })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Q>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, got: d });
        }
        Ok(())
    }

    /// Residual of `v` after eliminating against the basis pivots; zero
    /// exactly when `v` lies in the subspace.
    pub fn reduce(&self, v: &[Q]) -> Result<Vec<Q>> {
        self.check_dim(v.len())?;
        let mut r = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if r[p].is_zero() {
                continue;
            }
            let f = r[p].clone();
            for (x, b) in r.iter_mut().zip(row) {
                if !b.is_zero() {
                    *x -= &f * b;
                }
            }
        }
        Ok(r)
    }

    pub fn contains(&self, v: &[Q]) -> Result<bool> {
        Ok(self.reduce(v)?.iter().all(Zero::is_zero))
    }

    pub fn contains_subspace(&self, other: &Subspace) -> Result<bool> {
        self.check_dim(other.ambient_dim)?;
        for b in &other.basis {
            if !self.contains(b)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_dim(other.ambient_dim)?;
        Subspace::span(self.ambient_dim, self.basis.iter().chain(&other.basis).cloned())
    }

    /// Intersection via the kernel of [B₁ᵀ | −B₂ᵀ].
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_dim(other.ambient_dim)?;
        let (k1, k2) = (self.dim(), other.dim());
        if k1 == 0 || k2 == 0 {
            return Ok(Subspace::zero(self.ambient_dim));
        }
        // columns: coefficients a (k1) then b (k2); rows: ambient coordinates
        let mut m: Vec<Vec<Q>> = (0..self.ambient_dim)
            .map(|j| {
                self.basis
                    .iter()
                    .map(|r| r[j].clone())
                    .chain(other.basis.iter().map(|r| -r[j].clone()))
                    .collect()
            })
            .collect();
        let kernel = kernel(&mut m, k1 + k2);
        let vectors = kernel.into_iter().map(|coef| {
            let mut v = vec![Q::zero(); self.ambient_dim];
            for (a, row) in coef.iter().zip(&self.basis) {
                if a.is_zero() {
                    continue;
                }
                for (x, b) in v.iter_mut().zip(row) {
                    *x += a * b;
                }
            }
            v
        });
        Subspace::span(self.ambient_dim, vectors.collect::<Vec<_>>())
    }
}

/// Basis of the null space of the matrix `m` (rows × ncols).
pub fn kernel(m: &mut Vec<Vec<Q>>, ncols: usize) -> Vec<Vec<Q>> {
    let pivots = rref(m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (row, &p) in m.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Inverse of a square matrix, or `None` when singular.
pub fn inverse(a: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = a.len();
    let mut aug: Vec<Vec<Q>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn rank(a: &[Vec<Q>]) -> usize {
    let ncols = a.first().map_or(0, Vec::len);
    let mut m = a.to_vec();
    rref(&mut m, ncols).len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn v(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn span_examples() {
        let s = Subspace::span(2, vec![v(&[1, 0]), v(&[2, 0])]).unwrap();
        assert_eq!(s.basis(), &[v(&[1, 0])]);
        assert_eq!(Subspace::span(2, vec![]).unwrap().dim(), 0);
        let f = Subspace::span(2, vec![v(&[1, 1]), v(&[1, -1])]).unwrap();
        assert_eq!(f, Subspace::full(2));
        assert!(Subspace::span(2, vec![v(&[1, 2, 3])]).is_err());
    }

    #[test]
    fn membership() {
        let s = Subspace::span(2, vec![v(&[1, 0])]).unwrap();
        assert!(s.contains(&v(&[3, 0])).unwrap());
        assert!(!s.contains(&v(&[0, 1])).unwrap());
        assert!(Subspace::zero(2).contains(&v(&[0, 0])).unwrap());
    }

    #[test]
    fn sum_and_intersection() {
        let e1 = Subspace::span(3, vec![v(&[1, 0, 0])]).unwrap();
        let e2 = Subspace::span(3, vec![v(&[0, 1, 0])]).unwrap();
        assert_eq!(e1.sum(&e2).unwrap().dim(), 2);
        let a = Subspace::span(3, vec![v(&[1, 0, 0]), v(&[0, 1, 0])]).unwrap();
        let b = Subspace::span(3, vec![v(&[0, 1, 0]), v(&[0, 0, 1])]).unwrap();
        assert_eq!(a.intersect(&b).unwrap(), e2);
        assert_eq!(a.intersect(&a).unwrap(), a);
    }

    #[test]
    fn matrix_inverse() {
        let a = vec![v(&[2, 1]), v(&[1, 1])];
        let inv = inverse(&a).unwrap();
        assert_eq!(inv, vec![v(&[1, -1]), v(&[-1, 2])]);
        assert!(inverse(&[v(&[1, 2]), v(&[2, 4])]).is_none());
    }
}
