//! Exact row reduction over a [`Scalar`] field.

use num_traits::Zero;

use crate::scalar::Scalar;

/// Rank of a list of row vectors.
pub fn rank<S: Scalar>(rows: &[Vec<S>]) -> usize {
    let mut span = Subspace::new(rows.first().map_or(0, Vec::len));
    for r in rows {
        span.insert(r);
    }
    span.dim()
}

/// Linear subspace of `S^n` stored as a reduced row echelon basis.
///
/// The RREF basis is canonical, so two subspaces are equal iff their
/// bases are equal.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<S> {
    ambient: usize,
    rows: Vec<Vec<S>>,
    pivots: Vec<usize>,
}

impl<S: Scalar> Subspace<S> {
    pub fn new(ambient: usize) -> Self {
        Self {
            ambient,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn spanned_by<'a>(ambient: usize, vectors: impl IntoIterator<Item = &'a Vec<S>>) -> Self {
        let mut s = Self::new(ambient);
        for v in vectors {
            s.insert(v);
        }
        s
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ambient
    }

    pub fn basis(&self) -> &[Vec<S>] {
        &self.rows
    }

    /// Component of `v` outside the span (zero iff `v` is a member).
    pub fn residual(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.ambient, "vector length must match ambient dimension");
        let mut r = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if r[p].is_zero() {
                continue;
            }
            let c = r[p].clone();
            for (x, y) in r.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x = x.clone() - c.clone() * y.clone();
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &[S]) -> bool {
        self.residual(v).iter().all(Zero::is_zero)
    }

    /// Adds `v` to the span. Returns `true` iff the dimension increased.
    pub fn insert(&mut self, v: &[S]) -> bool {
        let mut r = self.residual(v);
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = S::one() / r[p].clone();
        for x in r.iter_mut() {
            if !x.is_zero() {
                *x = x.clone() * inv.clone();
            }
        }
        // eliminate the new pivot column from the existing rows
        for row in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let c = row[p].clone();
            for (x, y) in row.iter_mut().zip(&r) {
                if !y.is_zero() {
                    *x = x.clone() - c.clone() * y.clone();
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.rows.insert(at, r);
        self.pivots.insert(at, p);
        true
    }

    pub fn is_subspace_of(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.rows.iter().all(|r| other.contains(r))
    }

    /// Canonical basis vector `e_i` of the ambient space.
    pub fn unit(ambient: usize, i: usize) -> Vec<S> {
        let mut v = vec![S::zero(); ambient];
        v[i] = S::one();
        v
    }

    pub fn full(ambient: usize) -> Self {
        let mut s = Self::new(ambient);
        for i in 0..ambient {
            s.insert(&Self::unit(ambient, i));
        }
        s
    }

    /// Orthogonal complement with respect to the standard dot product.
    pub fn orthogonal_complement(&self) -> Self {
        let mut out = Self::new(self.ambient);
        for free in (0..self.ambient).filter(|j| !self.pivots.contains(j)) {
            let mut v = Self::unit(self.ambient, free);
            for (row, &p) in self.rows.iter().zip(&self.pivots) {
                v[p] = -row[free].clone();
            }
            out.insert(&v);
        }
        out
    }
}
