//! Integer lattice algebra for mode sets.
//!
//! A [`LatticeSubgroup`] is the subgroup of `Z^d` generated by a finite set
//! of modes. It is stored as an echelon basis in Hermite normal form
//! (basis vectors are the rows of an upper triangular matrix, equivalently
//! the columns of a lower triangular one): pivots are positive, pivot
//! columns strictly increase, and every entry above a pivot is reduced into
//! `[0, pivot)`. All arithmetic is exact.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::{rint, Rational, Scalar};

/// Integer frequency vector `m` in `Z^d`, `d <= 3`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    dim: u8,
    coords: [i64; 3],
}

impl Mode {
    /// # Panics
    /// If `coords` is empty or longer than 3.
    pub fn new(coords: &[i64]) -> Self {
        Self::try_new(coords).expect("modes have 1 to 3 coordinates")
    }

    pub fn try_new(coords: &[i64]) -> Result<Self> {
        if coords.is_empty() || coords.len() > 3 {
            return Err(Error::UnsupportedDimension(coords.len()));
        }
        let mut c = [0; 3];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            dim: coords.len() as u8,
            coords: c,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(&[0, 0, 0][..dim])
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|&c| c == 0)
    }

    /// First nonzero coordinate is positive. The zero mode is canonical.
    pub fn is_canonical(&self) -> bool {
        self.coords()
            .iter()
            .find(|&&c| c != 0)
            .map_or(true, |&c| c > 0)
    }

    /// Representative of `{m, -m}` with positive leading coordinate, and
    /// whether a sign flip was needed.
    pub fn canonical(&self) -> (Self, bool) {
        if self.is_canonical() {
            (*self, false)
        } else {
            (-*self, true)
        }
    }

    pub fn max_abs(&self) -> i64 {
        self.coords().iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn in_box(&self, k: i64) -> bool {
        self.max_abs() <= k
    }

    pub fn norm(&self) -> f64 {
        self.coords()
            .iter()
            .map(|&c| (c * c) as f64)
            .sum::<f64>()
            .sqrt()
    }

    pub fn dot<S: Scalar>(&self, v: &[S]) -> S {
        crate::scalar::dot_int(self.coords(), v)
    }

    /// All modes of the box `[-k, k]^dim`, in lexicographic order.
    pub fn box_modes(dim: usize, k: i64) -> impl Iterator<Item = Mode> {
        let side = (2 * k + 1) as usize;
        let total = side.pow(dim as u32);
        (0..total).map(move |mut idx| {
            let mut c = [0i64; 3];
            for slot in (0..dim).rev() {
                c[slot] = (idx % side) as i64 - k;
                idx /= side;
            }
            Mode::new(&c[..dim])
        })
    }
}

impl std::ops::Add for Mode {
    type Output = Mode;
    fn add(self, o: Mode) -> Mode {
        debug_assert_eq!(self.dim, o.dim);
        let mut c = self.coords;
        for (x, y) in c.iter_mut().zip(o.coords) {
            *x += y;
        }
        Mode { dim: self.dim, coords: c }
    }
}

impl std::ops::Sub for Mode {
    type Output = Mode;
    fn sub(self, o: Mode) -> Mode {
        self + (-o)
    }
}

impl std::ops::Neg for Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        let mut c = self.coords;
        for x in c.iter_mut() {
            *x = -*x;
        }
        Mode { dim: self.dim, coords: c }
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Mode {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d)?;
        Mode::try_new(&v).map_err(serde::de::Error::custom)
    }
}

fn uniform_dim(modes: &[Mode]) -> Result<usize> {
    let dim = modes.first().ok_or(Error::EmptyModeSet)?.dim();
    for m in modes {
        check_dim(dim, m.dim())?;
    }
    Ok(dim)
}

/// `m1 n2 - m2 n1` for planar modes.
pub fn wedge2(m: &Mode, n: &Mode) -> Result<i64> {
    check_dim(2, m.dim())?;
    check_dim(2, n.dim())?;
    let (m, n) = (m.coords(), n.coords());
    Ok(m[0] * n[1] - m[1] * n[0])
}

/// Cross product of two 3-vectors.
pub fn cross3<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    assert!(a.len() == 3 && b.len() == 3, "cross product needs 3-vectors");
    let c = |i: usize, j: usize| a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone();
    vec![c(1, 2), c(2, 0), c(0, 1)]
}

/// Subgroup of `Z^d` generated by a mode set, in Hermite normal form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSubgroup {
    dim: usize,
    basis: Vec<Vec<i64>>,
}

impl LatticeSubgroup {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Index of the subgroup in `Z^d`; `None` when it is infinite.
    pub fn index(&self) -> Option<u64> {
        if self.rank() < self.dim {
            return None;
        }
        Some(
            self.basis
                .iter()
                .enumerate()
                .map(|(i, row)| row[i] as u64)
                .product(),
        )
    }

    pub fn full(dim: usize) -> Self {
        let basis = (0..dim)
            .map(|i| (0..dim).map(|j| i64::from(i == j)).collect())
            .collect();
        Self { dim, basis }
    }

    fn pivot_col(row: &[i64]) -> usize {
        row.iter().position(|&x| x != 0).expect("basis rows are nonzero")
    }

    /// Membership by forward substitution through the echelon basis.
    /// Modes of another dimension are never members.
    pub fn contains(&self, m: &Mode) -> bool {
        if m.dim() != self.dim {
            return false;
        }
        let mut v: Vec<i64> = m.coords().to_vec();
        for row in &self.basis {
            let p = Self::pivot_col(row);
            if v[..p].iter().any(|&x| x != 0) {
                return false;
            }
            if v[p] % row[p] != 0 {
                return false;
            }
            let q = v[p] / row[p];
            for (x, y) in v.iter_mut().zip(row) {
                *x -= q * y;
            }
        }
        v.iter().all(|&x| x == 0)
    }
}

/// Hermite normal form of the row lattice spanned by `rows`.
fn hermite_rows(dim: usize, mut rows: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let mut r = 0;
    for col in 0..dim {
        if r == rows.len() {
            break;
        }
        // Euclid on column `col` among rows r..
        loop {
            let pivot = rows[r..]
                .iter()
                .enumerate()
                .filter(|(_, row)| row[col] != 0)
                .min_by_key(|(_, row)| row[col].abs())
                .map(|(i, _)| i + r);
            let Some(p) = pivot else { break };
            rows.swap(r, p);
            let (head, tail) = rows.split_at_mut(r + 1);
            let prow = &head[r];
            let mut done = true;
            for row in tail.iter_mut() {
                if row[col] == 0 {
                    continue;
                }
                let q = Integer::div_floor(&row[col], &prow[col]);
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= q * y;
                }
                if row[col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[r][col] == 0 {
            continue;
        }
        if rows[r][col] < 0 {
            for x in rows[r].iter_mut() {
                *x = -*x;
            }
        }
        let (head, tail) = rows.split_at_mut(r);
        let prow = &tail[0];
        for row in head.iter_mut() {
            let q = Integer::div_floor(&row[col], &prow[col]);
            if q != 0 {
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= q * y;
                }
            }
        }
        r += 1;
    }
    rows.truncate(r);
    rows
}

pub fn subgroup_generated(modes: &[Mode]) -> Result<LatticeSubgroup> {
    let dim = uniform_dim(modes)?;
    let rows = modes.iter().map(|m| m.coords().to_vec()).collect();
    Ok(LatticeSubgroup {
        dim,
        basis: hermite_rows(dim, rows),
    })
}

pub fn contains(g: &LatticeSubgroup, m: &Mode) -> bool {
    g.contains(m)
}

/// Dual group `{x : <x, y> in Z for all y in G}` of a full rank subgroup.
#[derive(Clone, Debug, PartialEq)]
pub struct DualGroup {
    pub dim: usize,
    /// Columns of the inverse of the generator matrix.
    pub basis: Vec<Vec<Rational>>,
    /// One representative in `[0, 1)^d` per class of `G*/Z^d`.
    pub quotient_reps: Vec<Vec<Rational>>,
}

/// Inverse of an upper triangular integer matrix, exactly.
fn upper_triangular_inverse(a: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    let n = a.len();
    let mut inv = vec![vec![Rational::zero(); n]; n];
    for j in 0..n {
        // solve A x = e_j by back substitution
        for i in (0..n).rev() {
            let mut acc = if i == j { Rational::one() } else { Rational::zero() };
            for k in i + 1..n {
                acc -= rint(a[i][k]) * &inv[k][j];
            }
            inv[i][j] = acc / rint(a[i][i]);
        }
    }
    inv
}

fn frac(x: &Rational) -> Rational {
    x - x.floor()
}

pub fn dual_group(g: &LatticeSubgroup) -> Result<DualGroup> {
    if g.rank() < g.dim {
        return Err(Error::RankDeficient {
            rank: g.rank(),
            dim: g.dim,
        });
    }
    let d = g.dim;
    // G = { z^T A } with A the HNF rows, so G* = A^{-1} Z^d.
    let inv = upper_triangular_inverse(&g.basis);
    let basis: Vec<Vec<Rational>> = (0..d).map(|j| (0..d).map(|i| inv[i][j].clone()).collect()).collect();

    // Z^d / A Z^d has the diagonal box as a residue system.
    let diag: Vec<i64> = (0..d).map(|i| g.basis[i][i]).collect();
    let mut reps = BTreeSet::new();
    let total: i64 = diag.iter().product();
    for mut idx in 0..total {
        let mut k = vec![0i64; d];
        for (slot, &p) in k.iter_mut().zip(&diag) {
            *slot = idx % p;
            idx /= p;
        }
        let x: Vec<Rational> = (0..d)
            .map(|i| frac(&(0..d).fold(Rational::zero(), |acc, j| acc + &inv[i][j] * rint(k[j]))))
            .collect();
        reps.insert(x);
    }
    Ok(DualGroup {
        dim: d,
        basis,
        quotient_reps: reps.into_iter().collect(),
    })
}

/// True iff the gcd of all pairwise wedges is 1, i.e. the modes generate `Z^2`.
/// The gcd of an empty or all-zero wedge set is 0.
pub fn gcd_wedge_criterion(modes: &[Mode]) -> Result<bool> {
    let mut g = 0i64;
    for (i, m) in modes.iter().enumerate() {
        for n in &modes[i + 1..] {
            g = g.gcd(&wedge2(m, n)?);
        }
    }
    if modes.len() == 1 {
        check_dim(2, modes[0].dim())?;
    }
    Ok(g == 1)
}

/// Rank over the rationals of the mode matrix.
pub fn span_dimension(modes: &[Mode]) -> usize {
    let rows: Vec<Vec<Rational>> = modes
        .iter()
        .map(|m| m.coords().iter().map(|&c| rint(c)).collect())
        .collect();
    crate::linalg::rank(&rows)
}

/// Box-truncated fixed point of `I_{k+1} = I_k + { m + n : m, n in I_k, m ^ n != 0 }`,
/// closed under `m -> -m`.
pub fn ik_closure(modes: &[Mode], k: i64) -> Result<BTreeSet<Mode>> {
    let mut set: BTreeSet<Mode> = BTreeSet::new();
    for m in modes {
        check_dim(2, m.dim())?;
        if !m.is_zero() && m.in_box(k) {
            set.insert(*m);
            set.insert(-*m);
        }
    }
    loop {
        let current: Vec<Mode> = set.iter().copied().collect();
        let mut added = Vec::new();
        for (i, m) in current.iter().enumerate() {
            for n in &current[i + 1..] {
                let s = *m + *n;
                if s.in_box(k) && !set.contains(&s) && wedge2(m, n)? != 0 {
                    added.push(s);
                }
            }
        }
        if added.is_empty() {
            return Ok(set);
        }
        for s in added {
            set.insert(s);
            set.insert(-s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn modes(v: &[&[i64]]) -> Vec<Mode> {
        v.iter().map(|c| Mode::new(c)).collect()
    }

    #[test]
    fn wedge_examples() {
        assert_eq!(wedge2(&Mode::new(&[1, 0]), &Mode::new(&[0, 1])).unwrap(), 1);
        assert_eq!(wedge2(&Mode::new(&[1, 2]), &Mode::new(&[2, 1])).unwrap(), -3);
        assert_eq!(wedge2(&Mode::new(&[2, 4]), &Mode::new(&[1, 2])).unwrap(), 0);
        assert!(matches!(
            wedge2(&Mode::new(&[1, 2, 3]), &Mode::new(&[1, 2])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cross_examples() {
        let r = |xs: [i64; 3]| xs.iter().map(|&x| rint(x)).collect::<Vec<_>>();
        assert_eq!(cross3(&r([1, 0, 0]), &r([0, 1, 0])), r([0, 0, 1]));
        assert_eq!(cross3(&r([1, 2, 3]), &r([1, 2, 3])), r([0, 0, 0]));
        assert_eq!(cross3(&r([1, 2, 3]), &r([4, 5, 6])), r([-3, 6, -3]));
    }

    #[test]
    fn canonical_sign() {
        assert!(Mode::new(&[0, 1, -2]).is_canonical());
        assert!(!Mode::new(&[0, -1, 2]).is_canonical());
        assert_eq!(Mode::new(&[-1, 3]).canonical(), (Mode::new(&[1, -3]), true));
        assert!(Mode::zero(3).is_canonical());
    }

    #[test]
    fn subgroup_examples() {
        let g = subgroup_generated(&modes(&[&[1, 0], &[0, 1]])).unwrap();
        assert_eq!(g.index(), Some(1));
        assert_eq!(g, LatticeSubgroup::full(2));

        let g = subgroup_generated(&modes(&[&[2, 1], &[1, 2]])).unwrap();
        assert_eq!(g.rank(), 2);
        assert_eq!(g.index(), Some(3));

        let g = subgroup_generated(&modes(&[&[2, 0], &[4, 0]])).unwrap();
        assert_eq!(g.rank(), 1);
        assert_eq!(g.basis(), &[vec![2, 0]]);
        assert_eq!(g.index(), None);

        assert!(matches!(subgroup_generated(&[]), Err(Error::EmptyModeSet)));
    }

    #[test]
    fn hnf_shape() {
        let g = subgroup_generated(&modes(&[&[3, 5, 1], &[-2, 4, 7], &[6, 1, 1]])).unwrap();
        for (i, row) in g.basis().iter().enumerate() {
            assert!(row[..i].iter().all(|&x| x == 0));
            assert!(row[i] > 0);
            for above in &g.basis()[..i] {
                assert!(above[i] >= 0 && above[i] < row[i]);
            }
        }
        // |det| of the generator matrix
        assert_eq!(g.index(), Some(185));
    }

    #[test]
    fn index_three_confirmed_by_coefficient_search() {
        // (x, y) is an integer combination of (2,1),(1,2) with coefficients
        // in [-6, 6] iff x + y = 0 mod 3, on the small box checked here.
        let g = subgroup_generated(&modes(&[&[2, 1], &[1, 2]])).unwrap();
        for m in Mode::box_modes(2, 3) {
            let mut found = false;
            for a in -6..=6 {
                for b in -6..=6 {
                    if [2 * a + b, a + 2 * b] == [m.coords()[0], m.coords()[1]] {
                        found = true;
                    }
                }
            }
            assert_eq!(g.contains(&m), found, "{m}");
        }
    }

    #[test]
    fn contains_examples() {
        let g = subgroup_generated(&modes(&[&[2, 1], &[1, 2]])).unwrap();
        assert!(!g.contains(&Mode::new(&[1, 0])));
        assert!(g.contains(&Mode::new(&[3, 3])));
        assert!(g.contains(&Mode::new(&[0, 0])));
        let g3 = subgroup_generated(&modes(&[&[2, 0, 0]])).unwrap();
        assert!(g3.contains(&Mode::zero(3)));
        assert!(!g3.contains(&Mode::new(&[0, 0])));
    }

    #[test]
    fn dual_examples() {
        let d = dual_group(&LatticeSubgroup::full(2)).unwrap();
        assert_eq!(d.quotient_reps, vec![vec![rint(0), rint(0)]]);

        let g = subgroup_generated(&modes(&[&[2, 0], &[0, 2]])).unwrap();
        let d = dual_group(&g).unwrap();
        assert_eq!(d.basis, vec![vec![rational(1, 2), rint(0)], vec![rint(0), rational(1, 2)]]);
        assert_eq!(d.quotient_reps.len(), 4);

        let g = subgroup_generated(&modes(&[&[2, 1], &[1, 2]])).unwrap();
        let d = dual_group(&g).unwrap();
        assert_eq!(d.quotient_reps.len(), 3);
        for x in &d.quotient_reps {
            for y in [[2i64, 1], [1, 2]] {
                assert!(Mode::new(&y).dot(x).is_integer());
            }
        }

        let g = subgroup_generated(&modes(&[&[1, 1]])).unwrap();
        assert!(matches!(dual_group(&g), Err(Error::RankDeficient { rank: 1, dim: 2 })));
    }

    #[test]
    fn gcd_criterion_examples() {
        assert!(gcd_wedge_criterion(&modes(&[&[1, 0], &[0, 1]])).unwrap());
        assert!(!gcd_wedge_criterion(&modes(&[&[2, 0], &[0, 2]])).unwrap());
        assert!(!gcd_wedge_criterion(&modes(&[&[1, 2], &[2, 1]])).unwrap());
        assert!(!gcd_wedge_criterion(&modes(&[&[1, 2]])).unwrap());
        assert!(!gcd_wedge_criterion(&[]).unwrap());
    }

    #[test]
    fn span_dimension_examples() {
        assert_eq!(span_dimension(&modes(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])), 3);
        assert_eq!(span_dimension(&modes(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(span_dimension(&[]), 0);
    }

    #[test]
    fn ik_closure_examples() {
        let full = ik_closure(&modes(&[&[1, 0], &[0, 1]]), 2).unwrap();
        let expected: BTreeSet<Mode> = Mode::box_modes(2, 2).filter(|m| !m.is_zero()).collect();
        assert_eq!(full, expected);

        let line = ik_closure(&modes(&[&[1, 0], &[2, 0]]), 4).unwrap();
        let expected: BTreeSet<Mode> = modes(&[&[1, 0], &[-1, 0], &[2, 0], &[-2, 0]]).into_iter().collect();
        assert_eq!(line, expected);

        let gens = modes(&[&[2, 1], &[1, 2]]);
        let g = subgroup_generated(&gens).unwrap();
        let got = ik_closure(&gens, 3).unwrap();
        let expected: BTreeSet<Mode> = Mode::box_modes(2, 3).filter(|m| !m.is_zero() && g.contains(m)).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn box_enumeration_order() {
        let v: Vec<Mode> = Mode::box_modes(2, 1).collect();
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], Mode::new(&[-1, -1]));
        assert_eq!(v[8], Mode::new(&[1, 1]));
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
}
