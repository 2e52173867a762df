//! N-point ensembles on the torus: lifted fields, the bracket-generating
//! rank test, divergence-free bump fields and the two-point separation bound.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::closure::ModeSpanTable;
use crate::error::{check_dim, check_torus_dim, Error, Result};
use crate::scalar::Scalar;
use crate::trigfield::TrigField;

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_signed(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Reduces an angle to `[0, 2 pi)`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Flat torus distance: per-coordinate shortest angle, combined in `l2`.
pub fn torus_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| wrap_signed(a - b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `N` pairwise distinct points of `T^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct EnsembleState {
    dim: usize,
    points: Vec<Vec<f64>>,
}

impl EnsembleState {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points.first().ok_or_else(|| Error::InvalidInput("empty ensemble".into()))?;
        let dim = first.len();
        check_torus_dim(dim)?;
        for p in &points {
            check_dim(dim, p.len())?;
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("non-finite coordinate".into()));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if torus_distance(&points[i], &points[j]) == 0.0 {
                    return Err(Error::CoincidentPoints(i, j));
                }
            }
        }
        Ok(Self { dim, points })
    }

    /// For recorded states, where numerically merged points are still reported.
    pub(crate) fn from_points_unchecked(points: Vec<Vec<f64>>) -> Self {
        Self {
            dim: points[0].len(),
            points,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    /// Concatenated coordinates `(x_1, ..., x_N)`.
    pub fn flat(&self) -> Vec<f64> {
        self.points.concat()
    }

    /// Same points with every coordinate in `[0, 2 pi)`.
    pub fn wrapped(&self) -> Self {
        Self {
            dim: self.dim,
            points: self
                .points
                .iter()
                .map(|p| p.iter().map(|&x| wrap_angle(x)).collect())
                .collect(),
        }
    }

    /// Smallest pairwise torus distance (`inf` for a single point).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min(torus_distance(&self.points[i], &self.points[j]));
            }
        }
        best
    }

    /// Largest torus distance between corresponding points.
    pub fn max_distance_to(&self, other: &Self) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .map(|(p, q)| torus_distance(p, q))
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<Vec<f64>>> for EnsembleState {
    type Error = Error;
    fn try_from(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<EnsembleState> for Vec<Vec<f64>> {
    fn from(e: EnsembleState) -> Self {
        e.points
    }
}

/// `(X(x_1), ..., X(x_N))`.
pub fn lift_eval<S: Scalar>(x: &TrigField<S>, gamma: &EnsembleState) -> Result<Vec<f64>> {
    check_dim(x.dim(), gamma.dim())?;
    Ok(gamma.points().iter().flat_map(|p| x.evaluate(p)).collect())
}

/// Singular values below this fraction of the largest count as zero.
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratingReport {
    pub rank: usize,
    pub ambient: usize,
    pub generating: bool,
}

/// Rank of the evaluations at `gamma` of all basis fields of `table`.
pub fn bracket_generating_test<S: Scalar>(table: &ModeSpanTable<S>, gamma: &EnsembleState) -> Result<GeneratingReport> {
    bracket_generating_test_with(table, gamma, DEFAULT_RANK_THRESHOLD)
}

pub fn bracket_generating_test_with<S: Scalar>(
    table: &ModeSpanTable<S>,
    gamma: &EnsembleState,
    threshold: f64,
) -> Result<GeneratingReport> {
    check_dim(table.dim, gamma.dim())?;
    let rows = gamma.len() * gamma.dim();
    let columns: Vec<Vec<f64>> = table
        .basis_fields()
        .iter()
        .map(|f| lift_eval(f, gamma))
        .collect::<Result<_>>()?;
    let rank = if columns.is_empty() {
        0
    } else {
        let m = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
        let sv = m.singular_values();
        let top = sv.max();
        if top == 0.0 {
            0
        } else {
            sv.iter().filter(|&&s| s > threshold * top).count()
        }
    };
    Ok(GeneratingReport {
        rank,
        ambient: rows,
        generating: rank == rows,
    })
}

/// `e^{-1/t}` for `t > 0`, else `0`, with its first two derivatives.
fn psi(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let v = (-1.0 / t).exp();
    let t2 = t * t;
    (v, v / t2, v * (1.0 / (t2 * t2) - 2.0 / (t2 * t)))
}

/// Smooth step: `1` for `s <= 0`, `0` for `s >= 1`, C-infinity in between.
/// Returns the value and first two derivatives.
fn smooth_step(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let (u, du, ddu) = {
        let (v, dv, ddv) = psi(1.0 - s);
        (v, -dv, ddv)
    };
    let (v, dv, ddv) = psi(s);
    let w = u + v;
    let dw = du + dv;
    let num = du * v - u * dv;
    let first = num / (w * w);
    let dnum = ddu * v - u * ddv;
    let second = (dnum * w - 2.0 * num * dw) / (w * w * w);
    (u / w, first, second)
}

/// Divergence-free field equal to `target` on the ball of radius `r_in` and
/// vanishing outside the ball of radius `r_out`, both around `center`.
///
/// With `y = x - center` and `chi(r) = step(r) / (d - 1)`, the field is the
/// divergence of the antisymmetric matrix `chi(|y|) (a y^T - y a^T)`:
///
/// ```text
/// X(y) = (d - 1) chi a + (chi'(r) / r) (r^2 a - <a, y> y)
/// ```
///
/// so its divergence vanishes identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpField {
    pub dim: usize,
    pub center: Vec<f64>,
    pub r_in: f64,
    pub r_out: f64,
    pub target: Vec<f64>,
}

/// Radial profile: `chi`, `chi'`, `chi''` in `r`.
fn profile(r: f64, r_in: f64, r_out: f64, dim: usize) -> (f64, f64, f64) {
    let width = r_out - r_in;
    let (s0, s1, s2) = smooth_step((r - r_in) / width);
    let k = 1.0 / (dim as f64 - 1.0);
    (k * s0, k * s1 / width, k * s2 / (width * width))
}

pub fn bump_field(target: &[f64], center: &[f64], r_in: f64, r_out: f64) -> Result<BumpField> {
    let dim = target.len();
    check_torus_dim(dim)?;
    check_dim(dim, center.len())?;
    if !(r_in > 0.0 && r_in < r_out && r_out < PI) {
        return Err(Error::InvalidRadii { r_in, r_out });
    }
    Ok(BumpField {
        dim,
        center: center.to_vec(),
        r_in,
        r_out,
        target: target.to_vec(),
    })
}

impl BumpField {
    fn offset(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.center).map(|(a, c)| wrap_signed(a - c)).collect()
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let y = self.offset(x);
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r <= self.r_in {
            return self.target.clone();
        }
        if r >= self.r_out {
            return vec![0.0; self.dim];
        }
        let (chi, dchi, _) = profile(r, self.r_in, self.r_out, self.dim);
        let g = dchi / r;
        let ay: f64 = self.target.iter().zip(&y).map(|(a, b)| a * b).sum();
        let n1 = self.dim as f64 - 1.0;
        (0..self.dim)
            .map(|i| n1 * chi * self.target[i] + g * (r * r * self.target[i] - ay * y[i]))
            .collect()
    }

    /// Closed-form Jacobian `J[i][k] = d X_i / d x_k`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim;
        let y = self.offset(x);
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut jac = vec![vec![0.0; d]; d];
        if r <= self.r_in || r >= self.r_out {
            return jac;
        }
        let (_, dchi, ddchi) = profile(r, self.r_in, self.r_out, d);
        let g = dchi / r;
        let dg = (ddchi * r - dchi) / (r * r);
        let a = &self.target;
        let ay: f64 = a.iter().zip(&y).map(|(p, q)| p * q).sum();
        let n1 = d as f64 - 1.0;
        for i in 0..d {
            for k in 0..d {
                let yk = y[k] / r;
                let delta = if i == k { 1.0 } else { 0.0 };
                jac[i][k] = n1 * dchi * yk * a[i]
                    + dg * yk * (r * r * a[i] - ay * y[i])
                    + g * (2.0 * y[k] * a[i] - a[k] * y[i] - delta * ay);
            }
        }
        jac
    }

    pub fn divergence(&self, x: &[f64]) -> f64 {
        let j = self.jacobian(x);
        (0..self.dim).map(|i| j[i][i]).sum()
    }
}

/// Sum of disjointly supported bumps taking prescribed values at the points of an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolatingField {
    pub dim: usize,
    pub bumps: Vec<BumpField>,
}

impl InterpolatingField {
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for b in &self.bumps {
            for (o, v) in out.iter_mut().zip(b.evaluate(x)) {
                *o += v;
            }
        }
        out
    }

    pub fn divergence(&self, x: &[f64]) -> f64 {
        self.bumps.iter().map(|b| b.divergence(x)).sum()
    }
}

/// Divergence-free field with value `targets[l]` at `gamma[l]`, built from
/// bumps of outer radius `min(sep / 5, 1)` and inner radius half of that.
pub fn interpolating_divfree_field(gamma: &EnsembleState, targets: &[Vec<f64>]) -> Result<InterpolatingField> {
    if targets.len() != gamma.len() {
        return Err(Error::InvalidInput(format!(
            "{} targets for {} points",
            targets.len(),
            gamma.len()
        )));
    }
    let sep = gamma.min_separation();
    let r_out = (sep / 5.0).min(1.0);
    if !(r_out > f64::EPSILON) {
        return Err(Error::SeparationTooSmall(sep));
    }
    let mut bumps = Vec::new();
    for (p, a) in gamma.points().iter().zip(targets) {
        check_dim(gamma.dim(), a.len())?;
        if a.iter().all(|&v| v == 0.0) {
            continue;
        }
        bumps.push(bump_field(a, p, r_out / 2.0, r_out)?);
    }
    Ok(InterpolatingField { dim: gamma.dim(), bumps })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparationBound {
    pub bound: f64,
    pub norm_bound_used: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

/// Lower bound `e^{-T L} d_0` on the torus distance of two points moved by
/// `x' = alpha f(x) + u` over total `|alpha|`-time `T`, where `L` is the
/// certified C^1 bound of `f`.
pub fn separation_bound<S: Scalar>(f: &TrigField<S>, x0: &EnsembleState, t: f64) -> Result<SeparationBound> {
    check_dim(f.dim(), x0.dim())?;
    if x0.len() != 2 {
        return Err(Error::InvalidInput(format!("separation needs 2 points, got {}", x0.len())));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("negative horizon {t}")));
    }
    let d0 = torus_distance(x0.point(0), x0.point(1));
    let norm = f.c1_norm_bound().bound;
    Ok(SeparationBound {
        bound: (-t * norm).exp() * d0,
        norm_bound_used: norm,
        t,
    })
}
