//! Numerical flows of `x' = alpha(t) f(x) + u(t)` for piecewise constant
//! controls, with the variational equation and the checks built on them.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::ensemble::{torus_distance, wrap_angle, EnsembleState};
use crate::error::{check_dim, Error, Result};
use crate::scalar::{Real, Scalar};
use crate::trigfield::TrigField;

fn default_alpha() -> f64 {
    1.0
}

/// Constant control on one time interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(rename = "dt")]
    pub duration: f64,
    pub u: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

/// Piecewise constant `(alpha, u)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    pub segments: Vec<Segment>,
}

impl ControlSignal {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let c = Self { segments };
        c.validate(None)?;
        Ok(c)
    }

    /// Single segment with `alpha = 1`.
    pub fn constant(duration: f64, u: Vec<f64>) -> Result<Self> {
        Self::new(vec![Segment { duration, u, alpha: 1.0 }])
    }

    pub fn validate(&self, dim: Option<usize>) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::InvalidControl("no segments".into()));
        }
        let d = dim.unwrap_or(self.segments[0].u.len());
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration > 0.0 && s.duration.is_finite()) {
                return Err(Error::InvalidControl(format!("segment {i}: duration {} is not positive", s.duration)));
            }
            if s.u.len() != d {
                return Err(Error::InvalidControl(format!("segment {i}: u has {} components, expected {d}", s.u.len())));
            }
            if !s.alpha.is_finite() || s.u.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidControl(format!("segment {i}: non-finite value")));
            }
        }
        Ok(())
    }

    pub fn total_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// `int |alpha|`, the time over which the drift actually acts.
    pub fn drift_time(&self) -> f64 {
        self.segments.iter().map(|s| s.duration * s.alpha.abs()).sum()
    }

    /// `theta(T) = int u`.
    pub fn total_translation(&self) -> Vec<f64> {
        let d = self.segments[0].u.len();
        let mut th = vec![0.0; d];
        for s in &self.segments {
            for (t, u) in th.iter_mut().zip(&s.u) {
                *t += u * s.duration;
            }
        }
        th
    }
}

/// Field compiled to a flat floating point form for repeated evaluation.
#[derive(Clone, Debug)]
pub struct FieldEvaluator<T> {
    dim: usize,
    constant: Vec<T>,
    modes: Vec<Vec<T>>,
    a: Vec<Vec<T>>,
    b: Vec<Vec<T>>,
}

impl<T: Real> FieldEvaluator<T> {
    pub fn new<S: Scalar>(f: &TrigField<S>) -> Self {
        let lit = |x: &S| T::lit(x.to_f64_lossy());
        let mut modes = Vec::new();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (m, p) in f.terms() {
            modes.push(m.coords().iter().map(|&k| T::lit(k as f64)).collect());
            a.push(p.a.iter().map(lit).collect());
            b.push(p.b.iter().map(lit).collect());
        }
        Self {
            dim: f.dim(),
            constant: f.constant().iter().map(lit).collect(),
            modes,
            a,
            b,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn phase(&self, k: usize, x: &[T]) -> T {
        self.modes[k].iter().zip(x).fold(T::zero(), |acc, (&m, &xi)| acc + m * xi)
    }

    /// `out = scale * f(x + shift) + add`.
    pub fn eval_into(&self, x: &[T], shift: Option<&[T]>, scale: T, add: &[T], out: &mut [T]) {
        let mut xs = [T::zero(); 3];
        for i in 0..self.dim {
            xs[i] = x[i] + shift.map_or(T::zero(), |s| s[i]);
        }
        let mut acc = [T::zero(); 3];
        acc[..self.dim].copy_from_slice(&self.constant);
        for k in 0..self.modes.len() {
            let (s, c) = self.phase(k, &xs[..self.dim]).sin_cos();
            for i in 0..self.dim {
                acc[i] = acc[i] + self.a[k][i] * c + self.b[k][i] * s;
            }
        }
        for i in 0..self.dim {
            out[i] = scale * acc[i] + add[i];
        }
    }

    pub fn evaluate(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        self.eval_into(x, None, T::one(), &vec![T::zero(); self.dim], &mut out);
        out
    }

    /// Row-major Jacobian `J[i * d + j] = d f_i / d x_j`.
    pub fn jacobian_into(&self, x: &[T], out: &mut [T]) {
        let d = self.dim;
        out[..d * d].iter_mut().for_each(|v| *v = T::zero());
        for k in 0..self.modes.len() {
            let (s, c) = self.phase(k, x).sin_cos();
            for i in 0..d {
                let v = self.b[k][i] * c - self.a[k][i] * s;
                for j in 0..d {
                    out[i * d + j] = out[i * d + j] + v * self.modes[k][j];
                }
            }
        }
    }
}

/// Recorded states of an ensemble, and optionally the Jacobians of the flow at each point.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<EnsembleState>,
    /// `jacobians[k][j]`: Jacobian of the flow at time `times[k]` for point `j`.
    pub jacobians: Option<Vec<Vec<DMatrix<f64>>>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &EnsembleState {
        self.states.last().expect("trajectories record the initial state")
    }

    /// Smallest pairwise distance over all recorded states.
    pub fn min_separation(&self) -> f64 {
        self.states.iter().map(EnsembleState::min_separation).fold(f64::INFINITY, f64::min)
    }
}

fn steps_for(duration: f64, dt: f64) -> usize {
    ((duration / dt) - 1e-9).ceil().max(1.0) as usize
}

/// One RK4 step of `y' = alpha f(y + theta(t)) + v` for a single point, where
/// `theta` is affine in `t` with slope `w` (`None` means no shift).
#[allow(clippy::too_many_arguments)]
fn rk4_point<T: Real>(ev: &FieldEvaluator<T>, y: &mut [T], h: T, alpha: T, v: &[T], theta0: Option<&[T]>, w: &[T]) {
    let d = ev.dim;
    let half = T::lit(0.5);
    let mut shift = [T::zero(); 3];
    let at = |frac: T, shift: &mut [T; 3]| -> Option<[T; 3]> {
        theta0.map(|t0| {
            for i in 0..d {
                shift[i] = t0[i] + w[i] * frac * h;
            }
            *shift
        })
    };
    let mut k = [[T::zero(); 3]; 4];
    let mut tmp = [T::zero(); 3];
    let s0 = at(T::zero(), &mut shift);
    ev.eval_into(y, s0.as_ref().map(|s| &s[..d]), alpha, v, &mut k[0]);
    let sh = at(half, &mut shift);
    for i in 0..d {
        tmp[i] = y[i] + half * h * k[0][i];
    }
    ev.eval_into(&tmp[..d], sh.as_ref().map(|s| &s[..d]), alpha, v, &mut k[1]);
    for i in 0..d {
        tmp[i] = y[i] + half * h * k[1][i];
    }
    ev.eval_into(&tmp[..d], sh.as_ref().map(|s| &s[..d]), alpha, v, &mut k[2]);
    let s1 = at(T::one(), &mut shift);
    for i in 0..d {
        tmp[i] = y[i] + h * k[2][i];
    }
    ev.eval_into(&tmp[..d], s1.as_ref().map(|s| &s[..d]), alpha, v, &mut k[3]);
    let sixth = h / T::lit(6.0);
    for i in 0..d {
        y[i] = y[i] + sixth * (k[0][i] + T::lit(2.0) * (k[1][i] + k[2][i]) + k[3][i]);
    }
}

/// Endpoint of the flow without recording, in precision `T`. Coordinates are not wrapped.
pub fn flow_endpoint<T: Real>(ev: &FieldEvaluator<T>, ctrl: &ControlSignal, x0: &[Vec<f64>], dt: f64) -> Vec<Vec<T>> {
    let mut pts: Vec<Vec<T>> = x0.iter().map(|p| p.iter().map(|&v| T::lit(v)).collect()).collect();
    let zeros = vec![T::zero(); ev.dim];
    for seg in &ctrl.segments {
        let n = steps_for(seg.duration, dt);
        let h = T::lit(seg.duration / n as f64);
        let u: Vec<T> = seg.u.iter().map(|&v| T::lit(v)).collect();
        let alpha = T::lit(seg.alpha);
        for p in pts.iter_mut() {
            for _ in 0..n {
                rk4_point(ev, p, h, alpha, &u, None, &zeros);
            }
        }
    }
    pts
}

fn record(points: &[Vec<f64>]) -> EnsembleState {
    EnsembleState::new(points.iter().map(|p| p.iter().map(|&v| wrap_angle(v)).collect()).collect())
        .unwrap_or_else(|_| EnsembleState::from_points_unchecked(points.to_vec()))
}

/// Fixed-step RK4 of `x' = alpha f(x) + u` with segment boundaries on step
/// boundaries. Every step is recorded, with coordinates reduced to `[0, 2 pi)`.
pub fn integrate_flow<S: Scalar>(f: &TrigField<S>, ctrl: &ControlSignal, x0: &EnsembleState, dt: f64) -> Result<Trajectory> {
    integrate_flow_in::<f64, S>(f, ctrl, x0, dt)
}

/// [`integrate_flow`] carried out in precision `T`.
pub fn integrate_flow_in<T: Real, S: Scalar>(f: &TrigField<S>, ctrl: &ControlSignal, x0: &EnsembleState, dt: f64) -> Result<Trajectory> {
    check_dim(f.dim(), x0.dim())?;
    ctrl.validate(Some(f.dim()))?;
    check_step(dt)?;
    let ev = FieldEvaluator::<T>::new(f);
    let zeros = vec![T::zero(); f.dim()];
    let mut pts: Vec<Vec<T>> = x0.points().iter().map(|p| p.iter().map(|&v| T::lit(v)).collect()).collect();
    let to_f64 = |pts: &[Vec<T>]| -> Vec<Vec<f64>> { pts.iter().map(|p| p.iter().map(|v| v.to_f64().unwrap()).collect()).collect() };
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![record(&to_f64(&pts))];
    for seg in &ctrl.segments {
        let n = steps_for(seg.duration, dt);
        let h = seg.duration / n as f64;
        let u: Vec<T> = seg.u.iter().map(|&v| T::lit(v)).collect();
        for k in 1..=n {
            for p in pts.iter_mut() {
                rk4_point(&ev, p, T::lit(h), T::lit(seg.alpha), &u, None, &zeros);
            }
            times.push(t + h * k as f64);
            states.push(record(&to_f64(&pts)));
        }
        t += seg.duration;
    }
    Ok(Trajectory {
        times,
        states,
        jacobians: None,
    })
}

fn check_step(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("step {dt} is not positive")))
    }
}

/// Flow and its Jacobian, integrating `J' = alpha Df(x) J` alongside `x`
/// with the same RK4 stages. Returns a trajectory with `jacobians` set.
pub fn variational_flow<S: Scalar>(f: &TrigField<S>, ctrl: &ControlSignal, x0: &EnsembleState, dt: f64) -> Result<Trajectory> {
    check_dim(f.dim(), x0.dim())?;
    ctrl.validate(Some(f.dim()))?;
    check_step(dt)?;
    let d = f.dim();
    let ev = FieldEvaluator::<f64>::new(f);
    let mut xs: Vec<Vec<f64>> = x0.points().to_vec();
    let mut js: Vec<Vec<f64>> = vec![DMatrix::<f64>::identity(d, d).as_slice().to_vec(); x0.len()];
    let pack = |js: &[Vec<f64>]| -> Vec<DMatrix<f64>> { js.iter().map(|j| DMatrix::from_row_slice(d, d, j)).collect() };

    // state z = (x, J row-major); z' = (alpha f(x) + u, alpha Df(x) J)
    let rhs = |z: &[f64], alpha: f64, u: &[f64], out: &mut [f64]| {
        let mut df = [0.0; 9];
        ev.eval_into(&z[..d], None, alpha, u, &mut out[..d]);
        ev.jacobian_into(&z[..d], &mut df);
        let jm = &z[d..];
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for k in 0..d {
                    s += df[i * d + k] * jm[k * d + j];
                }
                out[d + i * d + j] = alpha * s;
            }
        }
    };

    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut states = vec![record(&xs)];
    let mut jacs = vec![pack(&js)];
    let len = d + d * d;
    for seg in &ctrl.segments {
        let n = steps_for(seg.duration, dt);
        let h = seg.duration / n as f64;
        for step in 1..=n {
            for (x, jm) in xs.iter_mut().zip(js.iter_mut()) {
                let z: Vec<f64> = x.iter().chain(jm.iter()).copied().collect();
                let mut k1 = vec![0.0; len];
                let mut k2 = vec![0.0; len];
                let mut k3 = vec![0.0; len];
                let mut k4 = vec![0.0; len];
                rhs(&z, seg.alpha, &seg.u, &mut k1);
                let z2: Vec<f64> = z.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
                rhs(&z2, seg.alpha, &seg.u, &mut k2);
                let z3: Vec<f64> = z.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
                rhs(&z3, seg.alpha, &seg.u, &mut k3);
                let z4: Vec<f64> = z.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
                rhs(&z4, seg.alpha, &seg.u, &mut k4);
                for i in 0..len {
                    let v = z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                    if i < d {
                        x[i] = v;
                    } else {
                        jm[i - d] = v;
                    }
                }
            }
            times.push(t + h * step as f64);
            states.push(record(&xs));
            jacs.push(pack(&js));
        }
        t += seg.duration;
    }
    Ok(Trajectory {
        times,
        states,
        jacobians: Some(jacs),
    })
}

/// Jacobian of the flow at every recorded time, for each point of `x0`.
pub fn variational_jacobian<S: Scalar>(f: &TrigField<S>, ctrl: &ControlSignal, x0: &EnsembleState, dt: f64) -> Result<Vec<Vec<DMatrix<f64>>>> {
    Ok(variational_flow(f, ctrl, x0, dt)?.jacobians.expect("variational flow records Jacobians"))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VariationReport {
    /// Sup over the step grid of the distance between the factorized flow and
    /// the direct flow, both at step `dt`.
    pub same_step_discrepancy: f64,
    /// Sup over the step grid of the distance between the factorized flow at
    /// step `dt` and the direct flow at step `dt / 4`.
    pub discrepancy: f64,
    pub reference_dt: f64,
}

/// Checks the factorization of the flow of `f + u(t)` into the flow of the
/// time-varying field `f_{theta(t)}` followed by the translation `theta(t)`,
/// `theta(t) = int_0^t u`. Requires `alpha = 1` on every segment.
pub fn variation_decompose<S: Scalar>(f: &TrigField<S>, ctrl: &ControlSignal, x0: &EnsembleState, dt: f64) -> Result<VariationReport> {
    check_dim(f.dim(), x0.dim())?;
    ctrl.validate(Some(f.dim()))?;
    check_step(dt)?;
    if ctrl.segments.iter().any(|s| s.alpha != 1.0) {
        return Err(Error::InvalidControl("the factorization needs alpha = 1".into()));
    }
    let d = f.dim();
    let ev = FieldEvaluator::<f64>::new(f);
    let zeros = vec![0.0; d];

    // factorized: y' = f(y + theta(t)), x = y + theta
    let mut ys: Vec<Vec<f64>> = x0.points().to_vec();
    let mut theta = vec![0.0; d];
    let mut factorized = vec![ys.clone()];
    for seg in &ctrl.segments {
        let n = steps_for(seg.duration, dt);
        let h = seg.duration / n as f64;
        for _ in 0..n {
            for y in ys.iter_mut() {
                rk4_point(&ev, y, h, 1.0, &zeros, Some(&theta), &seg.u);
            }
            for (t, u) in theta.iter_mut().zip(&seg.u) {
                *t += u * h;
            }
            factorized.push(ys.iter().map(|y| y.iter().zip(&theta).map(|(a, b)| a + b).collect()).collect());
        }
    }

    let direct = |stride: usize| -> Vec<Vec<Vec<f64>>> {
        let mut xs: Vec<Vec<f64>> = x0.points().to_vec();
        let mut out = vec![xs.clone()];
        for seg in &ctrl.segments {
            let n = steps_for(seg.duration, dt) * stride;
            let h = seg.duration / n as f64;
            for k in 1..=n {
                for x in xs.iter_mut() {
                    rk4_point(&ev, x, h, seg.alpha, &seg.u, None, &zeros);
                }
                if k % stride == 0 {
                    out.push(xs.clone());
                }
            }
        }
        out
    };
    let sup = |a: &[Vec<Vec<f64>>], b: &[Vec<Vec<f64>>]| -> f64 {
        a.iter()
            .zip(b)
            .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| torus_distance(x, y)))
            .fold(0.0, f64::max)
    };
    let same = direct(1);
    let fine = direct(4);
    Ok(VariationReport {
        same_step_discrepancy: sup(&factorized, &same),
        discrepancy: sup(&factorized, &fine),
        reference_dt: dt / 4.0,
    })
}

/// Max norm over sample points `x` of the average of `f(x + theta)` over the
/// grid `theta in (2 pi / L) {0..L-1}^d`. Requires `mean(f) = 0`.
pub fn cone_mean_check<S: Scalar>(f: &TrigField<S>, grid: usize) -> Result<f64> {
    let samples: Vec<Vec<f64>> = match f.dim() {
        2 => (0..25).map(|k| vec![0.37 + 1.13 * k as f64, 2.9 - 0.71 * k as f64]).collect(),
        _ => (0..27)
            .map(|k| vec![0.37 + 1.13 * k as f64, 2.9 - 0.71 * k as f64, 0.05 + 2.31 * k as f64])
            .collect(),
    };
    cone_mean_check_at(f, grid, &samples)
}

pub fn cone_mean_check_at<S: Scalar>(f: &TrigField<S>, grid: usize, samples: &[Vec<f64>]) -> Result<f64> {
    if !f.constant().iter().all(num_traits::Zero::is_zero) {
        return Err(Error::InvalidInput("the field must have zero mean".into()));
    }
    if grid == 0 {
        return Err(Error::InvalidInput("grid size must be positive".into()));
    }
    let d = f.dim();
    let ev = FieldEvaluator::<f64>::new(f);
    let total = grid.pow(d as u32);
    let step = std::f64::consts::TAU / grid as f64;
    let mut worst: f64 = 0.0;
    for x in samples {
        check_dim(d, x.len())?;
        let mut acc = vec![0.0; d];
        let mut val = vec![0.0; d];
        for mut idx in 0..total {
            let mut shift = [0.0; 3];
            for s in shift.iter_mut().take(d) {
                *s = (idx % grid) as f64 * step;
                idx /= grid;
            }
            ev.eval_into(x, Some(&shift[..d]), 1.0, &vec![0.0; d], &mut val);
            for (a, v) in acc.iter_mut().zip(&val) {
                *a += v;
            }
        }
        let norm = acc.iter().map(|a| (a / total as f64).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(norm);
    }
    Ok(worst)
}
