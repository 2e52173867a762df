//! Steering an ensemble with piecewise constant `(alpha, u)` controls by
//! multi-start projected Levenberg-Marquardt through the simulator, with
//! finite difference derivatives.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closure::{predicted_closure, ClosureKind};
use crate::dynamics::{flow_endpoint, integrate_flow, ControlSignal, FieldEvaluator, Segment};
use crate::ensemble::{separation_bound, torus_distance, EnsembleState};
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;
use crate::trigfield::TrigField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    /// Bound on `|alpha|` and on every `|u_i|`.
    pub bound: f64,
    pub restarts: usize,
    /// Restarts run in batches of this size; the search stops after the first batch with a success.
    pub batch: usize,
    pub max_iterations: usize,
    /// Integration step used while optimizing and for the reported error.
    pub dt: f64,
    pub fd_step: f64,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            bound: 4.0,
            restarts: 20,
            batch: 4,
            max_iterations: 200,
            dt: 0.02,
            fd_step: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanProblem<S> {
    pub field: TrigField<S>,
    pub start: EnsembleState,
    pub target: EnsembleState,
    pub segments: usize,
    pub horizon: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub options: PlanOptions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub control: ControlSignal,
    /// Max torus distance of the endpoints to the targets, from a fresh simulation.
    pub achieved_error: f64,
    pub objective: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

struct Search<'a> {
    ev: FieldEvaluator<f64>,
    start: &'a EnsembleState,
    target: &'a EnsembleState,
    segments: usize,
    seg_len: f64,
    dim: usize,
    opts: &'a PlanOptions,
}

impl Search<'_> {
    fn control(&self, v: &[f64]) -> ControlSignal {
        let k = self.dim + 1;
        ControlSignal {
            segments: (0..self.segments)
                .map(|s| Segment {
                    duration: self.seg_len,
                    alpha: v[s * k],
                    u: v[s * k + 1..(s + 1) * k].to_vec(),
                })
                .collect(),
        }
    }

    fn endpoints(&self, v: &[f64]) -> Vec<Vec<f64>> {
        flow_endpoint(&self.ev, &self.control(v), self.start.points(), self.opts.dt)
    }

    /// `sum (1 - cos(x_T - target))` and the max torus distance.
    fn evaluate(&self, v: &[f64]) -> (f64, f64) {
        let ends = self.endpoints(v);
        let mut obj = 0.0;
        let mut err: f64 = 0.0;
        for (x, y) in ends.iter().zip(self.target.points()) {
            obj += x.iter().zip(y).map(|(a, b)| 1.0 - (a - b).cos()).sum::<f64>();
            err = err.max(torus_distance(x, y));
        }
        (obj, err)
    }

    /// Residuals `(sin D, 1 - cos D) / sqrt 2` per coordinate; their squares
    /// sum to the objective and they are smooth across the cut locus.
    fn residuals(&self, v: &[f64]) -> Vec<f64> {
        let ends = self.endpoints(v);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ends.iter()
            .zip(self.target.points())
            .flat_map(|(x, y)| x.iter().zip(y).flat_map(|(a, b)| [s * (a - b).sin(), s * (1.0 - (a - b).cos())]))
            .collect()
    }

    /// Central finite difference Jacobian of the residuals.
    fn residual_jacobian(&self, v: &[f64], rows: usize) -> DMatrix<f64> {
        let h = self.opts.fd_step;
        let mut jac = DMatrix::zeros(rows, v.len());
        let mut w = v.to_vec();
        for i in 0..v.len() {
            w[i] = v[i] + h;
            let plus = self.residuals(&w);
            w[i] = v[i] - h;
            let minus = self.residuals(&w);
            w[i] = v[i];
            for r in 0..rows {
                jac[(r, i)] = (plus[r] - minus[r]) / (2.0 * h);
            }
        }
        jac
    }

    fn project(&self, v: &mut [f64]) {
        let b = self.opts.bound;
        v.iter_mut().for_each(|x| *x = x.clamp(-b, b));
    }

    /// One restart of projected Levenberg-Marquardt; returns `(vars, objective, error, iterations)`.
    fn descend(&self, mut v: Vec<f64>, goal: f64) -> (Vec<f64>, f64, f64, usize) {
        self.project(&mut v);
        let (mut obj, mut err) = self.evaluate(&v);
        let mut lambda = 1e-2;
        let mut iters = 0;
        while iters < self.opts.max_iterations && err > goal && lambda < 1e8 {
            iters += 1;
            let r = DVector::from_vec(self.residuals(&v));
            let jac = self.residual_jacobian(&v, r.len());
            let jtj = jac.transpose() * &jac;
            let jtr = jac.transpose() * &r;
            // raise the damping until a step lowers the objective
            loop {
                let mut lhs = jtj.clone();
                for i in 0..v.len() {
                    lhs[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
                }
                let Some(step) = lhs.cholesky().map(|c| c.solve(&(-&jtr))) else {
                    lambda *= 4.0;
                    continue;
                };
                let mut trial: Vec<f64> = v.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
                self.project(&mut trial);
                let (o, e) = self.evaluate(&trial);
                if o < obj {
                    v = trial;
                    obj = o;
                    err = e;
                    lambda = (lambda / 3.0).max(1e-9);
                    break;
                }
                lambda *= 4.0;
                if lambda >= 1e8 {
                    break;
                }
            }
        }
        (v, obj, err, iters)
    }
}

/// Searches for a control taking `start` to `target` within the tolerance.
/// Restart `r` draws its initial point from the ChaCha stream `r` of `seed`,
/// so the result does not depend on the thread count.
pub fn plan_ensemble<S: Scalar>(p: &PlanProblem<S>) -> Result<PlanResult> {
    let dim = p.field.dim();
    check_dim(dim, p.start.dim())?;
    check_dim(dim, p.target.dim())?;
    if p.start.len() != p.target.len() {
        return Err(Error::InvalidInput("start and target have different sizes".into()));
    }
    if p.segments == 0 || !(p.horizon > 0.0) || !(p.tolerance > 0.0) {
        return Err(Error::InvalidInput("segments, horizon and tolerance must be positive".into()));
    }
    let opts = &p.options;
    if opts.restarts == 0 || opts.batch == 0 || !(opts.dt > 0.0) || !(opts.bound > 0.0) {
        return Err(Error::InvalidInput("invalid planner options".into()));
    }

    let mut warnings = Vec::new();
    match predicted_closure(&p.field) {
        Ok(c) if matches!(c.kind, ClosureKind::FullLattice(_)) => {}
        Ok(c) => warnings.push(format!("closure is {}, so reachability is not guaranteed", c.kind_name())),
        Err(e) => warnings.push(format!("closure not classified: {e}")),
    }

    let search = Search {
        ev: FieldEvaluator::new(&p.field),
        start: &p.start,
        target: &p.target,
        segments: p.segments,
        seg_len: p.horizon / p.segments as f64,
        dim,
        opts,
    };
    let nvars = p.segments * (dim + 1);
    let goal = 0.5 * p.tolerance;
    let initial = |r: usize| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        rng.set_stream(r as u64);
        (0..nvars).map(|_| rng.gen_range(-1.0..1.0)).collect()
    };

    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    let mut iterations = 0;
    let mut restarts_used = 0;
    for batch_start in (0..opts.restarts).step_by(opts.batch) {
        let ids: Vec<usize> = (batch_start..(batch_start + opts.batch).min(opts.restarts)).collect();
        let runs: Vec<(Vec<f64>, f64, f64, usize)> = ids.par_iter().map(|&r| search.descend(initial(r), goal)).collect();
        restarts_used += runs.len();
        for (v, obj, err, it) in runs {
            iterations += it;
            // earliest restart wins ties
            if best.as_ref().is_none_or(|b| obj < b.1) {
                best = Some((v, obj, err));
            }
        }
        if best.as_ref().is_some_and(|b| b.2 <= p.tolerance) {
            break;
        }
    }
    let (v, objective, _) = best.expect("at least one restart ran");
    let control = search.control(&v);
    let achieved_error = verify_plan(&p.field, &control, &p.start, &p.target, opts.dt)?;
    let converged = achieved_error <= p.tolerance;

    if converged && p.start.len() >= 2 {
        for i in 0..p.start.len() {
            for j in i + 1..p.start.len() {
                let pair = EnsembleState::new(vec![p.start.point(i).to_vec(), p.start.point(j).to_vec()])?;
                let bound = separation_bound(&p.field, &pair, control.drift_time())?.bound;
                let reached = torus_distance(p.target.point(i), p.target.point(j)) + 2.0 * achieved_error;
                if reached < bound {
                    warnings.push(format!("points {i} and {j} end closer than the separation bound {bound}"));
                }
            }
        }
    }

    Ok(PlanResult {
        control,
        achieved_error,
        objective,
        iterations,
        restarts_used,
        converged,
        warnings,
    })
}

/// Max torus distance between the simulated endpoints and `target`.
pub fn verify_plan<S: Scalar>(
    f: &TrigField<S>,
    control: &ControlSignal,
    start: &EnsembleState,
    target: &EnsembleState,
    dt: f64,
) -> Result<f64> {
    check_dim(start.dim(), target.dim())?;
    if start.len() != target.len() {
        return Err(Error::InvalidInput("start and target have different sizes".into()));
    }
    let tr = integrate_flow(f, control, start, dt)?;
    Ok(tr.final_state().max_distance_to(target))
}
