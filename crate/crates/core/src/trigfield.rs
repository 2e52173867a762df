//! Trigonometric vector fields on the torus `T^d = R^d / 2 pi Z^d`.
//!
//! A [`TrigField`] is a finite sum
//!
//! ```text
//! f(x) = c + sum_m a_m cos<m, x> + b_m sin<m, x>
//! ```
//!
//! with `a_m, b_m in S^d`. Only canonical modes (first nonzero coordinate
//! positive) are stored, using `a_{-m} = a_m` and `b_{-m} = -b_m`, and zero
//! pairs are pruned eagerly, so structural equality is equality of fields.
//!
//! The Lie bracket is `[f, g] = (Dg) f - (Df) g`, which makes the
//! Hamiltonian map `h -> (-h_y, h_x)` a Lie algebra homomorphism from the
//! Poisson bracket and gives `ad_{d/dx} = [d/dx, .]`.

use std::collections::BTreeMap;


use crate::error::{check_dim, Error, Result};
use crate::lattice::Mode;
use crate::linalg;
use crate::scalar::{is_zero_vec, norm_f64, Rational, Scalar};

/// Cosine and sine coefficient vectors of one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffPair<S> {
    pub a: Vec<S>,
    pub b: Vec<S>,
}

impl<S: Scalar> CoeffPair<S> {
    pub fn new(a: Vec<S>, b: Vec<S>) -> Self {
        assert_eq!(a.len(), b.len(), "coefficient vectors must have equal length");
        Self { a, b }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            a: vec![S::zero(); dim],
            b: vec![S::zero(); dim],
        }
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vec(&self.a) && is_zero_vec(&self.b)
    }

    /// `(a, b)` concatenated, the coordinates used for per-mode spans.
    pub fn to_vec(&self) -> Vec<S> {
        self.a.iter().chain(&self.b).cloned().collect()
    }

    pub fn from_slice(v: &[S]) -> Self {
        let d = v.len() / 2;
        Self {
            a: v[..d].to_vec(),
            b: v[d..].to_vec(),
        }
    }

    /// Quarter-period rotation `(a, b) -> (b, -a)`; `ad_{d/dx_i}` acts on
    /// mode `m` as `m_i` times this map.
    pub fn quarter_turn(&self) -> Self {
        Self {
            a: self.b.clone(),
            b: self.a.iter().map(|x| -x.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            a: self.a.iter().map(|x| x.clone() * s.clone()).collect(),
            b: self.b.iter().map(|x| x.clone() * s.clone()).collect(),
        }
    }

    fn add_assign(&mut self, o: &Self) {
        for (x, y) in self.a.iter_mut().zip(&o.a) {
            *x = x.clone() + y.clone();
        }
        for (x, y) in self.b.iter_mut().zip(&o.b) {
            *x = x.clone() + y.clone();
        }
    }

    fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> CoeffPair<T> {
        CoeffPair {
            a: self.a.iter().map(&f).collect(),
            b: self.b.iter().map(&f).collect(),
        }
    }
}

/// Finite real Fourier sum of vector fields.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigField<S> {
    dim: usize,
    constant: Vec<S>,
    terms: BTreeMap<Mode, CoeffPair<S>>,
}

/// Scalar trigonometric polynomial `c + sum_m alpha_m cos<m,x> + beta_m sin<m,x>`.
/// Used for stream functions on `T^2` and for divergences.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly<S> {
    dim: usize,
    constant: S,
    terms: BTreeMap<Mode, (S, S)>,
}

/// Stream function `h` of a Hamiltonian field on `T^2`.
pub type StreamFunction<S> = TrigPoly<S>;

fn vec_add<S: Scalar>(x: &mut [S], y: &[S]) {
    for (p, q) in x.iter_mut().zip(y) {
        *p = p.clone() + q.clone();
    }
}

fn vec_scale<S: Scalar>(x: &[S], s: &S) -> Vec<S> {
    x.iter().map(|v| v.clone() * s.clone()).collect()
}

/// Accumulates `cos_v cos<k,x> + sin_v sin<k,x>` into a canonical term list.
fn push_term<S: Scalar>(acc: &mut Vec<(Mode, CoeffPair<S>)>, k: Mode, cos_v: Vec<S>, sin_v: Vec<S>) {
    let (key, flipped) = k.canonical();
    let pair = if key.is_zero() {
        let d = cos_v.len();
        CoeffPair {
            a: cos_v,
            b: vec![S::zero(); d],
        }
    } else if flipped {
        CoeffPair {
            a: cos_v,
            b: sin_v.into_iter().map(|x| -x).collect(),
        }
    } else {
        CoeffPair { a: cos_v, b: sin_v }
    };
    match acc.iter_mut().find(|(m, _)| *m == key) {
        Some((_, p)) => p.add_assign(&pair),
        None => acc.push((key, pair)),
    }
}

/// Bracket of two single-mode fields `a cos<m,.> + b sin<m,.>` and
/// `c cos<n,.> + d sin<n,.>`, expanded by product-to-sum into canonical
/// terms at `m + n`, `m - n` (the zero mode carries a constant).
pub fn bracket_terms<S: Scalar>(m: Mode, f: &CoeffPair<S>, n: Mode, g: &CoeffPair<S>) -> Vec<(Mode, CoeffPair<S>)> {
    let (a, b, c, d) = (&f.a, &f.b, &g.a, &g.b);
    let na = n.dot(a);
    let nb = n.dot(b);
    let mc = m.dot(c);
    let md = m.dot(d);
    let half = S::half();
    let comb = |terms: [(&Vec<S>, S); 4]| -> Vec<S> {
        let dim = a.len();
        let mut out = vec![S::zero(); dim];
        for (v, s) in terms {
            if s.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(v) {
                *o = o.clone() + x.clone() * s.clone();
            }
        }
        vec_scale(&out, &half)
    };
    let neg = |s: &S| -s.clone();
    // (Dg) f - (Df) g, see module docs
    let cos_p = comb([(c, nb.clone()), (d, na.clone()), (a, neg(&md)), (b, neg(&mc))]);
    let sin_p = comb([(d, nb.clone()), (c, neg(&na)), (a, mc.clone()), (b, neg(&md))]);
    let cos_q = comb([(d, na.clone()), (c, neg(&nb)), (a, md.clone()), (b, neg(&mc))]);
    let sin_q = comb([(c, na), (d, nb), (a, mc), (b, md)]);
    let mut acc = Vec::with_capacity(3);
    push_term(&mut acc, m + n, cos_p, sin_p);
    push_term(&mut acc, m - n, cos_q, sin_q);
    acc.retain(|(_, p)| !p.is_zero());
    acc
}

impl<S: Scalar> TrigField<S> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            constant: vec![S::zero(); dim],
            terms: BTreeMap::new(),
        }
    }

    pub fn constant_field(c: Vec<S>) -> Self {
        Self {
            dim: c.len(),
            constant: c,
            terms: BTreeMap::new(),
        }
    }

    /// Constant basis field `d/dx_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        Self::constant_field(linalg::Subspace::<S>::unit(dim, axis))
    }

    pub fn single(m: Mode, a: Vec<S>, b: Vec<S>) -> Self {
        let mut f = Self::zero(m.dim());
        f.add_term(m, a, b);
        f
    }

    /// Builder form of [`TrigField::add_term`].
    pub fn with_term(mut self, m: Mode, a: Vec<S>, b: Vec<S>) -> Self {
        self.add_term(m, a, b);
        self
    }

    /// Adds `a cos<m,.> + b sin<m,.>`. The zero mode adds `a` to the constant.
    pub fn add_term(&mut self, m: Mode, a: Vec<S>, b: Vec<S>) {
        assert_eq!(m.dim(), self.dim, "mode dimension must match field dimension");
        assert!(a.len() == self.dim && b.len() == self.dim, "coefficient length must match field dimension");
        let (key, flipped) = m.canonical();
        if key.is_zero() {
            vec_add(&mut self.constant, &a);
            return;
        }
        let b = if flipped { b.into_iter().map(|x| -x).collect() } else { b };
        let pair = CoeffPair { a, b };
        let entry = self
            .terms
            .entry(key)
            .or_insert_with(|| CoeffPair::zero(self.dim));
        entry.add_assign(&pair);
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self) -> &[S] {
        &self.constant
    }

    /// Canonical modes and their coefficient pairs, in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Mode, &CoeffPair<S>)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Canonical nonzero modes of the support.
    pub fn modes(&self) -> Vec<Mode> {
        self.terms.keys().copied().collect()
    }

    /// Support `M_f` including both signs of every mode.
    pub fn support(&self) -> Vec<Mode> {
        self.terms.keys().flat_map(|&m| [m, -m]).collect()
    }

    /// Coefficients of `cos<m,.>` and `sin<m,.>` for any (not necessarily
    /// canonical) nonzero mode.
    pub fn coefficient(&self, m: &Mode) -> CoeffPair<S> {
        let (key, flipped) = m.canonical();
        match self.terms.get(&key) {
            None => CoeffPair::zero(self.dim),
            Some(p) if flipped => CoeffPair {
                a: p.a.clone(),
                b: p.b.iter().map(|x| -x.clone()).collect(),
            },
            Some(p) => p.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && is_zero_vec(&self.constant)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "fields must have equal dimension");
        let mut out = self.clone();
        vec_add(&mut out.constant, &other.constant);
        for (m, p) in &other.terms {
            out.add_term(*m, p.a.clone(), p.b.clone());
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        if s.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            constant: vec_scale(&self.constant, s),
            terms: self.terms.iter().map(|(m, p)| (*m, p.scale(s))).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-S::one()))
    }

    /// Converts every coefficient with `f`.
    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> TrigField<T> {
        let mut out = TrigField::<T>::zero(self.dim);
        out.constant = self.constant.iter().map(&f).collect();
        for (m, p) in &self.terms {
            let q = p.map(&f);
            if !q.is_zero() {
                out.terms.insert(*m, q);
            }
        }
        out
    }

    pub fn to_f64(&self) -> TrigField<f64> {
        self.map_scalar(|x| x.to_f64_lossy())
    }

    /// Pointwise value in floating point.
    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "point dimension must match field dimension");
        let mut out: Vec<f64> = self.constant.iter().map(Scalar::to_f64_lossy).collect();
        for (m, p) in &self.terms {
            let phase: f64 = m.coords().iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
            let (s, c) = phase.sin_cos();
            for i in 0..self.dim {
                out[i] += p.a[i].to_f64_lossy() * c + p.b[i].to_f64_lossy() * s;
            }
        }
        out
    }

    /// Jacobian `J[i][j] = d f_i / d x_j` in floating point.
    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut jac = vec![vec![0.0; self.dim]; self.dim];
        for (m, p) in &self.terms {
            let phase: f64 = m.coords().iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
            let (s, c) = phase.sin_cos();
            for i in 0..self.dim {
                let v = -p.a[i].to_f64_lossy() * s + p.b[i].to_f64_lossy() * c;
                for j in 0..self.dim {
                    jac[i][j] += v * m.coords()[j] as f64;
                }
            }
        }
        jac
    }

    fn rotate(&self, angle: impl Fn(&Mode) -> Result<(S, S)>) -> Result<Self> {
        let mut out = Self::zero(self.dim);
        out.constant = self.constant.clone();
        for (m, p) in &self.terms {
            let (c, s) = angle(m)?;
            let a: Vec<S> = p
                .a
                .iter()
                .zip(&p.b)
                .map(|(a, b)| a.clone() * c.clone() + b.clone() * s.clone())
                .collect();
            let b: Vec<S> = p
                .a
                .iter()
                .zip(&p.b)
                .map(|(a, b)| b.clone() * c.clone() - a.clone() * s.clone())
                .collect();
            out.add_term(*m, a, b);
        }
        Ok(out)
    }

    /// `f_theta(x) = f(x + theta)` for a floating point angle.
    pub fn translate(&self, theta: &[f64]) -> Self {
        assert_eq!(theta.len(), self.dim, "angle dimension must match field dimension");
        let conv = |v: f64| S::from_f64(v).expect("finite trigonometric value");
        self.rotate(|m| {
            let phase: f64 = m.coords().iter().zip(theta).map(|(&k, &t)| k as f64 * t).sum();
            Ok((conv(phase.cos()), conv(phase.sin())))
        })
        .expect("floating translation never fails")
    }

    /// Exact translation by `theta = pi * q`. Exact only when every
    /// `<m, q>` is a multiple of 1/2, otherwise the coefficients would be
    /// irrational.
    pub fn translate_pi_multiple(&self, q: &[Rational]) -> Result<Self> {
        check_dim(self.dim, q.len())?;
        self.rotate(|m| {
            let r: Rational = m.dot(q);
            let twice = r * crate::scalar::rint(2);
            if !twice.is_integer() {
                return Err(Error::InexactTranslation(*m));
            }
            let quarter = twice.to_integer() % num_bigint::BigInt::from(4);
            let quarter: i64 = num_traits::ToPrimitive::to_i64(&quarter).expect("small remainder");
            let (c, s) = match quarter.rem_euclid(4) {
                0 => (1, 0),
                1 => (0, 1),
                2 => (-1, 0),
                _ => (0, -1),
            };
            Ok((S::from_int(c), S::from_int(s)))
        })
    }

    /// `ad_{d/dx_axis}^k f`, i.e. the k-th derivative along `axis` applied termwise.
    pub fn partial_ad(&self, axis: usize, k: u32) -> Self {
        assert!(axis < self.dim, "axis out of range");
        if k == 0 {
            return self.clone();
        }
        let mut out = Self::zero(self.dim);
        for (m, p) in &self.terms {
            let mi = m.coords()[axis];
            if mi == 0 {
                continue;
            }
            let mut q = p.clone();
            for _ in 0..k {
                q = q.quarter_turn().scale(&S::from_int(mi));
            }
            out.add_term(*m, q.a, q.b);
        }
        out
    }

    /// Lie bracket `[self, other] = (D other) self - (D self) other`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let zero = Mode::zero(self.dim);
        let c_self = CoeffPair {
            a: self.constant.clone(),
            b: vec![S::zero(); self.dim],
        };
        let c_other = CoeffPair {
            a: other.constant.clone(),
            b: vec![S::zero(); self.dim],
        };
        let mut lhs: Vec<(Mode, &CoeffPair<S>)> = self.terms.iter().map(|(m, p)| (*m, p)).collect();
        let mut rhs: Vec<(Mode, &CoeffPair<S>)> = other.terms.iter().map(|(m, p)| (*m, p)).collect();
        if !is_zero_vec(&self.constant) {
            lhs.push((zero, &c_self));
        }
        if !is_zero_vec(&other.constant) {
            rhs.push((zero, &c_other));
        }
        let mut out = Self::zero(self.dim);
        for (m, p) in &lhs {
            for (n, q) in &rhs {
                if m.is_zero() && n.is_zero() {
                    continue;
                }
                for (k, r) in bracket_terms(*m, p, *n, q) {
                    out.add_term(k, r.a, r.b);
                }
            }
        }
        Ok(out)
    }

    pub fn divergence(&self) -> TrigPoly<S> {
        let mut out = TrigPoly::zero(self.dim);
        for (m, p) in &self.terms {
            // div(a cos<m,x>) = -<m,a> sin, div(b sin<m,x>) = <m,b> cos
            out.add_term(*m, m.dot(&p.b), -m.dot(&p.a));
        }
        out
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence().is_zero()
    }

    /// Mean over the torus: the constant term.
    pub fn mean(&self) -> Vec<S> {
        self.constant.clone()
    }

    /// The same field with its constant part removed.
    pub fn without_constant(&self) -> Self {
        Self {
            dim: self.dim,
            constant: vec![S::zero(); self.dim],
            terms: self.terms.clone(),
        }
    }

    /// Direct projection onto the modes `+-m`.
    pub fn mode_projection(&self, m: &Mode) -> Self {
        let mut out = Self::zero(self.dim);
        let (key, _) = m.canonical();
        if let Some(p) = self.terms.get(&key) {
            out.terms.insert(key, p.clone());
        }
        out
    }

    /// Certified upper bound of the C^1 norm and a grid estimate of it.
    pub fn c1_norm_bound(&self) -> C1Norm {
        let mut sup_bound = norm_f64(&self.constant);
        let mut lip_bound = 0.0;
        for (m, p) in &self.terms {
            let w = norm_f64(&p.a) + norm_f64(&p.b);
            sup_bound += w;
            lip_bound += m.norm() * w;
        }
        let bound = sup_bound.max(lip_bound);

        let per_axis = if self.dim == 2 { 48 } else { 16 };
        let mut estimate: f64 = 0.0;
        let total = per_axis_pow(per_axis, self.dim);
        let step = std::f64::consts::TAU / per_axis as f64;
        for mut idx in 0..total {
            let mut x = vec![0.0; self.dim];
            for xi in x.iter_mut() {
                *xi = (idx % per_axis) as f64 * step;
                idx /= per_axis;
            }
            let v = self.evaluate(&x);
            let value = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            let jac = self.jacobian(&x);
            let frob = jac.iter().flatten().map(|t| t * t).sum::<f64>().sqrt();
            estimate = estimate.max(value).max(frob);
        }
        C1Norm {
            bound,
            grid_estimate: estimate,
        }
    }

    /// Rank of `{a_m, b_m}`, the span of the values of the non-constant part.
    pub fn value_span_dimension(&self) -> usize {
        let rows: Vec<Vec<S>> = self
            .terms
            .values()
            .flat_map(|p| [p.a.clone(), p.b.clone()])
            .collect();
        linalg::rank(&rows)
    }

    /// The three membership conditions of the class of fields with finite
    /// support, spanning modes and spanning values.
    pub fn check_class_vd(&self) -> VdReport {
        let span_modes = crate::lattice::span_dimension(&self.modes());
        let span_values = self.value_span_dimension();
        let divergence_free = self.is_divergence_free();
        VdReport {
            finite: true,
            span_modes,
            span_values,
            divergence_free,
            in_vd: divergence_free && span_modes == self.dim && span_values == self.dim,
        }
    }

    /// Hamiltonian field of a stream function on `T^2`.
    pub fn from_stream(h: &StreamFunction<S>) -> Result<Self> {
        check_dim(2, h.dim)?;
        let mut out = Self::zero(2);
        for (m, (alpha, beta)) in &h.terms {
            // ->(alpha cos + beta sin) = m_perp (beta cos - alpha sin), m_perp = (-m2, m1)
            let c = m.coords();
            let perp = [S::from_int(-c[1]), S::from_int(c[0])];
            let a = perp.iter().map(|x| x.clone() * beta.clone()).collect();
            let b = perp.iter().map(|x| -(x.clone() * alpha.clone())).collect();
            out.add_term(*m, a, b);
        }
        Ok(out)
    }

    /// Splits a divergence-free planar field as `->h + c`.
    pub fn hamiltonian_part(&self) -> Result<(Vec<S>, StreamFunction<S>)> {
        check_dim(2, self.dim)?;
        if !self.is_divergence_free() {
            return Err(Error::NotDivergenceFree);
        }
        let mut h = TrigPoly::zero(2);
        for (m, p) in &self.terms {
            let c = m.coords();
            let perp = [S::from_int(-c[1]), S::from_int(c[0])];
            let norm2 = S::from_int(c[0] * c[0] + c[1] * c[1]);
            let beta = crate::scalar::dot(&p.a, &perp) / norm2.clone();
            let alpha = -(crate::scalar::dot(&p.b, &perp) / norm2);
            h.add_term(*m, alpha, beta);
        }
        Ok((self.constant.clone(), h))
    }
}

fn per_axis_pow(n: usize, d: usize) -> usize {
    n.pow(d as u32)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct C1Norm {
    /// `max(sum |a|+|b| + |c|, sum |m| (|a|+|b|))`, never below the true norm.
    pub bound: f64,
    /// Max of `|f|` and the Frobenius norm of `Df` over a uniform grid.
    pub grid_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct VdReport {
    pub finite: bool,
    pub span_modes: usize,
    pub span_values: usize,
    pub divergence_free: bool,
    pub in_vd: bool,
}

impl<S: Scalar> TrigPoly<S> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            constant: S::zero(),
            terms: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constant(&self) -> &S {
        &self.constant
    }

    pub fn with_constant(mut self, c: S) -> Self {
        self.constant = self.constant.clone() + c;
        self
    }

    pub fn with_term(mut self, m: Mode, cos: S, sin: S) -> Self {
        self.add_term(m, cos, sin);
        self
    }

    pub fn add_term(&mut self, m: Mode, cos: S, sin: S) {
        assert_eq!(m.dim(), self.dim, "mode dimension must match");
        let (key, flipped) = m.canonical();
        if key.is_zero() {
            self.constant = self.constant.clone() + cos;
            return;
        }
        let sin = if flipped { -sin } else { sin };
        let entry = self.terms.entry(key).or_insert_with(|| (S::zero(), S::zero()));
        entry.0 = entry.0.clone() + cos;
        entry.1 = entry.1.clone() + sin;
        if entry.0.is_zero() && entry.1.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mode, &(S, S))> {
        self.terms.iter()
    }

    pub fn modes(&self) -> Vec<Mode> {
        self.terms.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.constant = out.constant.clone() + other.constant.clone();
        for (m, (c, s)) in &other.terms {
            out.add_term(*m, c.clone(), s.clone());
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.dim);
        out.constant = self.constant.clone() * s.clone();
        for (m, (c, si)) in &self.terms {
            out.add_term(*m, c.clone() * s.clone(), si.clone() * s.clone());
        }
        out
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let mut out = self.constant.to_f64_lossy();
        for (m, (c, s)) in &self.terms {
            let phase: f64 = m.coords().iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
            out += c.to_f64_lossy() * phase.cos() + s.to_f64_lossy() * phase.sin();
        }
        out
    }

    /// Poisson bracket `{h1, h2} = h1_x h2_y - h1_y h2_x` on `T^2`.
    pub fn poisson(&self, other: &Self) -> Result<Self> {
        check_dim(2, self.dim)?;
        check_dim(2, other.dim)?;
        let mut out = Self::zero(2);
        let half = S::half();
        for (m, (alpha, beta)) in &self.terms {
            for (n, (gamma, delta)) in &other.terms {
                let w = crate::lattice::wedge2(m, n)?;
                if w == 0 {
                    continue;
                }
                // {P(m), Q(n)} = (m ^ n) P Q with P = beta cos - alpha sin, Q = delta cos - gamma sin
                let w = S::from_int(w) * half.clone();
                let ag = alpha.clone() * gamma.clone();
                let ad = alpha.clone() * delta.clone();
                let bg = beta.clone() * gamma.clone();
                let bd = beta.clone() * delta.clone();
                let p = *m + *n;
                let q = *m - *n;
                out.add_term(
                    p,
                    w.clone() * (bd.clone() - ag.clone()),
                    w.clone() * (-(ad.clone()) - bg.clone()),
                );
                out.add_term(q, w.clone() * (ag + bd), w * (bg - ad));
            }
        }
        Ok(out)
    }
}

/// Hamiltonian field `->h = (-h_y, h_x)`.
pub fn from_stream<S: Scalar>(h: &StreamFunction<S>) -> Result<TrigField<S>> {
    TrigField::from_stream(h)
}

pub fn poisson<S: Scalar>(h1: &StreamFunction<S>, h2: &StreamFunction<S>) -> Result<StreamFunction<S>> {
    h1.poisson(h2)
}
