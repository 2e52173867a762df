//! Random instances shared by the integration tests. Everything is seeded so
//! failures reproduce.
#![allow(dead_code)]

pub mod oracles;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torus_control::closure::{divergence_free_pairs, predicted_closure};
use torus_control::dynamics::Segment;
use torus_control::lattice::cross3;
use torus_control::scalar::{rational, rint};
use torus_control::{ControlSignal, EnsembleState, ExactField, ExactStream, Mode, Rational, TrigField, TrigPoly};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(r: &mut impl Rng) -> Rational {
    rational(r.gen_range(-4..=4), r.gen_range(1..=3))
}

pub fn nonzero_rational(r: &mut impl Rng) -> Rational {
    loop {
        let q = small_rational(r);
        if q != rint(0) {
            return q;
        }
    }
}

pub fn random_mode(r: &mut impl Rng, dim: usize, k: i64) -> Mode {
    loop {
        let c: Vec<i64> = (0..dim).map(|_| r.gen_range(-k..=k)).collect();
        let m = Mode::new(&c);
        if !m.is_zero() {
            return m;
        }
    }
}

fn combine(basis: &[Vec<Rational>], coeffs: &[Rational]) -> Vec<Rational> {
    let mut out = vec![rint(0); basis[0].len()];
    for (v, c) in basis.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x * c;
        }
    }
    out
}

/// Random `(a, b)` with `a, b` orthogonal to `m`.
pub fn divfree_pair(r: &mut impl Rng, m: &Mode) -> (Vec<Rational>, Vec<Rational>) {
    let d = m.dim();
    let basis = divergence_free_pairs::<Rational>(m).basis().to_vec();
    let coeffs: Vec<Rational> = basis.iter().map(|_| small_rational(r)).collect();
    let v = combine(&basis, &coeffs);
    (v[..d].to_vec(), v[d..].to_vec())
}

/// Random vector orthogonal to `m`.
pub fn perp_vector(r: &mut impl Rng, m: &Mode) -> Vec<Rational> {
    divfree_pair(r, m).0
}

/// Divergence-free field with `terms` distinct modes in `[-k, k]^d` and an optional constant.
pub fn random_divfree_field(r: &mut impl Rng, dim: usize, k: i64, terms: usize, constant: bool) -> ExactField {
    let mut f = TrigField::zero(dim);
    while f.num_terms() < terms {
        let m = random_mode(r, dim, k);
        if f.modes().contains(&m.canonical().0) {
            continue;
        }
        let (a, b) = divfree_pair(r, &m);
        if a.iter().chain(&b).all(|x| *x == rint(0)) {
            continue;
        }
        f.add_term(m, a, b);
    }
    if constant {
        f = f.add(&TrigField::constant_field((0..dim).map(|_| small_rational(r)).collect()));
    }
    f
}

/// Field with arbitrary (not necessarily divergence-free) coefficients.
pub fn random_field(r: &mut impl Rng, dim: usize, k: i64, terms: usize) -> ExactField {
    let mut f = TrigField::constant_field((0..dim).map(|_| small_rational(r)).collect());
    for _ in 0..terms {
        let m = random_mode(r, dim, k);
        let a = (0..dim).map(|_| small_rational(r)).collect();
        let b = (0..dim).map(|_| small_rational(r)).collect();
        f.add_term(m, a, b);
    }
    f
}

/// Field of the class with spanning modes and values, modes in `[-k, k]^d`, classified.
pub fn random_vd_field(r: &mut impl Rng, dim: usize, k: i64) -> ExactField {
    loop {
        let terms = r.gen_range(dim..=dim + 1);
        let constant = r.gen_bool(0.5);
        let f = random_divfree_field(r, dim, k, terms, constant);
        if f.check_class_vd().in_vd && predicted_closure(&f).unwrap().is_classified() {
            return f;
        }
    }
}

/// Planar field whose modes are all multiples of one primitive mode.
pub fn random_planar_degenerate(r: &mut impl Rng, k: i64) -> ExactField {
    let base = primitive(random_mode(r, 2, k));
    collinear_field(r, &base, k)
}

fn primitive(m: Mode) -> Mode {
    use num_integer::Integer;
    let g = m.coords().iter().fold(0i64, |g, &c| g.gcd(&c));
    Mode::new(&m.coords().iter().map(|c| c / g).collect::<Vec<_>>())
}

fn collinear_field(r: &mut impl Rng, base: &Mode, k: i64) -> ExactField {
    let dim = base.dim();
    let max_mult = k / base.max_abs();
    let mut f = TrigField::zero(dim);
    let terms = r.gen_range(1..=max_mult.clamp(1, 3)) as usize;
    while f.num_terms() < terms {
        let c = r.gen_range(1..=max_mult);
        let m = Mode::new(&base.coords().iter().map(|x| x * c).collect::<Vec<_>>());
        let (a, b) = divfree_pair(r, &m);
        if a.iter().chain(&b).any(|x| *x != rint(0)) {
            f.add_term(m, a, b);
        }
    }
    f
}

/// Field on `T^3` whose modes span a line.
pub fn random_t3_line(r: &mut impl Rng, k: i64) -> ExactField {
    let base = primitive(random_mode(r, 3, k));
    collinear_field(r, &base, k)
}

/// Field on `T^3` with modes spanning a plane and all coefficients parallel
/// to the normal of that plane.
pub fn random_t3_plane_single_direction(r: &mut impl Rng, k: i64) -> ExactField {
    loop {
        let m = random_mode(r, 3, k);
        let n = random_mode(r, 3, k);
        let to_q = |x: &Mode| x.coords().iter().map(|&c| rint(c)).collect::<Vec<Rational>>();
        let normal = cross3(&to_q(&m), &to_q(&n));
        if normal.iter().all(|x| *x == rint(0)) {
            continue;
        }
        let mut f = TrigField::zero(3);
        let extra = if r.gen_bool(0.5) { Some(m + n) } else { None };
        for mode in [m, n].into_iter().chain(extra.filter(|s| s.in_box(k) && !s.is_zero())) {
            let (s, t) = (small_rational(r), nonzero_rational(r));
            f.add_term(mode, normal.iter().map(|x| x * &s).collect(), normal.iter().map(|x| x * &t).collect());
        }
        if lattice_span(&f) == 2 {
            return f;
        }
    }
}

fn lattice_span(f: &ExactField) -> usize {
    torus_control::lattice::span_dimension(&f.modes())
}

pub fn random_stream(r: &mut impl Rng, k: i64, terms: usize) -> ExactStream {
    let mut h = TrigPoly::zero(2).with_constant(small_rational(r));
    for _ in 0..terms {
        h.add_term(random_mode(r, 2, k), small_rational(r), small_rational(r));
    }
    h
}

pub fn random_points(r: &mut impl Rng, dim: usize, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| r.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect())
        .collect()
}

/// Ensemble whose points are pairwise at torus distance at least `min_sep`.
pub fn random_ensemble(r: &mut impl Rng, dim: usize, n: usize, min_sep: f64) -> EnsembleState {
    loop {
        if let Ok(e) = EnsembleState::new(random_points(r, dim, n)) {
            if n < 2 || e.min_separation() >= min_sep {
                return e;
            }
        }
    }
}

/// Piecewise constant control with `|u_i| <= u_max` and `alpha` in `[-1, 1]`.
pub fn random_control(r: &mut impl Rng, dim: usize, segments: usize, total: f64, u_max: f64, drift: bool) -> ControlSignal {
    let duration = total / segments as f64;
    let segs = (0..segments)
        .map(|_| Segment {
            duration,
            u: (0..dim).map(|_| r.gen_range(-u_max..=u_max)).collect(),
            alpha: if drift { r.gen_range(-1.0..=1.0) } else { 1.0 },
        })
        .collect();
    ControlSignal::new(segs).unwrap()
}

pub fn rational_strategy() -> impl Strategy<Value = Rational> {
    (-5i64..=5, 1i64..=4).prop_map(|(n, d)| rational(n, d))
}

pub fn mode_strategy(dim: usize, k: i64) -> impl Strategy<Value = Mode> {
    proptest::collection::vec(-k..=k, dim).prop_map(|c| Mode::new(&c))
}

/// Field with up to `max_terms` arbitrary terms in `[-k, k]^d` plus a constant.
pub fn field_strategy(dim: usize, k: i64, max_terms: usize) -> impl Strategy<Value = ExactField> {
    let term = (
        mode_strategy(dim, k),
        proptest::collection::vec(rational_strategy(), dim),
        proptest::collection::vec(rational_strategy(), dim),
    );
    (
        proptest::collection::vec(rational_strategy(), dim),
        proptest::collection::vec(term, 0..=max_terms),
    )
        .prop_map(move |(c, terms)| {
            let mut f = TrigField::constant_field(c);
            for (m, a, b) in terms {
                f.add_term(m, a, b);
            }
            f
        })
}

/// Divergence-free field with up to `max_terms` terms in `[-k, k]^d`.
pub fn divfree_field_strategy(dim: usize, k: i64, max_terms: usize) -> impl Strategy<Value = ExactField> {
    (any::<u64>(), 0..=max_terms, any::<bool>()).prop_map(move |(seed, terms, constant)| {
        random_divfree_field(&mut rng(seed), dim, k, terms, constant)
    })
}

pub fn stream_strategy(k: i64, max_terms: usize) -> impl Strategy<Value = ExactStream> {
    let term = (mode_strategy(2, k), rational_strategy(), rational_strategy());
    (rational_strategy(), proptest::collection::vec(term, 0..=max_terms)).prop_map(|(c, terms)| {
        let mut h = TrigPoly::zero(2).with_constant(c);
        for (m, a, b) in terms {
            h.add_term(m, a, b);
        }
        h
    })
}
