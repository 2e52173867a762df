//! Oracles independent of the library's own derivations: product-to-sum
//! expansions for the bracket formulas of pure trigonometric terms, and
//! exhaustive integer-combination search for lattice membership.

use std::collections::BTreeSet;

use rand::Rng;
use torus_control::scalar::{rational, rint};
use torus_control::{ExactField, Mode, Rational, TrigField};

use super::{perp_vector, random_mode};

#[derive(Clone, Copy, PartialEq)]
pub enum Phase {
    Cos,
    Sin,
}

fn scaled(p: &[Rational], c: &Rational) -> Vec<Rational> {
    p.iter().map(|x| x * c).collect()
}

fn dot(m: &Mode, v: &[Rational]) -> Rational {
    m.coords().iter().zip(v).map(|(&c, x)| rint(c) * x).sum()
}

/// `p * phase<m, .>`.
pub fn term(p: &[Rational], phase: Phase, m: Mode) -> ExactField {
    let mut f = TrigField::zero(m.dim());
    add_phase(&mut f, p, &rint(1), phase, m);
    f
}

fn add_phase(f: &mut ExactField, p: &[Rational], c: &Rational, phase: Phase, m: Mode) {
    let zero = vec![rint(0); p.len()];
    match phase {
        Phase::Cos => f.add_term(m, scaled(p, c), zero),
        Phase::Sin => f.add_term(m, zero, scaled(p, c)),
    }
}

/// `c p * s<m, .> * t<n, .>` expanded into `m + n` and `m - n` terms.
pub fn product(p: &[Rational], c: &Rational, s: Phase, m: Mode, t: Phase, n: Mode) -> ExactField {
    let half = c * rational(1, 2);
    let mut f = TrigField::zero(m.dim());
    let (sum, diff) = (m + n, m - n);
    match (s, t) {
        (Phase::Cos, Phase::Cos) => {
            add_phase(&mut f, p, &half, Phase::Cos, diff);
            add_phase(&mut f, p, &half, Phase::Cos, sum);
        }
        (Phase::Sin, Phase::Sin) => {
            add_phase(&mut f, p, &half, Phase::Cos, diff);
            add_phase(&mut f, p, &-half.clone(), Phase::Cos, sum);
        }
        (Phase::Sin, Phase::Cos) => {
            add_phase(&mut f, p, &half, Phase::Sin, sum);
            add_phase(&mut f, p, &half, Phase::Sin, diff);
        }
        (Phase::Cos, Phase::Sin) => {
            add_phase(&mut f, p, &half, Phase::Sin, sum);
            add_phase(&mut f, p, &-half.clone(), Phase::Sin, diff);
        }
    }
    f
}

/// Bracket with the opposite sign convention, `[X, Y] = (DX) Y - (DY) X`,
/// in which the formulas below are stated.
pub fn opposite_bracket(x: &ExactField, y: &ExactField) -> ExactField {
    y.bracket(x).unwrap()
}

/// Instantiates the pure-term bracket identities with random modes in
/// `[-k, k]^d`, `p` orthogonal to `m` and `q` orthogonal to `n`. Returns the
/// name of the first identity that fails.
pub fn check_pure_term_identities(r: &mut impl Rng, dim: usize, k: i64) -> Result<(), String> {
    use Phase::{Cos, Sin};
    let (m, n) = (random_mode(r, dim, k), random_mode(r, dim, k));
    let (p, q) = (perp_vector(r, &m), perp_vector(r, &n));
    let (mq, np) = (dot(&m, &q), dot(&n, &p));
    let pb = |s, t| opposite_bracket(&term(&p, s, m), &term(&q, t, n));
    let check = |name: &str, lhs: ExactField, rhs: ExactField| {
        if lhs == rhs {
            Ok(())
        } else {
            Err(format!("{name} fails for m = {m}, n = {n}, p = {p:?}, q = {q:?}"))
        }
    };

    check("sin-cos", pb(Sin, Cos), product(&p, &mq, Cos, m, Cos, n).add(&product(&q, &np, Sin, m, Sin, n)))?;
    check("cos-sin", pb(Cos, Sin), product(&p, &-mq.clone(), Sin, m, Sin, n).add(&product(&q, &-np.clone(), Cos, m, Cos, n)))?;
    check("cos-cos", pb(Cos, Cos), product(&p, &-mq.clone(), Sin, m, Cos, n).add(&product(&q, &np, Cos, m, Sin, n)))?;
    check("sin-sin", pb(Sin, Sin), product(&p, &mq, Cos, m, Sin, n).add(&product(&q, &-np.clone(), Sin, m, Cos, n)))?;

    let w: Vec<Rational> = p.iter().zip(&q).map(|(a, b)| a * &mq - b * &np).collect();
    check("sum sin", pb(Sin, Sin).sub(&pb(Cos, Cos)), term(&w, Sin, m + n))?;
    check("sum cos", pb(Cos, Sin).add(&pb(Sin, Cos)), term(&w, Cos, m + n))?;

    let (a, b) = (perp_vector(r, &m), perp_vector(r, &m));
    let (c, d) = (perp_vector(r, &n), perp_vector(r, &n));
    let x = term(&a, Cos, m).add(&term(&b, Sin, m));
    let y = term(&c, Cos, n).add(&term(&d, Sin, n));
    let x_rot = term(&scaled(&a, &rint(-1)), Sin, m).add(&term(&b, Cos, m));
    let y_rot = term(&scaled(&c, &rint(-1)), Sin, n).add(&term(&d, Cos, n));
    let lhs = opposite_bracket(&x, &y).sub(&opposite_bracket(&x_rot, &y_rot));
    let comb = |terms: [(&Rational, &Vec<Rational>); 4]| -> Vec<Rational> {
        (0..dim).map(|i| terms.iter().map(|(s, v)| *s * &v[i]).sum()).collect()
    };
    let (mc, md, nb, na) = (dot(&m, &c), dot(&m, &d), dot(&n, &b), dot(&n, &a));
    let (neg_nb, neg_na, neg_mc, neg_nb2) = (-nb.clone(), -na.clone(), -mc.clone(), -nb.clone());
    let cos_coeff = comb([(&mc, &b), (&md, &a), (&neg_nb, &c), (&neg_na, &d)]);
    let sin_coeff = comb([(&md, &b), (&neg_mc, &a), (&neg_nb2, &d), (&na, &c)]);
    check("rotated pair", lhs, term(&cos_coeff, Cos, m + n).add(&term(&sin_coeff, Sin, m + n)))
}

/// Modes of the box `[-k, k]^d` reachable as `sum c_i s_i` with `|c_i| <= bound`.
/// The last coefficient is solved for instead of enumerated.
pub fn exhaustive_members(set: &[Mode], k: i64, bound: i64) -> BTreeSet<Mode> {
    let dim = set.first().map_or(2, Mode::dim);
    let mut out = BTreeSet::new();
    if set.is_empty() {
        out.insert(Mode::zero(dim));
        return out;
    }
    let (last, init) = set.split_last().unwrap();
    let mut coeffs = vec![-bound; init.len()];
    loop {
        let acc: Vec<i64> = (0..dim)
            .map(|j| init.iter().zip(&coeffs).map(|(s, c)| c * s.coords()[j]).sum())
            .collect();
        // c with |acc_j + c s_j| <= k on every coordinate
        let (mut lo, mut hi) = (-bound, bound);
        for (a, &s) in acc.iter().zip(last.coords()) {
            if s == 0 {
                if a.abs() > k {
                    hi = lo - 1;
                }
            } else {
                let (x, y) = ((-k - a) as f64 / s as f64, (k - a) as f64 / s as f64);
                lo = lo.max(x.min(y).ceil() as i64);
                hi = hi.min(x.max(y).floor() as i64);
            }
        }
        for c in lo..=hi {
            let m: Vec<i64> = acc.iter().zip(last.coords()).map(|(a, s)| a + c * s).collect();
            out.insert(Mode::new(&m));
        }
        let Some(i) = coeffs.iter().position(|&c| c < bound) else { break };
        coeffs[i] += 1;
        coeffs[..i].iter_mut().for_each(|c| *c = -bound);
    }
    out
}
