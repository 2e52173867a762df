//! Closure of `Lie{f + u : u in R^d}`: the predicted classification and an
//! independent brute-force generator working inside a frequency box.
//!
//! Both sides are expressed as a [`ModeSpanTable`]: for every canonical mode
//! the subspace of achievable coefficient pairs `(a, b) in R^{2d}`. Because
//! the constant fields are in the algebra, every element's single-mode
//! components are in the algebra too (see [`isolate_mode`]), so the algebra
//! is exactly the direct sum of these per-mode subspaces.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{check_dim, check_torus_dim, Error, Result};
use crate::lattice::{self, LatticeSubgroup, Mode};
use crate::linalg::Subspace;
use crate::scalar::Scalar;
use crate::trigfield::{bracket_terms, CoeffPair, TrigField};

/// Shape of the closure as classified from the support and coefficients.
#[derive(Clone, Debug, PartialEq)]
pub enum ClosureKind<S> {
    /// All divergence-free fields with modes in the subgroup.
    FullLattice(LatticeSubgroup),
    /// Planar case with collinear modes: the full divergence-free span at
    /// each listed canonical mode (and its negative) only.
    PlanarDegenerate(BTreeSet<Mode>),
    /// Per canonical mode, the rotational orbit of the listed coefficient
    /// pair `span{(a, b), (b, -a)}`.
    T3Degenerate(BTreeMap<Mode, CoeffPair<S>>),
    Unclassified(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClosureDescriptor<S> {
    pub dim: usize,
    pub kind: ClosureKind<S>,
}

impl<S> ClosureDescriptor<S> {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ClosureKind::FullLattice(_) => "FullLattice",
            ClosureKind::PlanarDegenerate(_) => "PlanarDegenerate",
            ClosureKind::T3Degenerate(_) => "T3Degenerate",
            ClosureKind::Unclassified(_) => "Unclassified",
        }
    }

    pub fn is_classified(&self) -> bool {
        !matches!(self.kind, ClosureKind::Unclassified(_))
    }
}

/// Achievable coefficient pairs per canonical mode inside a box.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpanTable<S> {
    pub dim: usize,
    pub box_size: i64,
    /// Nonempty subspaces of `R^{2d}` only, keyed by canonical mode.
    pub table: BTreeMap<Mode, Subspace<S>>,
    pub constants: Subspace<S>,
    /// `false` when the generator hit its depth limit before a sweep added nothing.
    pub stabilized: bool,
    pub sweeps: usize,
}

impl<S: Scalar> ModeSpanTable<S> {
    pub fn empty(dim: usize, box_size: i64) -> Self {
        Self {
            dim,
            box_size,
            table: BTreeMap::new(),
            constants: Subspace::new(dim),
            stabilized: true,
            sweeps: 0,
        }
    }

    /// Dimension of the achieved subspace at `m` (either sign); `0` gives the constants.
    pub fn mode_dim(&self, m: &Mode) -> usize {
        if m.is_zero() {
            return self.constants.dim();
        }
        self.table.get(&m.canonical().0).map_or(0, Subspace::dim)
    }

    pub fn populated_modes(&self) -> Vec<Mode> {
        self.table.keys().copied().collect()
    }

    /// Populated modes with both signs.
    pub fn populated_support(&self) -> BTreeSet<Mode> {
        self.table.keys().flat_map(|&m| [m, -m]).collect()
    }

    /// Restriction to a smaller box.
    pub fn restrict(&self, box_size: i64) -> Self {
        Self {
            dim: self.dim,
            box_size: box_size.min(self.box_size),
            table: self
                .table
                .iter()
                .filter(|(m, _)| m.in_box(box_size))
                .map(|(m, s)| (*m, s.clone()))
                .collect(),
            constants: self.constants.clone(),
            stabilized: self.stabilized,
            sweeps: self.sweeps,
        }
    }

    /// One single-mode field per basis vector, constants first.
    pub fn basis_fields(&self) -> Vec<TrigField<S>> {
        let mut out: Vec<TrigField<S>> = self
            .constants
            .basis()
            .iter()
            .map(|c| TrigField::constant_field(c.clone()))
            .collect();
        for (m, span) in &self.table {
            for v in span.basis() {
                let p = CoeffPair::from_slice(v);
                out.push(TrigField::single(*m, p.a, p.b));
            }
        }
        out
    }

    /// Whether a field lies in the tabulated span.
    pub fn contains(&self, g: &TrigField<S>) -> bool {
        if g.dim() != self.dim || !self.constants.contains(g.constant()) {
            return false;
        }
        g.terms().all(|(m, p)| {
            self.table
                .get(m)
                .is_some_and(|span| span.contains(&p.to_vec()))
        })
    }
}

/// Per-mode relation between an oracle table and a predicted one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableComparison {
    /// Modes where the oracle found something outside the prediction.
    pub violations: Vec<Mode>,
    /// Modes where the prediction is strictly larger than the oracle.
    pub missing: Vec<Mode>,
}

impl TableComparison {
    pub fn sound(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn equal(&self) -> bool {
        self.violations.is_empty() && self.missing.is_empty()
    }

    pub fn verdict(&self) -> &'static str {
        if !self.sound() {
            "oracle exceeds predicted"
        } else if self.equal() {
            "oracle ⊆ predicted, equality on box"
        } else {
            "oracle ⊆ predicted, strict on box"
        }
    }
}

/// Compares two tables over the modes of either; the zero mode stands for the constants.
pub fn compare_tables<S: Scalar>(oracle: &ModeSpanTable<S>, predicted: &ModeSpanTable<S>) -> TableComparison {
    let mut violations = Vec::new();
    let mut missing = Vec::new();
    let zero = Mode::zero(oracle.dim);
    let mut check = |m: Mode, o: &Subspace<S>, p: &Subspace<S>| {
        if !o.is_subspace_of(p) {
            violations.push(m);
        } else if o.dim() < p.dim() {
            missing.push(m);
        }
    };
    check(zero, &oracle.constants, &predicted.constants);
    let modes: BTreeSet<Mode> = oracle.table.keys().chain(predicted.table.keys()).copied().collect();
    let empty = Subspace::new(2 * oracle.dim);
    for m in modes {
        let o = oracle.table.get(&m).unwrap_or(&empty);
        let p = predicted.table.get(&m).unwrap_or(&empty);
        check(m, o, p);
    }
    TableComparison { violations, missing }
}

/// `(m^perp)^2` inside `R^{2d}`: all coefficient pairs of a divergence-free term at `m`.
pub fn divergence_free_pairs<S: Scalar>(m: &Mode) -> Subspace<S> {
    let d = m.dim();
    let mv: Vec<S> = m.coords().iter().map(|&c| S::from_int(c)).collect();
    let perp = Subspace::spanned_by(d, [&mv]).orthogonal_complement();
    let mut out = Subspace::new(2 * d);
    for w in perp.basis() {
        let zeros = vec![S::zero(); d];
        out.insert(&[w.clone(), zeros.clone()].concat());
        out.insert(&[zeros, w.clone()].concat());
    }
    out
}

/// Rotational orbit plane `span{(a, b), (b, -a)}`.
pub fn orbit_plane<S: Scalar>(p: &CoeffPair<S>) -> Subspace<S> {
    let d = p.a.len();
    Subspace::spanned_by(2 * d, [&p.to_vec(), &p.quarter_turn().to_vec()])
}

/// Classifies the closure of `Lie{f + u}` from the support and coefficients of `f`.
/// The constant part of `f` is irrelevant because constants are in the algebra.
pub fn predicted_closure<S: Scalar>(f: &TrigField<S>) -> Result<ClosureDescriptor<S>> {
    let dim = f.dim();
    check_torus_dim(dim)?;
    if !f.is_divergence_free() {
        return Err(Error::NotDivergenceFree);
    }
    let modes = f.modes();
    let span_modes = lattice::span_dimension(&modes);
    let kind = if dim == 2 {
        if span_modes == 2 {
            ClosureKind::FullLattice(lattice::subgroup_generated(&modes)?)
        } else {
            ClosureKind::PlanarDegenerate(modes.into_iter().collect())
        }
    } else {
        let span_values = f.value_span_dimension();
        if span_modes == 3 && span_values == 3 {
            ClosureKind::FullLattice(lattice::subgroup_generated(&modes)?)
        } else if span_modes <= 1 || (span_modes == 2 && span_values == 1) {
            ClosureKind::T3Degenerate(f.terms().map(|(m, p)| (*m, p.clone())).collect())
        } else {
            ClosureKind::Unclassified(format!(
                "mode span {span_modes} with coefficient span {span_values} is not covered by the classification"
            ))
        }
    };
    Ok(ClosureDescriptor { dim, kind })
}

/// Exact membership of a field in the closure described by `c`.
pub fn membership<S: Scalar>(c: &ClosureDescriptor<S>, g: &TrigField<S>) -> Result<bool> {
    check_dim(c.dim, g.dim())?;
    if let ClosureKind::Unclassified(reason) = &c.kind {
        return Err(Error::Unclassified(reason.clone()));
    }
    if !g.is_divergence_free() {
        return Ok(false);
    }
    Ok(g.terms().all(|(m, p)| match &c.kind {
        ClosureKind::FullLattice(gamma) => gamma.contains(m),
        ClosureKind::PlanarDegenerate(set) => set.contains(m),
        ClosureKind::T3Degenerate(orbits) => orbits
            .get(m)
            .is_some_and(|q| orbit_plane(q).contains(&p.to_vec())),
        ClosureKind::Unclassified(_) => unreachable!(),
    }))
}

/// Tabulates the predicted closure on the box `|m_i| <= k`.
pub fn predicted_table<S: Scalar>(c: &ClosureDescriptor<S>, k: i64) -> Result<ModeSpanTable<S>> {
    let mut out = ModeSpanTable::empty(c.dim, k);
    out.constants = Subspace::full(c.dim);
    let mut put = |m: Mode, s: Subspace<S>| {
        if s.dim() > 0 {
            out.table.insert(m, s);
        }
    };
    match &c.kind {
        ClosureKind::FullLattice(gamma) => {
            for m in Mode::box_modes(c.dim, k).filter(|m| !m.is_zero() && m.is_canonical()) {
                if gamma.contains(&m) {
                    put(m, divergence_free_pairs(&m));
                }
            }
        }
        ClosureKind::PlanarDegenerate(set) => {
            for m in set.iter().filter(|m| m.in_box(k)) {
                put(*m, divergence_free_pairs(m));
            }
        }
        ClosureKind::T3Degenerate(orbits) => {
            for (m, p) in orbits.iter().filter(|(m, _)| m.in_box(k)) {
                put(*m, orbit_plane(p));
            }
        }
        ClosureKind::Unclassified(reason) => return Err(Error::Unclassified(reason.clone())),
    }
    Ok(out)
}

/// Extracts the `+-m0` component of `f` using only brackets with constant
/// fields, which shows that component lies in `Lie{f + u}`.
///
/// First, for every axis, each distinct value `v = |m_a| != |m0_a|` over the
/// support is removed by `v^2 + ad_a^2`, which scales mode `m` by
/// `v^2 - m_a^2`. What remains has `|m_a| = |m0_a|` on every axis, and the
/// relative signs are then fixed by `(m0_a m0_b - ad_a ad_b) / (2 m0_a m0_b)`
/// over consecutive nonzero axes of `m0`, which keeps `m` iff
/// `m_a m_b = m0_a m0_b`.
pub fn isolate_mode<S: Scalar>(f: &TrigField<S>, m0: &Mode) -> Result<TrigField<S>> {
    check_dim(f.dim(), m0.dim())?;
    let (key, _) = m0.canonical();
    if key.is_zero() || !f.modes().contains(&key) {
        return Err(Error::ModeNotInSupport(*m0));
    }
    let has_constant = !f.constant().iter().all(num_traits::Zero::is_zero);
    let mut g = f.clone();
    let mut gamma = S::one();
    for axis in 0..f.dim() {
        let target = key.coords()[axis].abs();
        let mut values: BTreeSet<i64> = f.modes().iter().map(|m| m.coords()[axis].abs()).collect();
        if has_constant {
            values.insert(0);
        }
        for v in values.into_iter().filter(|&v| v != target) {
            g = g.scale(&S::from_int(v * v)).add(&g.partial_ad(axis, 2));
            gamma = gamma * S::from_int(v * v - target * target);
        }
    }
    let nonzero: Vec<usize> = (0..f.dim()).filter(|&a| key.coords()[a] != 0).collect();
    for w in nonzero.windows(2) {
        let (a, b) = (w[0], w[1]);
        let prod = S::from_int(key.coords()[a] * key.coords()[b]);
        let adab = g.partial_ad(b, 1).partial_ad(a, 1);
        g = g.scale(&prod).sub(&adab);
        gamma = gamma * prod * S::from_int(2);
    }
    Ok(g.scale(&(S::one() / gamma)))
}

/// Dense index over all modes of the box `|m_i| <= k`.
struct BoxIndex {
    dim: usize,
    k: i64,
}

impl BoxIndex {
    fn len(&self) -> usize {
        ((2 * self.k + 1) as usize).pow(self.dim as u32)
    }

    fn index(&self, m: &Mode) -> Option<usize> {
        if !m.in_box(self.k) {
            return None;
        }
        let side = 2 * self.k + 1;
        let mut idx = 0i64;
        for &c in m.coords().iter().rev() {
            idx = idx * side + (c + self.k);
        }
        Some(idx as usize)
    }
}

/// Brute-force Lie algebra generation on the outer box `k_outer`, reported
/// in full (see [`bruteforce_closure`] for the inner-box report).
///
/// Sweeps bracket every element added in the previous sweep with every
/// element, discarding a bracket outright when any of its modes falls outside
/// the outer box, so every stored vector is an exact member of the algebra.
pub fn bruteforce_closure_outer<S: Scalar>(generators: &[TrigField<S>], k_outer: i64, max_depth: usize) -> Result<ModeSpanTable<S>> {
    let dim = generators.first().ok_or_else(|| Error::InvalidInput("no generators".into()))?.dim();
    check_torus_dim(dim)?;
    let mut constants = Subspace::<S>::new(dim);
    for g in generators {
        check_dim(dim, g.dim())?;
        constants.insert(g.constant());
    }
    if !constants.is_full() {
        return Err(Error::InvalidInput(
            "the constant parts of the generators must span all translations".into(),
        ));
    }

    let index = BoxIndex { dim, k: k_outer };
    let full_dim = 2 * (dim - 1);
    let mut spans: Vec<Option<Subspace<S>>> = vec![None; index.len()];
    // ad of a constant rotates a mode's pair by a quarter turn, so each span is closed under it
    let insert = |spans: &mut [Option<Subspace<S>>], m: Mode, p: &CoeffPair<S>| -> bool {
        let Some(i) = index.index(&m) else { return false };
        let span = spans[i].get_or_insert_with(|| Subspace::new(2 * dim));
        let grew_a = span.insert(&p.to_vec());
        let grew_b = span.insert(&p.quarter_turn().to_vec());
        grew_a || grew_b
    };

    let mut grown: BTreeSet<Mode> = BTreeSet::new();
    for g in generators {
        for (m, p) in g.terms() {
            if insert(&mut spans, *m, p) {
                grown.insert(*m);
            }
        }
    }

    let basis = |spans: &[Option<Subspace<S>>], m: Mode| -> Vec<CoeffPair<S>> {
        spans[index.index(&m).expect("stored modes lie in the box")]
            .as_ref()
            .map(|s| s.basis().iter().map(|v| CoeffPair::from_slice(v)).collect())
            .unwrap_or_default()
    };
    let open = |spans: &[Option<Subspace<S>>], k: Mode| -> bool {
        let (key, _) = k.canonical();
        !key.is_zero()
            && index
                .index(&key)
                .is_some_and(|i| spans[i].as_ref().map_or(0, Subspace::dim) < full_dim)
    };

    let mut sweeps = 0;
    let mut stabilized = grown.is_empty();
    while !grown.is_empty() && sweeps < max_depth {
        sweeps += 1;
        let populated: Vec<(Mode, Vec<CoeffPair<S>>)> = Mode::box_modes(dim, k_outer)
            .filter(|m| !m.is_zero() && m.is_canonical())
            .map(|m| (m, basis(&spans, m)))
            .filter(|(_, b)| !b.is_empty())
            .collect();
        let frontier: Vec<(Mode, Vec<CoeffPair<S>>)> = grown.iter().map(|&m| (m, basis(&spans, m))).collect();
        let mut next: BTreeSet<Mode> = BTreeSet::new();

        for (m, ps) in &frontier {
            for (n, qs) in &populated {
                // antisymmetry: a pair of frontier modes is visited once
                if grown.contains(n) && n < m {
                    continue;
                }
                let (sum, diff) = (*m + *n, *m - *n);
                for p in ps {
                    if !open(&spans, sum) && !open(&spans, diff) {
                        break;
                    }
                    for q in qs {
                        let out = bracket_terms(*m, p, *n, q);
                        if out.iter().any(|(k, _)| !k.in_box(k_outer)) {
                            continue;
                        }
                        for (k, r) in out {
                            if !k.is_zero() && insert(&mut spans, k, &r) {
                                next.insert(k);
                            }
                        }
                    }
                }
            }
        }
        stabilized = next.is_empty();
        grown = next;
    }

    let mut table = BTreeMap::new();
    for m in Mode::box_modes(dim, k_outer).filter(|m| !m.is_zero() && m.is_canonical()) {
        if let Some(s) = spans[index.index(&m).unwrap()].take() {
            if s.dim() > 0 {
                table.insert(m, s);
            }
        }
    }
    Ok(ModeSpanTable {
        dim,
        box_size: k_outer,
        table,
        constants,
        stabilized,
        sweeps,
    })
}

/// Brute-force generation on the outer box, reported on the inner box `k_inner`.
pub fn bruteforce_closure<S: Scalar>(
    generators: &[TrigField<S>],
    k_inner: i64,
    k_outer: i64,
    max_depth: usize,
) -> Result<ModeSpanTable<S>> {
    if k_inner > k_outer {
        return Err(Error::InvalidInput(format!("inner box {k_inner} exceeds outer box {k_outer}")));
    }
    Ok(bruteforce_closure_outer(generators, k_outer, max_depth)?.restrict(k_inner))
}

/// `f` together with the constant basis fields, the generators of `Lie{f + u}`.
pub fn control_generators<S: Scalar>(f: &TrigField<S>) -> Vec<TrigField<S>> {
    let mut gens = vec![f.clone()];
    gens.extend((0..f.dim()).map(|i| TrigField::unit(f.dim(), i)));
    gens
}
