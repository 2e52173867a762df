mod common;

use common::oracles::{check_pure_term_identities, exhaustive_members};
use common::*;
use proptest::prelude::*;
use torus_control::closure::{
    bruteforce_closure, compare_tables, control_generators, isolate_mode, membership, predicted_closure, predicted_table,
};
use torus_control::ensemble::lift_eval;
use torus_control::lattice::{dual_group, gcd_wedge_criterion, ik_closure, subgroup_generated};
use torus_control::scalar::rint;
use torus_control::trigfield::{from_stream, poisson};
use torus_control::{EnsembleState, Mode, Rational, TrigField};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric_and_bilinear(
        f in field_strategy(3, 3, 4),
        g in field_strategy(3, 3, 4),
        h in field_strategy(3, 3, 4),
        s in rational_strategy(),
    ) {
        prop_assert_eq!(f.bracket(&g).unwrap(), g.bracket(&f).unwrap().scale(&rint(-1)));
        let lhs = f.scale(&s).add(&g).bracket(&h).unwrap();
        let rhs = f.bracket(&h).unwrap().scale(&s).add(&g.bracket(&h).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn jacobi_identity(f in field_strategy(2, 3, 3), g in field_strategy(2, 3, 3), h in field_strategy(2, 3, 3)) {
        let cyclic = f.bracket(&g.bracket(&h).unwrap()).unwrap()
            .add(&g.bracket(&h.bracket(&f).unwrap()).unwrap())
            .add(&h.bracket(&f.bracket(&g).unwrap()).unwrap());
        prop_assert!(cyclic.is_zero());
    }

    #[test]
    fn bracket_preserves_divergence_free(f in divfree_field_strategy(3, 3, 4), g in divfree_field_strategy(3, 3, 4)) {
        prop_assert!(f.bracket(&g).unwrap().is_divergence_free());
    }

    #[test]
    fn bracket_matches_finite_difference(f in field_strategy(2, 3, 4), g in field_strategy(2, 3, 4), seed in any::<u64>()) {
        let (ff, gf) = (f.to_f64(), g.to_f64());
        let h = f.bracket(&g).unwrap().to_f64();
        for x in random_points(&mut rng(seed), 2, 20) {
            let (fx, gx) = (ff.evaluate(&x), gf.evaluate(&x));
            let step = 1e-5;
            let dir = |field: &TrigField<f64>, v: &[f64]| -> Vec<f64> {
                let plus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + step * b).collect();
                let minus: Vec<f64> = x.iter().zip(v).map(|(a, b)| a - step * b).collect();
                field.evaluate(&plus).iter().zip(field.evaluate(&minus)).map(|(p, m)| (p - m) / (2.0 * step)).collect()
            };
            let expected: Vec<f64> = dir(&gf, &fx).iter().zip(dir(&ff, &gx)).map(|(a, b)| a - b).collect();
            let got = h.evaluate(&x);
            let scale = 1.0 + expected.iter().map(|v| v.abs()).fold(0.0, f64::max);
            for (e, v) in expected.iter().zip(&got) {
                prop_assert!((e - v).abs() <= 1e-6 * scale, "{} vs {}", e, v);
            }
        }
    }

    #[test]
    fn arrow_map_is_a_homomorphism(h1 in stream_strategy(3, 4), h2 in stream_strategy(3, 4)) {
        let lhs = from_stream(&poisson(&h1, &h2).unwrap()).unwrap();
        let rhs = from_stream(&h1).unwrap().bracket(&from_stream(&h2).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pure_term_identities(seed in any::<u64>(), dim in 2usize..=3) {
        prop_assert_eq!(check_pure_term_identities(&mut rng(seed), dim, 3), Ok(()));
    }

    #[test]
    fn exact_translation_is_a_group_action(
        f in field_strategy(3, 3, 4),
        q1 in proptest::collection::vec(rational_strategy(), 3),
        q2 in proptest::collection::vec(rational_strategy(), 3),
    ) {
        // multiples of pi/2 keep every translated coefficient rational
        let quarter = |q: &Vec<Rational>| -> Vec<Rational> {
            q.iter().map(|x| (x * rint(2)).round() / rint(2)).collect()
        };
        let (q1, q2) = (quarter(&q1), quarter(&q2));
        let sum: Vec<Rational> = q1.iter().zip(&q2).map(|(a, b)| a + b).collect();
        let composed = f.translate_pi_multiple(&q1).unwrap().translate_pi_multiple(&q2).unwrap();
        prop_assert_eq!(composed, f.translate_pi_multiple(&sum).unwrap());
        prop_assert_eq!(f.translate_pi_multiple(&[rint(0), rint(0), rint(0)]).unwrap(), f);
    }

    #[test]
    fn isolation_equals_projection(seed in any::<u64>(), dim in 2usize..=3, terms in 1usize..=4) {
        let mut r = rng(seed);
        let f = random_field(&mut r, dim, 3, terms);
        for m in f.modes() {
            prop_assert_eq!(isolate_mode(&f, &m).unwrap(), f.mode_projection(&m));
            prop_assert_eq!(isolate_mode(&f, &-m).unwrap(), f.mode_projection(&m));
        }
    }

    #[test]
    fn dual_group_pairs_integrally(gens in proptest::collection::vec(mode_strategy(3, 3), 3..=4)) {
        let g = subgroup_generated(&gens).unwrap();
        prop_assume!(g.rank() == 3);
        let dual = dual_group(&g).unwrap();
        prop_assert_eq!(dual.quotient_reps.len() as u64, g.index().unwrap());
        for x in dual.quotient_reps.iter().chain(&dual.basis) {
            for y in &gens {
                prop_assert!(y.dot(x).is_integer());
            }
        }
    }

    #[test]
    fn ik_closure_lies_in_the_subgroup(gens in proptest::collection::vec(mode_strategy(2, 3), 1..=3), k in 2i64..=5) {
        let g = subgroup_generated(&gens).unwrap();
        for m in ik_closure(&gens, k).unwrap() {
            prop_assert!(m.in_box(k) && g.contains(&m));
        }
    }

    #[test]
    fn lift_of_bracket_is_bracket_of_lifts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (x, y) = (random_divfree_field(&mut r, 2, 2, 2, true), random_divfree_field(&mut r, 2, 2, 2, true));
        let gamma = random_ensemble(&mut r, 2, 3, 0.1);
        let lifted = lift_eval(&x.bracket(&y).unwrap(), &gamma).unwrap();
        // bracket of the lifts on the product, by central differences of the lifts
        let step = 1e-5;
        let directional = |field: &torus_control::ExactField, v: &[f64]| -> Vec<f64> {
            let shifted = |sign: f64| {
                let pts: Vec<Vec<f64>> = gamma
                    .points()
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.iter().enumerate().map(|(j, c)| c + sign * step * v[2 * i + j]).collect())
                    .collect();
                lift_eval(field, &EnsembleState::new(pts).unwrap()).unwrap()
            };
            shifted(1.0).iter().zip(shifted(-1.0)).map(|(a, b)| (a - b) / (2.0 * step)).collect()
        };
        let (xl, yl) = (lift_eval(&x, &gamma).unwrap(), lift_eval(&y, &gamma).unwrap());
        let expected: Vec<f64> = directional(&y, &xl).iter().zip(directional(&x, &yl)).map(|(a, b)| a - b).collect();
        let scale = 1.0 + expected.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (a, b) in lifted.iter().zip(&expected) {
            prop_assert!((a - b).abs() <= 1e-6 * scale, "{} vs {}", a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_is_sound_on_small_boxes(seed in any::<u64>(), dim in 2usize..=3) {
        let mut r = rng(seed);
        let f = random_divfree_field(&mut r, dim, 2, dim, false);
        let desc = predicted_closure(&f).unwrap();
        prop_assume!(desc.is_classified());
        let oracle = bruteforce_closure(&control_generators(&f), 2, 4, 3).unwrap();
        let cmp = compare_tables(&oracle, &predicted_table(&desc, 2).unwrap());
        prop_assert!(cmp.sound(), "{:?}", cmp.violations);
        for g in oracle.basis_fields() {
            prop_assert!(membership(&desc, &g).unwrap());
        }
    }
}

#[test]
fn gcd_criterion_and_membership_exhaustive_on_plane() {
    let modes: Vec<Mode> = Mode::box_modes(2, 3).filter(|m| !m.is_zero()).collect();
    let boxed: Vec<Mode> = Mode::box_modes(2, 3).collect();
    let n = modes.len();
    let mut sets: Vec<Vec<Mode>> = Vec::new();
    for i in 0..n {
        sets.push(vec![modes[i]]);
        for j in i + 1..n {
            sets.push(vec![modes[i], modes[j]]);
            for l in j + 1..n {
                sets.push(vec![modes[i], modes[j], modes[l]]);
            }
        }
    }
    assert_eq!(sets.len(), n + n * (n - 1) / 2 + n * (n - 1) * (n - 2) / 6);
    for s in &sets {
        let g = subgroup_generated(s).unwrap();
        assert_eq!(gcd_wedge_criterion(s).unwrap(), g.index() == Some(1), "{s:?}");
        // |c_i| <= |adj(M) m| / |det M| <= 18 for two independent generators in [-3, 3]^2
        let members = exhaustive_members(s, 3, 18);
        for m in &boxed {
            assert_eq!(g.contains(m), members.contains(m), "{s:?} {m}");
        }
    }
}

#[test]
fn ik_closure_fills_the_box_when_modes_span() {
    let mut r = rng(11);
    let mut checked = 0;
    while checked < 20 {
        let f = random_divfree_field(&mut r, 2, 2, 2, false);
        let modes = f.modes();
        if torus_control::lattice::span_dimension(&modes) < 2 {
            continue;
        }
        checked += 1;
        let g = subgroup_generated(&modes).unwrap();
        let expected: std::collections::BTreeSet<Mode> =
            Mode::box_modes(2, 3).filter(|m| !m.is_zero() && g.contains(m)).collect();
        assert_eq!(ik_closure(&modes, 3).unwrap(), expected, "{modes:?}");
        let oracle = bruteforce_closure(&control_generators(&f), 3, 8, 6).unwrap();
        assert_eq!(oracle.populated_support(), expected, "{modes:?}");
    }
}

#[test]
fn ensembles_are_generating_for_full_lattice_closures() {
    let mut r = rng(5);
    let f = random_vd_field(&mut r, 2, 2);
    // a sublattice of large index has few modes in a small box
    let table = predicted_table(&predicted_closure(&f).unwrap(), 6).unwrap();
    for n in 1..=4 {
        for _ in 0..5 {
            let gamma = random_ensemble(&mut r, 2, n, 0.2);
            let rep = torus_control::ensemble::bracket_generating_test(&table, &gamma).unwrap();
            assert!(rep.generating, "{rep:?} {:?} {:?} {:?}", f.modes(), gamma.points(), table.populated_modes());
        }
    }
}
