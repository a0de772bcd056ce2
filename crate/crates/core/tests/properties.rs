use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use umbilic::continuation::TrackConfig;
use umbilic::family::{elliptic_umbilic, perturb, symmetric_umbilic, BasePoint, Perturbation};
use umbilic::homology::{
    bifurcation_glue, elementary, homology_fibre, solve_tau, HomologyFibre, Incidence, MorseComplex,
};
use umbilic::mirror::{frame_weight, sheets, SheetPatch};
use umbilic::monodromy::{compose_loop, fixtures, random_loop, GluePolicy};
use umbilic::strata::WallKind;

fn incidence() -> impl Strategy<Value = Incidence> {
    (0i64..=1, 0i64..=1, 0i64..=1)
        .prop_filter("nonzero", |(a, b, c)| a + b + c > 0)
        .prop_map(|(a, b, c)| [a, b, c])
}

fn pair() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=3, 1usize..=3).prop_filter("distinct", |(i, j)| i != j)
}

#[test]
fn fixture_glue_maps_are_unimodular() {
    for f in fixtures::all().unwrap() {
        for w in &f.graph.walls {
            let g = w.glue.as_ref().unwrap();
            assert_eq!(g.det().abs(), 1, "{} wall {}", f.name, w.id);
            if g.chain_map.rows == g.chain_map.cols {
                assert_eq!(g.chain_map.det().abs(), 1, "{} wall {}", f.name, w.id);
            }
        }
    }
}

#[test]
fn outside_homology_has_rank_two() {
    for (a, b) in [(1, 2), (1, 3), (2, 3)] {
        let c = MorseComplex::outside(a, b).unwrap();
        assert!(c.d_squared().to_rows().iter().flatten().all(|&v| v == 0));
        assert_eq!(homology_fibre(&c).unwrap().rank(), 2);
    }
}

#[test]
fn fixture_regions_have_rank_two() {
    for f in fixtures::all().unwrap() {
        for r in &f.graph.regions {
            assert_eq!(r.fibre().unwrap().rank(), 2, "{} region {}", f.name, r.id);
        }
    }
}

#[test]
fn legendre_gradient_on_grid() {
    let cases = [
        (elliptic_umbilic(), [0.8, 0.3], [1.2, 0.7]),
        (
            perturb(&symmetric_umbilic(), &Perturbation::radial(0.1)).unwrap(),
            [0.3, 0.3],
            [0.6, 0.6],
        ),
    ];
    for (f, lo, hi) in &cases {
        let anchor = BasePoint::new(0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]));
        let patch = SheetPatch::new(f, anchor, TrackConfig::default()).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let x = BasePoint::new(
                    lo[0] + (hi[0] - lo[0]) * i as f64 / 9.0,
                    lo[1] + (hi[1] - lo[1]) * j as f64 / 9.0,
                );
                let err = patch.gradient_error(x, 1e-4).unwrap();
                assert!(err < 1e-5, "gradient error {err} at {x:?}");
            }
        }
    }
}

proptest! {
    #[test]
    fn d_squared_vanishes(i in incidence()) {
        let c = MorseComplex::inside(i);
        prop_assert!(c.d_squared().to_rows().iter().flatten().all(|&v| v == 0));
    }

    #[test]
    fn inside_homology_has_rank_two(i in incidence()) {
        let h = HomologyFibre::inside(i).unwrap();
        prop_assert_eq!(h.rank(), 2);
    }

    #[test]
    fn wall_glue_is_unimodular(iu in incidence(), (i, j) in pair(), tau in -1i64..=1) {
        let iv = elementary(3, i, j, tau).apply(&iu);
        prop_assume!(iv.iter().all(|v| (0..=1).contains(v)) && iv.iter().any(|&v| v != 0));
        let iv: Incidence = [iv[0], iv[1], iv[2]];
        let src = HomologyFibre::inside(iu).unwrap();
        let dst = HomologyFibre::inside(iv).unwrap();
        let g = bifurcation_glue(&src, &dst, &elementary(3, i, j, tau)).unwrap();
        prop_assert_eq!(g.det().abs(), 1);
        match solve_tau(iu, iv, i, j).unwrap() {
            Some(t) => prop_assert_eq!(t, tau),
            None => prop_assert_eq!(iu, iv),
        }
    }

    #[test]
    fn weight_modulus_ignores_w(
        h in -5.0f64..5.0,
        a in -5.0f64..5.0,
        d in prop::array::uniform2(-3.0f64..3.0),
        w in prop::array::uniform2(-10.0f64..10.0),
    ) {
        let m0 = frame_weight(h, a, d, [0.0, 0.0]).unwrap().norm();
        let m1 = frame_weight(h, a, d, w).unwrap().norm();
        prop_assert!((m0 - m1).abs() <= 1e-12 * m0);
    }

    #[test]
    fn sheets_solve_the_gradient_equation(r in 0.05f64..1.0, t in 0.0f64..std::f64::consts::TAU) {
        let f = elliptic_umbilic();
        let x = BasePoint::polar(r, t);
        let sd = sheets(&f, x, &TrackConfig::default()).unwrap();
        prop_assert_eq!(sd.sheets.len(), 2);
        prop_assert!(sd.residual(&f) < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn loops_are_functorial(seed in any::<u64>(), which in 0usize..100, steps in 1usize..12) {
        let all = fixtures::all().unwrap();
        let f = &all[which % all.len()];
        let g = &f.graph;
        let mut rng = StdRng::seed_from_u64(seed);
        let base = f.main_loop.base;
        let l1 = random_loop(g, base, steps, &mut rng).unwrap();
        let l2 = random_loop(g, base, steps, &mut rng).unwrap();
        for policy in [GluePolicy::ALL, GluePolicy::NO_TWIST] {
            // twist lines without a cusp case cannot be crossed by continuation
            if policy == GluePolicy::NO_TWIST && g.walls.iter().any(|w| w.kind == WallKind::TwistLine && w.cusp.is_none()) {
                continue;
            }
            let m1 = compose_loop(g, &l1, policy).unwrap().matrix;
            let m2 = compose_loop(g, &l2, policy).unwrap().matrix;
            let m12 = compose_loop(g, &l1.concat(&l2).unwrap(), policy).unwrap().matrix;
            prop_assert_eq!(m12, m2.mul(&m1));
            let inv = compose_loop(g, &l1.inverse(), policy).unwrap().matrix;
            prop_assert!(inv.mul(&m1).is_identity());
            prop_assert_eq!(Some(inv), m1.inverse());
        }
    }
}
