use std::sync::OnceLock;

use umbilic::family::{perturb, symmetric_umbilic, Perturbation};
use umbilic::strata::build::{build_strata, Strata, StrataConfig};
use umbilic::strata::caustic::{trace_caustic, CausticConfig};
use umbilic::strata::geom::{dist, segment_intersection};
use umbilic::strata::scan::{scan, Configuration};
use umbilic::strata::walls::WallEnd;
use umbilic::strata::{RegionGraph, WallKind};

fn strata() -> &'static Strata {
    static S: OnceLock<Strata> = OnceLock::new();
    S.get_or_init(|| {
        let f = perturb(&symmetric_umbilic(), &Perturbation::radial(0.1)).unwrap();
        build_strata(&f, &StrataConfig::default()).unwrap()
    })
}

#[test]
fn fold_preimages_are_degenerate() {
    let st = strata();
    for c in &st.caustic.curves {
        for y in &c.preimage {
            assert!(st.f.hessian_det(*y).abs() < 1e-6, "det {} at {y:?}", st.f.hessian_det(*y));
        }
    }
}

#[test]
fn json_round_trip_is_byte_identical() {
    let g = &strata().graph;
    let a = g.to_json();
    let b = RegionGraph::from_json(&a).unwrap().to_json();
    assert_eq!(a, b);
}

#[test]
fn twist_lines_start_at_their_cusps_and_are_disjoint() {
    let g = &strata().graph;
    let twists: Vec<_> = g.walls_of_kind(WallKind::TwistLine).collect();
    assert_eq!(twists.len(), 3);
    for w in &twists {
        let c = &g.cusps[w.cusp.unwrap()];
        assert!(dist(w.polyline[0], c.point) < 1e-9);
    }
    for (i, a) in twists.iter().enumerate() {
        for b in &twists[i + 1..] {
            for s in a.polyline.windows(2) {
                for t in b.polyline.windows(2) {
                    assert!(segment_intersection(s[0], s[1], t[0], t[1]).is_none());
                }
            }
        }
    }
}

#[test]
fn every_fold_separates_four_from_two_points() {
    let g = &strata().graph;
    let folds: Vec<_> = g.walls_of_kind(WallKind::Fold).collect();
    assert_eq!(folds.len(), 3);
    for w in folds {
        let (l, r) = (&g.regions[w.left], &g.regions[w.right]);
        assert_ne!(l.inside, r.inside, "fold {}", w.id);
        for reg in [l, r] {
            let fb = strata().labelled_fiber(reg.rep.as_array()).unwrap();
            assert_eq!(fb.points.len(), if reg.inside { 4 } else { 2 });
        }
    }
}

#[test]
fn walls_end_at_cusps() {
    let st = strata();
    assert_eq!(st.traced.len(), 3);
    let mut cusps: Vec<usize> = st
        .traced
        .iter()
        .map(|w| match w.start {
            WallEnd::Cusp(k) => k,
            other => panic!("wall starts at {other:?}"),
        })
        .collect();
    cusps.sort();
    assert_eq!(cusps, vec![0, 1, 2]);
}

#[test]
fn cusps_stable_under_refinement() {
    let f = perturb(&symmetric_umbilic(), &Perturbation::radial(0.1)).unwrap();
    let coarse = trace_caustic(&f, &CausticConfig::default()).unwrap();
    let fine_cfg = CausticConfig {
        scan_rays: 144,
        scan_samples: 800,
        max_step: 5e-4,
        image_step: 5e-4,
        ..CausticConfig::default()
    };
    let fine = trace_caustic(&f, &fine_cfg).unwrap();
    assert_eq!(coarse.cusp_count(), fine.cusp_count());
    for c in coarse.cusps() {
        let d = fine.cusps().map(|k| dist(k.point, c.point)).fold(f64::INFINITY, f64::min);
        assert!(d < 1e-4, "cusp {:?} moved by {d}", c.point);
    }
}

#[test]
fn unperturbed_base_has_three_half_lines() {
    let f = symmetric_umbilic();
    let st = build_strata(&f, &StrataConfig::default()).unwrap();
    assert!(st.caustic.point.is_some());
    let walls: Vec<_> = st.graph.walls_of_kind(WallKind::Bifurcation).collect();
    assert_eq!(walls.len(), 3);
    assert_eq!(st.graph.regions.len(), 3);
    let mut angles: Vec<f64> = walls
        .iter()
        .map(|w| {
            let p = w.polyline.last().unwrap();
            p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU)
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    let third = std::f64::consts::TAU / 3.0;
    for (k, a) in angles.iter().enumerate() {
        assert!((a - k as f64 * third).abs() < 1e-2, "angles {angles:?}");
    }
}

#[test]
fn scan_reports_cusp_terminated_walls() {
    let p = Perturbation::radial(0.1).with_extra(2, 1, 0.05).with_extra(1, 0, 0.01).with_extra(0, 2, 0.03);
    let out = scan(&symmetric_umbilic(), &[p], &StrataConfig::default());
    assert_eq!(out.len(), 1);
    let e = &out[0];
    assert_eq!(e.error, None);
    assert_eq!(e.configuration, Some(Configuration::CuspTerminated));
    assert_eq!(e.inside_incidences, vec![[1, 1, 1]]);
    assert_eq!(e.walls, 3);
}
