//! One line per acceptance criterion. Exits nonzero if any fails.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use umbilic::continuation::TrackConfig;
use umbilic::error::Result;
use umbilic::family::{elliptic_umbilic, perturb, symmetric_umbilic, BasePoint, Perturbation};
use umbilic::homology::{cusp_case_matrix, elementary, homology_fibre, IMat, MorseComplex};
use umbilic::mirror::SheetPatch;
use umbilic::monodromy::{
    circle_loop, compose_loop, cusp_monodromy, fixtures, random_loop, sheet_monodromy, verify_fixture_suite,
    GluePolicy, SuiteEntry,
};
use umbilic::strata::build::{build_strata, Strata, StrataConfig};
use umbilic::strata::caustic::require_closed;
use umbilic::strata::WallKind;

const SHEET_TOL: f64 = 1e-6;
const ANGLE_TOL: f64 = 1e-2;
const OUTER_RADIUS: f64 = 0.5;
const REGION_SAMPLES: usize = 20;
const GRADIENT_TOL: f64 = 1e-5;
const RANDOM_LOOPS: usize = 50;

struct Outcome {
    passed: bool,
    detail: String,
}

fn report(n: usize, title: &str, elapsed: Duration, out: Result<Outcome>) -> bool {
    let (passed, detail) = match out {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "criterion {n} [{}] {title} ({:.2} s): {detail}",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    passed
}

fn entries<'a>(suite: &'a [SuiteEntry], names: &[&str]) -> Vec<&'a SuiteEntry> {
    suite.iter().filter(|e| names.iter().any(|n| e.name.starts_with(n))).collect()
}

fn summarize(es: &[&SuiteEntry], expected: usize) -> Outcome {
    let failed: Vec<String> = es.iter().filter(|e| !e.passed).map(|e| format!("{} ({})", e.name, e.detail)).collect();
    Outcome {
        passed: failed.is_empty() && es.len() == expected,
        detail: if failed.is_empty() {
            format!("{} identities exact", es.len())
        } else {
            format!("failed: {}", failed.join("; "))
        },
    }
}

fn criterion_1(suite: &[SuiteEntry], elapsed: Duration) -> Result<Outcome> {
    let es = entries(suite, &["crossing_four_regions.product", "crossing_five_regions.product", "outer_ring.product"]);
    let mut o = summarize(&es, 3);
    if elapsed > Duration::from_secs(1) {
        o.passed = false;
        o.detail += "; slower than 1 s";
    }
    Ok(o)
}

fn criterion_2(suite: &[SuiteEntry]) -> Result<Outcome> {
    Ok(summarize(&entries(suite, &["fold_endpoint_outside_wall", "fold_endpoint_reentry"]), 2))
}

fn criterion_3(suite: &[SuiteEntry], st: Option<&Strata>) -> Result<Outcome> {
    let mut o = summarize(&entries(suite, &["cusp_"]), 12);
    let Some(st) = st else { return Ok(o) };
    let g = &st.graph;
    let mut realized = Vec::new();
    for c in &g.cusps {
        let case = c.case.ok_or_else(|| umbilic::error::Error::UnknownCase(format!("cusp {}", c.id)))?;
        let m = cusp_monodromy(g, c.id)?;
        let ok = m == cusp_case_matrix(c.pair, case)?;
        o.passed &= ok;
        realized.push(format!("{:?} {case:?} {}", c.pair, if ok { "ok" } else { "mismatch" }));
    }
    o.detail += &format!("; numeric cusps: {}", realized.join(", "));
    Ok(o)
}

fn criterion_4() -> Result<Outcome> {
    let swap = IMat::m2(0, 1, 1, 0);
    let cfg = TrackConfig::default();
    let plain = sheet_monodromy(&elliptic_umbilic(), &circle_loop(BasePoint::ORIGIN, 1.0, 128), &cfg, SHEET_TOL)?;
    let f = perturb(&symmetric_umbilic(), &Perturbation::radial(0.1))?;
    let pert = sheet_monodromy(&f, &circle_loop(BasePoint::ORIGIN, OUTER_RADIUS, 128), &cfg, SHEET_TOL)?;
    Ok(Outcome {
        passed: plain.matrix == swap && pert.matrix == swap,
        detail: format!(
            "unperturbed {:?}, perturbed {:?}, mismatch {:.1e}",
            plain.matrix.to_rows(),
            pert.matrix.to_rows(),
            plain.mismatch.max(pert.mismatch)
        ),
    })
}

fn ray_deviation(p: [f64; 2]) -> f64 {
    let a = p[1].atan2(p[0]);
    (0..3)
        .map(|k| {
            let d = (a - k as f64 * TAU / 3.0).rem_euclid(TAU);
            d.min(TAU - d)
        })
        .fold(f64::INFINITY, f64::min)
}

fn region_samples(st: &Strata, region: usize, rng: &mut StdRng) -> Vec<[f64; 2]> {
    let w = &st.config.window;
    let inside = st.graph.regions[region].inside;
    let (lo, hi) = if inside {
        let ring = &require_closed(&st.caustic).expect("closed caustic").image;
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in ring {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    } else {
        (w.lo, w.hi)
    };
    let margin = 2e-3;
    let mut out = Vec::new();
    for _ in 0..200_000 {
        if out.len() == REGION_SAMPLES {
            break;
        }
        let p = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
        if st.caustic.distance(p) < margin || st.locate(p) != Some(region) {
            continue;
        }
        let near_wall = st
            .graph
            .walls
            .iter()
            .any(|w| umbilic::strata::geom::point_polyline_distance(p, &w.polyline).0 < margin);
        if !near_wall {
            out.push(p);
        }
    }
    out
}

fn criterion_5(st: &Strata, elapsed: Duration) -> Result<Outcome> {
    let mut problems = Vec::new();
    let closed = st.caustic.closed_count();
    let cusps = st.caustic.cusp_count();
    if closed != 1 || st.caustic.curves.len() != 1 || cusps != 3 {
        problems.push(format!("{closed} closed curves, {cusps} cusps"));
    }

    let mut worst: f64 = 0.0;
    for w in st.graph.walls_of_kind(WallKind::Bifurcation) {
        for p in &w.polyline {
            if p[0].hypot(p[1]) > OUTER_RADIUS {
                worst = worst.max(ray_deviation(*p));
            }
        }
    }
    if worst > ANGLE_TOL {
        problems.push(format!("angular deviation {worst:.2e}"));
    }

    let mut checked_walls = 0;
    for w in st.graph.walls_of_kind(WallKind::Bifurcation) {
        let (l, r) = (&st.graph.regions[w.left], &st.graph.regions[w.right]);
        if let (Some(iu), Some(iv), Some((i, j)), Some(t)) = (l.incidence, r.incidence, w.pair, w.tau) {
            checked_walls += 1;
            if elementary(3, i, j, t).apply(&iu) != iv.to_vec() {
                problems.push(format!("wall {} violates E I(U) = I(V)", w.id));
            }
        }
    }

    let mut rng = StdRng::seed_from_u64(5);
    let mut samples = 0;
    for reg in &st.graph.regions {
        let pts = region_samples(st, reg.id, &mut rng);
        if pts.len() < REGION_SAMPLES {
            problems.push(format!("region {} yielded only {} samples", reg.id, pts.len()));
        }
        for p in pts {
            samples += 1;
            if reg.inside {
                let got = st.incidence_at(p)?;
                if Some(got) != reg.incidence {
                    problems.push(format!("region {} sample {p:?} has incidence {got:?}", reg.id));
                }
            } else {
                let fb = st.labelled_fiber(p)?;
                let mut labels: Vec<usize> = fb.saddles().filter_map(|s| s.label.saddle_index()).map(|k| k + 1).collect();
                labels.sort();
                if labels != reg.labels || fb.points.len() != 2 {
                    problems.push(format!("region {} sample {p:?} has labels {labels:?}", reg.id));
                }
            }
        }
    }
    if elapsed > Duration::from_secs(120) {
        problems.push("slower than 2 min".into());
    }
    Ok(Outcome {
        passed: problems.is_empty(),
        detail: format!(
            "{closed} closed curve, {cusps} cusps, max ray deviation {worst:.1e}, {checked_walls} walls with incidences on both sides, {samples} region samples{}",
            if problems.is_empty() { String::new() } else { format!("; problems: {}", problems.join("; ")) }
        ),
    })
}

fn criterion_6(st: &Strata) -> Result<Outcome> {
    let l = st.global_loop(OUTER_RADIUS)?;
    let plain = compose_loop(&st.graph, &l, GluePolicy::NO_TWIST)?;
    let full = compose_loop(&st.graph, &l, GluePolicy::ALL)?;
    Ok(Outcome {
        passed: plain.trace == 0 && plain.det == -1 && full.is_identity,
        detail: format!(
            "without twists {:?} (trace {}, det {}), with twists {:?}",
            plain.matrix.to_rows(),
            plain.trace,
            plain.det,
            full.matrix.to_rows()
        ),
    })
}

fn criterion_7(st: &Strata) -> Result<Outcome> {
    let mut problems = Vec::new();
    let fx = fixtures::all()?;
    let graphs = fx.iter().map(|f| (f.name, &f.graph)).chain(std::iter::once(("numeric", &st.graph)));
    let mut glue_count = 0;
    let mut region_count = 0;
    for (name, g) in graphs {
        for w in &g.walls {
            if let Some(gl) = &w.glue {
                glue_count += 1;
                if gl.det().abs() != 1 {
                    problems.push(format!("{name} wall {} det {}", w.id, gl.det()));
                }
            }
        }
        for r in &g.regions {
            region_count += 1;
            let c = match r.incidence {
                Some(i) => MorseComplex::inside(i),
                None => MorseComplex::outside(r.labels[0], r.labels[1])?,
            };
            if !c.d_squared().to_rows().iter().flatten().all(|&v| v == 0) {
                problems.push(format!("{name} region {} has d^2 != 0", r.id));
            }
            if homology_fibre(&c)?.rank() != 2 {
                problems.push(format!("{name} region {} rank != 2", r.id));
            }
        }
    }

    let f = elliptic_umbilic();
    let patch = SheetPatch::new(&f, BasePoint::new(1.0, 0.5), TrackConfig::default())?;
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            let x = BasePoint::new(0.8 + 0.4 * i as f64 / 9.0, 0.3 + 0.4 * j as f64 / 9.0);
            worst = worst.max(patch.gradient_error(x, 1e-4)?);
        }
    }
    if worst > GRADIENT_TOL {
        problems.push(format!("Legendre gradient error {worst:.1e}"));
    }

    let mut rng = StdRng::seed_from_u64(7);
    for k in 0..RANDOM_LOOPS {
        let fxt = &fx[k % fx.len()];
        let g = &fxt.graph;
        let base = fxt.main_loop.base;
        let l1 = random_loop(g, base, 1 + k % 10, &mut rng)?;
        let l2 = random_loop(g, base, 1 + (k * 7) % 10, &mut rng)?;
        let m1 = compose_loop(g, &l1, GluePolicy::ALL)?.matrix;
        let m2 = compose_loop(g, &l2, GluePolicy::ALL)?.matrix;
        let m12 = compose_loop(g, &l1.concat(&l2)?, GluePolicy::ALL)?.matrix;
        let inv = compose_loop(g, &l1.inverse(), GluePolicy::ALL)?.matrix;
        if m12 != m2.mul(&m1) || !inv.mul(&m1).is_identity() {
            problems.push(format!("loop {k} in {} breaks functoriality", fxt.name));
        }
    }
    Ok(Outcome {
        passed: problems.is_empty(),
        detail: format!(
            "{glue_count} glue maps, {region_count} regions, gradient error {worst:.1e}, {RANDOM_LOOPS} random loops{}",
            if problems.is_empty() { String::new() } else { format!("; problems: {}", problems.join("; ")) }
        ),
    })
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn main() {
    let mut ok = true;

    let (built, tb) = timed(|| {
        let f = perturb(&symmetric_umbilic(), &Perturbation::radial(0.1))?;
        build_strata(&f, &StrataConfig::default())
    });

    let (suite, t1) = timed(verify_fixture_suite);
    ok &= report(1, "exact identity suite", t1, criterion_1(&suite, t1));
    ok &= report(2, "caustic-limit suite", t1, criterion_2(&suite));
    ok &= report(3, "cusp suite", t1, criterion_3(&suite, built.as_ref().ok()));

    let (o4, t4) = timed(criterion_4);
    let o4 = o4.map(|mut o| {
        if t4 > Duration::from_secs(5) {
            o.passed = false;
            o.detail += "; slower than 5 s";
        }
        o
    });
    ok &= report(4, "sheet monodromy", t4, o4);

    match built {
        Ok(st) => {
            let (o5, t5) = timed(|| criterion_5(&st, tb));
            ok &= report(5, "numerical stratification", tb + t5, o5);
            let (o6, t6) = timed(|| criterion_6(&st));
            ok &= report(6, "global monodromy", t6, o6);
            let (o7, t7) = timed(|| criterion_7(&st));
            ok &= report(7, "property suite", t7, o7);
        }
        Err(e) => {
            for (n, title) in [(5, "numerical stratification"), (6, "global monodromy"), (7, "property suite")] {
                ok &= report(n, title, tb, Err(e.clone()));
            }
        }
    }

    if !ok {
        std::process::exit(1);
    }
}
