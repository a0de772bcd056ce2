use criterion::{black_box, criterion_group, criterion_main, Criterion};

use umbilic::continuation::TrackConfig;
use umbilic::family::{critical_points, BasePoint, SolverConfig};
use umbilic::flow::{asymptotic_sectors, incidence_matrix, FlowConfig};
use umbilic::monodromy::{circle_loop, compose_loop, fixtures, sheet_monodromy, verify_fixture_suite, GluePolicy};
use umbilic::strata::caustic::{trace_caustic, CausticConfig};
use umbilic_bench::perturbed;

fn fibers(c: &mut Criterion) {
    let f = perturbed(0.1);
    let cfg = SolverConfig::default();
    c.bench_function("critical_points/inside", |b| {
        b.iter(|| critical_points(&f, black_box(BasePoint::new(0.001, 0.002)), &cfg).unwrap())
    });
    c.bench_function("critical_points/outside", |b| {
        b.iter(|| critical_points(&f, black_box(BasePoint::new(0.4, 0.3)), &cfg).unwrap())
    });
    let sectors = asymptotic_sectors(&f).unwrap();
    let fb = critical_points(&f, BasePoint::new(0.001, 0.002), &cfg).unwrap();
    let flow = FlowConfig { keep_samples: false, ..FlowConfig::default() };
    c.bench_function("incidence_matrix", |b| {
        b.iter(|| incidence_matrix(&f, black_box(&fb), &sectors, &flow).unwrap())
    });
}

fn curves(c: &mut Criterion) {
    let f = perturbed(0.1);
    c.bench_function("trace_caustic", |b| b.iter(|| trace_caustic(black_box(&f), &CausticConfig::default()).unwrap()));
    let path = circle_loop(BasePoint::ORIGIN, 0.5, 64);
    c.bench_function("sheet_monodromy", |b| {
        b.iter(|| sheet_monodromy(&f, black_box(&path), &TrackConfig::default(), 1e-6).unwrap())
    });
}

fn algebra(c: &mut Criterion) {
    c.bench_function("fixture_suite", |b| b.iter(verify_fixture_suite));
    let ring = fixtures::outer_ring().unwrap();
    c.bench_function("compose_loop/outer_ring", |b| {
        b.iter(|| compose_loop(&ring.graph, black_box(&ring.main_loop), GluePolicy::ALL).unwrap())
    });
}

criterion_group!(benches, fibers, curves, algebra);
criterion_main!(benches);
