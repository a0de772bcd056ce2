use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use umbilic::family::BasePoint;
use umbilic::homology::{cusp_case_matrix, elementary};
use umbilic::mirror::{rows_to_csv, sample_grid, SheetPatch};
use umbilic::monodromy::{compose_loop, cusp_monodromy, fixtures, verify_fixture_suite, GluePolicy, MonodromyResult, SuiteEntry};
use umbilic::strata::build::{build_strata, locate_bifurcation_walls, Strata};
use umbilic::strata::caustic::{closed_ring, trace_caustic, Caustic};
use umbilic::strata::graph::{Loop, RegionGraph, WallKind};
use umbilic::strata::svg::{caustic_svg, graph_svg, walls_svg};
use umbilic::strata::walls::TracedWall;

use crate::config::{CliError, CliResult, Format, RunConfig};

fn write_out(cfg: &RunConfig, stem: &str, fmt: Format, body: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(&cfg.out)?;
    let path = cfg.out.join(format!("{stem}.{}", fmt.ext()));
    std::fs::write(&path, body)?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_rows<R: Serialize>(rows: &[R]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::config(e.to_string()))
}

#[derive(Serialize)]
struct PolylineRow {
    curve: usize,
    x1: f64,
    x2: f64,
}

fn check_window(cfg: &RunConfig, c: &Caustic) -> CliResult<()> {
    if cfg.perturbation.eps <= 0.0 {
        return Ok(());
    }
    let w = cfg.window();
    if let Some(p) = c.curves.iter().flat_map(|k| k.image.iter()).find(|p| !w.contains(**p)) {
        return Err(CliError::config(format!(
            "window of half width {} does not contain the caustic point {p:?}",
            cfg.window
        )));
    }
    Ok(())
}

pub fn caustic(cfg: &RunConfig) -> CliResult<()> {
    let f = cfg.generating_function()?;
    let c = trace_caustic(&f, &cfg.strata().caustic)?;
    check_window(cfg, &c)?;
    match c.point {
        Some(p) => println!("caustic is the single point ({}, {})", p[0], p[1]),
        None => {
            println!("caustic: {} closed curve(s), {} cusp(s)", c.closed_count(), c.cusp_count());
            for (k, q) in c.cusps().enumerate() {
                println!("  cusp {k}: ({:.9}, {:.9})", q.point[0], q.point[1]);
            }
        }
    }
    for fmt in cfg.formats_or(&[Format::Json, Format::Csv, Format::Svg]) {
        let body = match fmt {
            Format::Json => to_json(&c)?,
            Format::Svg => caustic_svg(&c, &cfg.window()),
            Format::Csv => {
                let mut rows = Vec::new();
                for (k, curve) in c.curves.iter().enumerate() {
                    let pts = if curve.closed { closed_ring(curve) } else { curve.image.clone() };
                    rows.extend(pts.into_iter().map(|p| PolylineRow { curve: k, x1: p[0], x2: p[1] }));
                }
                if let Some(p) = c.point {
                    rows.push(PolylineRow { curve: 0, x1: p[0], x2: p[1] });
                }
                csv_rows(&rows)?
            }
        };
        write_out(cfg, "caustic", fmt, &body)?;
    }
    Ok(())
}

pub fn walls(cfg: &RunConfig) -> CliResult<()> {
    let f = cfg.generating_function()?;
    let sc = cfg.strata();
    let c = trace_caustic(&f, &sc.caustic)?;
    check_window(cfg, &c)?;
    let ws: Vec<TracedWall> = locate_bifurcation_walls(&f, &sc.window, &sc)?;
    println!("{} bifurcation wall(s)", ws.len());
    for (k, w) in ws.iter().enumerate() {
        println!("  wall {k}: {:?} -> {:?}, {} points", w.start, w.end, w.polyline.len());
    }
    for fmt in cfg.formats_or(&[Format::Json, Format::Csv, Format::Svg]) {
        let body = match fmt {
            Format::Json => to_json(&ws)?,
            Format::Svg => walls_svg(&c, &ws, &cfg.window()),
            Format::Csv => {
                let rows: Vec<PolylineRow> = ws
                    .iter()
                    .enumerate()
                    .flat_map(|(k, w)| w.polyline.iter().map(move |p| PolylineRow { curve: k, x1: p[0], x2: p[1] }))
                    .collect();
                csv_rows(&rows)?
            }
        };
        write_out(cfg, "walls", fmt, &body)?;
    }
    Ok(())
}

fn build(cfg: &RunConfig) -> CliResult<Strata> {
    let f = cfg.generating_function()?;
    let st = build_strata(&f, &cfg.strata())?;
    check_window(cfg, &st.caustic)?;
    Ok(st)
}

#[derive(Serialize)]
struct WallRow {
    wall: usize,
    kind: WallKind,
    x1: f64,
    x2: f64,
}

pub fn graph(cfg: &RunConfig) -> CliResult<()> {
    let st = build(cfg)?;
    let g = &st.graph;
    println!(
        "{} regions, {} walls, {} cusps, {} twist lines",
        g.regions.len(),
        g.walls.len(),
        g.cusps.len(),
        g.twist_lines.len()
    );
    for n in &g.notes {
        println!("  note: {n}");
    }
    for fmt in cfg.formats_or(&[Format::Json, Format::Svg]) {
        let body = match fmt {
            Format::Json => g.to_json(),
            Format::Svg => graph_svg(g, &cfg.window()),
            Format::Csv => {
                let rows: Vec<WallRow> = g
                    .walls
                    .iter()
                    .flat_map(|w| w.polyline.iter().map(move |p| WallRow { wall: w.id, kind: w.kind, x1: p[0], x2: p[1] }))
                    .collect();
                csv_rows(&rows)?
            }
        };
        write_out(cfg, "graph", fmt, &body)?;
    }
    Ok(())
}

/// Loop given by its crossings, a base-plane polyline, or a circle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LoopSpec {
    Crossings(Loop),
    Path { path: Vec<[f64; 2]> },
    Circle { center: [f64; 2], radius: f64 },
}

#[derive(Serialize)]
struct MonodromyReport {
    #[serde(rename = "loop")]
    l: Loop,
    all: MonodromyResult,
    no_twist: Option<MonodromyResult>,
}

pub fn monodromy(cfg: &RunConfig, spec: &str, graph: Option<&PathBuf>) -> CliResult<()> {
    let text = if std::path::Path::new(spec).exists() {
        std::fs::read_to_string(spec)?
    } else {
        spec.to_string()
    };
    let ls: LoopSpec = serde_json::from_str(&text).map_err(|e| CliError::config(format!("loop: {e}")))?;
    let (g, l): (RegionGraph, Loop) = match (ls, graph) {
        (LoopSpec::Crossings(l), Some(p)) => {
            let g = RegionGraph::from_json(&std::fs::read_to_string(p)?).map_err(|e| CliError::config(e.to_string()))?;
            (g, l)
        }
        (LoopSpec::Crossings(l), None) => (build(cfg)?.graph, l),
        (_, Some(_)) => return Err(CliError::config("--graph only accepts loops given by crossings")),
        (LoopSpec::Path { path }, None) => {
            let st = build(cfg)?;
            let l = st.loop_along(&path)?;
            (st.graph, l)
        }
        (LoopSpec::Circle { center, radius }, None) => {
            let st = build(cfg)?;
            let l = st.loop_along(&Strata::circle(center, radius, 0.0123, 2048))?;
            (st.graph, l)
        }
    };
    let all = compose_loop(&g, &l, GluePolicy::ALL)?;
    let no_twist = compose_loop(&g, &l, GluePolicy::NO_TWIST).ok();
    println!("loop of {} crossings based at region {}", l.crossings.len(), l.base);
    println!("  all glue: {:?} (trace {}, det {})", all.matrix.to_rows(), all.trace, all.det);
    if let Some(r) = &no_twist {
        println!("  without twist lines: {:?} (trace {}, det {})", r.matrix.to_rows(), r.trace, r.det);
    }
    let report = MonodromyReport { l, all, no_twist };
    for fmt in cfg.formats_or(&[Format::Json]) {
        match fmt {
            Format::Json => {
                write_out(cfg, "monodromy", fmt, &to_json(&report)?)?;
            }
            other => return Err(CliError::config(format!("monodromy has no {} output", other.ext()))),
        }
    }
    Ok(())
}

fn entry(name: String, passed: bool, detail: String) -> SuiteEntry {
    SuiteEntry { name, passed, detail }
}

/// Identities realized by the numerical diagram.
fn numeric_suite(st: &Strata) -> CliResult<Vec<SuiteEntry>> {
    let g = &st.graph;
    let mut out = Vec::new();
    for w in g.walls_of_kind(WallKind::Bifurcation) {
        let (l, r) = (&g.regions[w.left], &g.regions[w.right]);
        if let (Some(iu), Some(iv), Some((i, j)), Some(t)) = (l.incidence, r.incidence, w.pair, w.tau) {
            let ok = elementary(3, i, j, t).apply(&iu) == iv.to_vec();
            out.push(entry(format!("wall_{}.incidence", w.id), ok, format!("{iu:?} -> {iv:?} by E_{i}{j}({t})")));
        }
    }
    for c in &g.cusps {
        let name = format!("cusp_{}{}", c.pair.0, c.pair.1);
        match c.case {
            Some(case) => {
                let m = cusp_monodromy(g, c.id)?;
                let want = cusp_case_matrix(c.pair, case)?;
                out.push(entry(format!("{name}.monodromy"), m == want, format!("{:?} case {case:?}", m.to_rows())));
                let r = compose_loop(g, &g.cusp_loop(c.id)?, GluePolicy::ALL)?;
                out.push(entry(format!("{name}.twisted_loop"), r.is_identity, format!("{:?}", r.matrix.to_rows())));
            }
            None => out.push(entry(format!("{name}.case"), false, "no case recorded".into())),
        }
    }
    if g.cusps.is_empty() {
        out.push(entry("caustic.cusps".into(), false, "no cusps realized".into()));
        return Ok(out);
    }
    let l = st.global_loop(0.5)?;
    let plain = compose_loop(g, &l, GluePolicy::NO_TWIST)?;
    out.push(entry(
        "global_loop.without_twists".into(),
        plain.trace == 0 && plain.det == -1,
        format!("{:?}", plain.matrix.to_rows()),
    ));
    let full = compose_loop(g, &l, GluePolicy::ALL)?;
    out.push(entry("global_loop.with_twists".into(), full.is_identity, format!("{:?}", full.matrix.to_rows())));
    Ok(out)
}

pub fn verify(cfg: &RunConfig, numeric: bool, list: bool) -> CliResult<()> {
    if list {
        for f in fixtures::all()? {
            println!(
                "{}: {} regions, {} walls, loop of {} crossings",
                f.name,
                f.graph.regions.len(),
                f.graph.walls.len(),
                f.main_loop.crossings.len()
            );
        }
        for e in verify_fixture_suite() {
            println!("  identity {}", e.name);
        }
        return Ok(());
    }
    let mut entries = verify_fixture_suite();
    if numeric {
        let st = build(cfg)?;
        entries.extend(numeric_suite(&st)?);
    }
    for e in &entries {
        println!("{} {}: {}", if e.passed { "PASS" } else { "FAIL" }, e.name, e.detail);
    }
    for fmt in cfg.formats_or(&[Format::Json]) {
        match fmt {
            Format::Json => {
                write_out(cfg, "verify", fmt, &to_json(&entries)?)?;
            }
            other => return Err(CliError::config(format!("verify has no {} output", other.ext()))),
        }
    }
    let failed: Vec<&str> = entries.iter().filter(|e| !e.passed).map(|e| e.name.as_str()).collect();
    if failed.is_empty() {
        println!("all {} identities hold", entries.len());
        Ok(())
    } else {
        Err(CliError::verify(format!("{} failed: {}", failed.len(), failed.join(", "))))
    }
}

pub fn mirror_sample(cfg: &RunConfig, anchor: [f64; 2], lo: Option<[f64; 2]>, hi: Option<[f64; 2]>, n: usize, w: [f64; 2]) -> CliResult<()> {
    let f = cfg.generating_function()?;
    let lo = lo.unwrap_or([anchor[0] - 0.2, anchor[1] - 0.2]);
    let hi = hi.unwrap_or([anchor[0] + 0.2, anchor[1] + 0.2]);
    if n == 0 {
        return Err(CliError::config("--n must be positive"));
    }
    let mut patch = SheetPatch::new(&f, BasePoint::from(anchor), cfg.track())?;
    patch.path_tol = cfg.tol.sheet;
    let rows = sample_grid(&patch, lo, hi, n, w)?;
    println!("{} samples over {n}x{n} points", rows.len());
    for fmt in cfg.formats_or(&[Format::Csv]) {
        let body = match fmt {
            Format::Csv => rows_to_csv(&rows)?,
            Format::Json => to_json(&rows)?,
            Format::Svg => return Err(CliError::config("mirror-sample has no svg output")),
        };
        write_out(cfg, "mirror", fmt, &body)?;
    }
    Ok(())
}
