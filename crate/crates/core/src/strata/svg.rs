//! Static SVG drawings of the caustic and the region graph.

use std::fmt::Write;

use super::caustic::{closed_ring, Caustic};
use super::geom::P2;
use super::graph::{RegionGraph, WallKind};
use super::grid::Window;
use super::walls::TracedWall;

const SIZE: f64 = 800.0;

struct Frame {
    window: Window,
}

impl Frame {
    fn map(&self, p: P2) -> (f64, f64) {
        let w = &self.window;
        let sx = SIZE / (w.hi[0] - w.lo[0]);
        let sy = SIZE / (w.hi[1] - w.lo[1]);
        ((p[0] - w.lo[0]) * sx, (w.hi[1] - p[1]) * sy)
    }

    fn path(&self, pts: &[P2]) -> String {
        let mut s = String::new();
        for (k, p) in pts.iter().enumerate() {
            let (x, y) = self.map(*p);
            let _ = write!(s, "{}{x:.3},{y:.3} ", if k == 0 { "M" } else { "L" });
        }
        s
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn caustic_paths(out: &mut String, fr: &Frame, c: &Caustic) {
    for curve in &c.curves {
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
            fr.path(&closed_ring(curve))
        );
    }
    for k in c.cusps() {
        let (x, y) = fr.map(k.point);
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="red"/>"#);
    }
    if let Some(p) = c.point {
        let (x, y) = fr.map(p);
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="black"/>"#);
    }
}

/// The caustic with its cusps marked.
pub fn caustic_svg(c: &Caustic, window: &Window) -> String {
    let fr = Frame { window: *window };
    let mut out = String::new();
    header(&mut out);
    caustic_paths(&mut out, &fr, c);
    out.push_str("</svg>\n");
    out
}

/// The caustic with traced bifurcation walls drawn over it.
pub fn walls_svg(c: &Caustic, walls: &[TracedWall], window: &Window) -> String {
    let fr = Frame { window: *window };
    let mut out = String::new();
    header(&mut out);
    caustic_paths(&mut out, &fr, c);
    for w in walls {
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="navy" stroke-width="3"/>"#, fr.path(&w.polyline));
    }
    out.push_str("</svg>\n");
    out
}

/// Folds solid, bifurcation walls thick, twist lines dashed, regions
/// labeled at their representatives.
pub fn graph_svg(g: &RegionGraph, window: &Window) -> String {
    let fr = Frame { window: *window };
    let mut out = String::new();
    header(&mut out);
    for w in &g.walls {
        let style = match w.kind {
            WallKind::Fold => r#"stroke="black" stroke-width="1.5""#,
            WallKind::Bifurcation => r#"stroke="navy" stroke-width="3""#,
            WallKind::TwistLine => r#"stroke="darkred" stroke-width="1.5" stroke-dasharray="8,5""#,
        };
        let _ = writeln!(out, r#"<path d="{}" fill="none" {style}/>"#, fr.path(&w.polyline));
    }
    if g.walls.iter().all(|w| w.kind != WallKind::Fold) && g.caustic.len() > 1 {
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="black" stroke-width="1.5"/>"#, fr.path(&g.caustic));
    }
    for c in &g.cusps {
        let (x, y) = fr.map(c.point);
        let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3" fill="red"/>"#);
    }
    for r in &g.regions {
        let (x, y) = fr.map(r.rep.as_array());
        let label = match r.incidence {
            Some(i) => format!("{} ({} {} {})", r.id, i[0], i[1], i[2]),
            None => format!("{} s{:?}", r.id, r.labels),
        };
        let _ = writeln!(
            out,
            r#"<text x="{x:.3}" y="{y:.3}" font-family="monospace" font-size="12" text-anchor="middle">{label}</text>"#
        );
    }
    out.push_str("</svg>\n");
    out
}
