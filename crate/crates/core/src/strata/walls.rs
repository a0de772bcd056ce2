//! Bifurcation walls: loci where the label-free phase portrait changes,
//! located by bisection between grid samples and chained into polylines.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::caustic::{closed_ring, Caustic};
use super::geom::{self, P2};
use super::grid::{StarGrid, Window};
use crate::family::{critical_points, BasePoint, GeneratingFunction, SolverConfig};
use crate::flow::{phase_portrait, AsymptoticSectors, FlowConfig, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallSearchConfig {
    pub flow: FlowConfig,
    pub solver: SolverConfig,
    /// Bisection stops once the bracket is shorter than this.
    pub tol: f64,
    /// Samples on each circle probing the approach to a cusp.
    pub probe_samples: usize,
}

impl Default for WallSearchConfig {
    fn default() -> Self {
        WallSearchConfig {
            flow: FlowConfig { keep_samples: false, ..FlowConfig::default() },
            solver: SolverConfig::default(),
            tol: 1e-6,
            probe_samples: 240,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WallEnd {
    Cusp(usize),
    Fold,
    Boundary,
    /// The caustic is a single point and the wall ends on it.
    Point,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallPoint {
    pub point: P2,
    /// Sample on the side of `key.0`.
    pub minus: P2,
    /// Sample on the side of `key.1`.
    pub plus: P2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracedWall {
    pub polyline: Vec<P2>,
    pub inside: bool,
    pub start: WallEnd,
    pub end: WallEnd,
    /// Signatures on the two sides.
    pub key: (Signature, Signature),
    /// A located wall point away from the ends, with bracketing samples.
    pub probe: WallPoint,
}

/// Label-free signature at `x`, when the fiber is nondegenerate and every
/// separatrix is decided.
pub fn signature_at(f: &GeneratingFunction, x: P2, sectors: &AsymptoticSectors, cfg: &WallSearchConfig) -> Option<Signature> {
    let fb = critical_points(f, BasePoint::from(x), &cfg.solver).ok()?;
    let p = phase_portrait(f, &fb, sectors, &cfg.flow).ok()?;
    p.signature.is_clean().then_some(p.signature)
}

pub fn sample_signatures(
    f: &GeneratingFunction,
    grid: &StarGrid,
    sectors: &AsymptoticSectors,
    cfg: &WallSearchConfig,
) -> Vec<Option<Signature>> {
    grid.points
        .par_iter()
        .map(|p| p.and_then(|p| signature_at(f, p, sectors, cfg)))
        .collect()
}

/// Bisect the parametrized segment `at(0) .. at(1)` between signatures `a`
/// and `b`.
fn bisect<F: Fn(f64) -> P2>(
    f: &GeneratingFunction,
    at: F,
    a: &Signature,
    b: &Signature,
    sectors: &AsymptoticSectors,
    cfg: &WallSearchConfig,
) -> WallPoint {
    let (mut lo, mut hi) = (0.0, 1.0);
    while geom::dist(at(lo), at(hi)) > cfg.tol {
        let m = 0.5 * (lo + hi);
        match signature_at(f, at(m), sectors, cfg) {
            Some(s) if &s == a => lo = m,
            Some(s) if &s == b => hi = m,
            // on the wall to within the flow resolution, or a third portrait
            _ => {
                lo = m;
                hi = m;
                break;
            }
        }
    }
    WallPoint { point: at(0.5 * (lo + hi)), minus: at(lo), plus: at(hi) }
}

type Key = (Signature, Signature);

fn ordered(a: &Signature, b: &Signature) -> (Key, bool) {
    if a <= b {
        ((a.clone(), b.clone()), false)
    } else {
        ((b.clone(), a.clone()), true)
    }
}

/// Wall points on every grid edge whose end samples differ.
pub fn locate_wall_points(
    f: &GeneratingFunction,
    grid: &StarGrid,
    sigs: &[Option<Signature>],
    sectors: &AsymptoticSectors,
    cfg: &WallSearchConfig,
) -> Vec<(Key, WallPoint)> {
    let edges: Vec<(usize, usize)> = grid
        .edges()
        .into_iter()
        .filter(|&(a, b)| match (&sigs[a], &sigs[b]) {
            (Some(x), Some(y)) => x != y && x.count == y.count,
            _ => false,
        })
        .collect();
    edges
        .par_iter()
        .map(|&(a, b)| {
            let (sa, sb) = (sigs[a].as_ref().unwrap(), sigs[b].as_ref().unwrap());
            let (la, ja) = grid.coords(a);
            let (lb, jb) = grid.coords(b);
            let wp = if la == lb {
                let (t0, mut t1) = (grid.angle(ja), grid.angle(jb));
                if t1 < t0 {
                    t1 += std::f64::consts::TAU;
                }
                let level = grid.levels[la];
                bisect(f, |s| grid.point_at(level, t0 + s * (t1 - t0)), sa, sb, sectors, cfg)
            } else {
                let (p, q) = (grid.points[a].unwrap(), grid.points[b].unwrap());
                bisect(f, |s| geom::add(p, geom::scale(geom::sub(q, p), s)), sa, sb, sectors, cfg)
            };
            let (key, flipped) = ordered(sa, sb);
            let wp = if flipped { WallPoint { minus: wp.plus, plus: wp.minus, ..wp } } else { wp };
            (key, wp)
        })
        .collect()
}

/// Greedy nearest-neighbour chains; a gap larger than the local grid
/// spacing starts a new chain.
fn chain(points: Vec<WallPoint>, caustic: &Caustic, center: P2, first_offset: f64) -> Vec<Vec<WallPoint>> {
    let gap = |p: P2| 0.3 * geom::dist(p, center) + 4.0 * first_offset;
    let mut rest = points;
    let mut chains = Vec::new();
    while !rest.is_empty() {
        let start = rest
            .iter()
            .enumerate()
            .min_by(|a, b| caustic.distance(a.1.point).total_cmp(&caustic.distance(b.1.point)))
            .map(|(k, _)| k)
            .unwrap();
        let mut c = vec![rest.swap_remove(start)];
        loop {
            let tail = c.last().unwrap().point;
            let next = rest
                .iter()
                .enumerate()
                .map(|(k, p)| (k, geom::dist(p.point, tail)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match next {
                Some((k, d)) if d <= gap(tail) => c.push(rest.swap_remove(k)),
                _ => break,
            }
        }
        // the start may sit mid-chain when both ends reach the caustic
        loop {
            let head = c[0].point;
            let next = rest
                .iter()
                .enumerate()
                .map(|(k, p)| (k, geom::dist(p.point, head)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match next {
                Some((k, d)) if d <= gap(head) => c.insert(0, rest.swap_remove(k)),
                _ => break,
            }
        }
        chains.push(c);
    }
    chains
}

/// Follow a wall into a cusp along shrinking circles about it. Returns the
/// wall points found, outermost first, or `None` if the wall does not
/// reach the cusp.
fn probe_cusp(
    f: &GeneratingFunction,
    caustic: &Caustic,
    cusp: P2,
    start_radius: f64,
    key: &Key,
    sectors: &AsymptoticSectors,
    cfg: &WallSearchConfig,
) -> Option<Vec<P2>> {
    let mut out = Vec::new();
    let mut r = start_radius;
    while r > 5e-5 {
        let n = cfg.probe_samples;
        let pts: Vec<P2> = (0..=n)
            .map(|k| {
                let t = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                geom::add(cusp, [r * t.cos(), r * t.sin()])
            })
            .collect();
        let sigs: Vec<Option<Signature>> = pts
            .par_iter()
            .map(|&p| (!caustic.contains(p)).then(|| signature_at(f, p, sectors, cfg)).flatten())
            .collect();
        let mut found = None;
        for k in 0..n {
            if let (Some(a), Some(b)) = (&sigs[k], &sigs[k + 1]) {
                if (a == &key.0 && b == &key.1) || (a == &key.1 && b == &key.0) {
                    let t0 = std::f64::consts::TAU * (k as f64 + 0.5) / n as f64;
                    let dt = std::f64::consts::TAU / n as f64;
                    let wp = bisect(
                        f,
                        |s| geom::add(cusp, [r * (t0 + s * dt).cos(), r * (t0 + s * dt).sin()]),
                        a,
                        b,
                        sectors,
                        cfg,
                    );
                    found = Some(wp.point);
                    break;
                }
            }
        }
        out.push(found?);
        r *= 0.25;
    }
    Some(out)
}

fn extend_to_caustic(caustic: &Caustic, inner: P2, prev: P2) -> Option<P2> {
    let d = geom::unit(geom::sub(inner, prev));
    let reach = 4.0 * geom::dist(inner, prev).max(caustic.distance(inner));
    let far = geom::add(inner, geom::scale(d, reach));
    caustic
        .curves
        .iter()
        .filter_map(|c| {
            let ring = closed_ring(c);
            geom::segment_polyline_hits(inner, far, &ring)
                .into_iter()
                .map(|h| h.0)
                .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.min(s))))
        })
        .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.min(s))))
        .map(|s| geom::add(inner, geom::scale(geom::sub(far, inner), s)))
}

#[allow(clippy::too_many_arguments)]
fn finish_end(
    f: &GeneratingFunction,
    caustic: &Caustic,
    window: &Window,
    grid: &StarGrid,
    key: &Key,
    pts: &mut Vec<P2>,
    sectors: &AsymptoticSectors,
    cfg: &WallSearchConfig,
) -> WallEnd {
    let end = *pts.last().unwrap();
    let prev = if pts.len() > 1 { pts[pts.len() - 2] } else { grid.center };
    let spacing = 0.3 * geom::dist(end, grid.center) + 4.0 * first_offset(grid);
    if let Some(p) = caustic.point {
        if geom::dist(end, p) <= spacing {
            pts.push(p);
            return WallEnd::Point;
        }
    }
    let dc = caustic.distance(end);
    if dc <= spacing {
        let nearest_cusp = caustic
            .cusps()
            .enumerate()
            .map(|(k, c)| (k, geom::dist(c.point, end), c.point))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((k, d, cp)) = nearest_cusp {
            if d <= 3.0 * spacing {
                let start = (0.75 * d).max(1e-4);
                if let Some(mut probes) = probe_cusp(f, caustic, cp, start, key, sectors, cfg) {
                    pts.append(&mut probes);
                    pts.push(cp);
                    return WallEnd::Cusp(k);
                }
            }
        }
        if let Some(q) = extend_to_caustic(caustic, end, prev) {
            pts.push(q);
        }
        return WallEnd::Fold;
    }
    let d = geom::unit(geom::sub(end, prev));
    if let Some(t) = geom::ray_box_exit(end, d, window.lo, window.hi) {
        if t <= 2.0 * spacing {
            pts.push(geom::add(end, geom::scale(d, t)));
            return WallEnd::Boundary;
        }
    }
    WallEnd::Interior
}

fn first_offset(grid: &StarGrid) -> f64 {
    grid.levels
        .iter()
        .find_map(|l| match l {
            super::grid::Level::Outer(d) => Some(*d),
            _ => None,
        })
        .unwrap_or(1e-3)
}

/// Bifurcation walls in the window, traced from the grid signatures.
pub fn find_walls(
    f: &GeneratingFunction,
    caustic: &Caustic,
    grid: &StarGrid,
    sigs: &[Option<Signature>],
    window: &Window,
    sectors: &AsymptoticSectors,
    cfg: &WallSearchConfig,
) -> Vec<TracedWall> {
    let mut groups: BTreeMap<Key, Vec<WallPoint>> = BTreeMap::new();
    for (key, wp) in locate_wall_points(f, grid, sigs, sectors, cfg) {
        groups.entry(key).or_default().push(wp);
    }
    let mut out = Vec::new();
    for (key, pts) in groups {
        for c in chain(pts, caustic, grid.center, first_offset(grid)) {
            if c.len() < 2 {
                continue;
            }
            let probe = c[c.len() / 2].clone();
            let inside = caustic.contains(probe.point);
            let mut line: Vec<P2> = c.iter().map(|p| p.point).collect();
            let end = finish_end(f, caustic, window, grid, &key, &mut line, sectors, cfg);
            line.reverse();
            let start = finish_end(f, caustic, window, grid, &key, &mut line, sectors, cfg);
            line.reverse();
            out.push(TracedWall { polyline: line, inside, start, end, key: key.clone(), probe });
        }
    }
    // start at the caustic side
    for w in &mut out {
        if matches!(w.start, WallEnd::Boundary | WallEnd::Interior) && !matches!(w.end, WallEnd::Boundary | WallEnd::Interior) {
            w.polyline.reverse();
            std::mem::swap(&mut w.start, &mut w.end);
        }
    }
    out
}
