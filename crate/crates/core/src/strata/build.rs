//! Assembly of the region graph from the traced caustic and walls: twist
//! lines, the planar arrangement, labels, incidences and glue.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::caustic::{closed_ring, require_closed, trace_caustic, Caustic, CausticConfig};
use super::geom::{self, P2};
use super::graph::{Crossing, Cusp, Loop, Region, RegionGraph, Wall, WallKind};
use super::grid::{GridConfig, StarGrid, Window};
use super::walls::{find_walls, sample_signatures, TracedWall, WallEnd, WallSearchConfig};
use crate::continuation::{continue_labels, TrackConfig};
use crate::error::{Error, Result};
use crate::family::{critical_points, BasePoint, FiberData, GeneratingFunction, Label};
use crate::flow::{asymptotic_sectors, incidence_matrix, saddle_separatrices, AsymptoticSectors, Terminal};
use crate::homology::{cusp_case, solve_tau, Incidence};
use crate::monodromy::fixtures::resolve_free_taus;

/// Rotations tried, in order, when a twist line along the cusp axis runs
/// into a wall.
pub const TWIST_LADDER: [f64; 9] = [0.0, 0.1, -0.1, 0.2, -0.2, 0.3, -0.3, 0.5, -0.5];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrataConfig {
    pub window: Window,
    pub caustic: CausticConfig,
    pub grid: GridConfig,
    pub walls: WallSearchConfig,
    pub track: TrackConfig,
    /// Install twist lines at the cusps.
    pub twist_lines: bool,
    /// Smallest angle (radians, seen from the cusp) between a twist line
    /// and any wall.
    pub twist_clearance: f64,
}

impl Default for StrataConfig {
    fn default() -> Self {
        StrataConfig {
            window: Window::square(1.0),
            caustic: CausticConfig::default(),
            grid: GridConfig::default(),
            walls: WallSearchConfig::default(),
            track: TrackConfig::default(),
            twist_lines: true,
            twist_clearance: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PieceSource {
    /// Fold arc of the caustic, by arc index.
    Arc(usize),
    /// Traced bifurcation wall.
    Traced(usize),
    /// Twist line of a cusp.
    Twist(usize),
}

/// A curve of the arrangement after splitting at junctions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub kind: WallKind,
    pub points: Vec<P2>,
    pub source: PieceSource,
    lo: P2,
    hi: P2,
}

impl Piece {
    fn new(kind: WallKind, points: Vec<P2>, source: PieceSource) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Piece { kind, points, source, lo, hi }
    }

    fn crosses(&self, a: P2, b: P2) -> bool {
        if a[0].max(b[0]) < self.lo[0] || a[0].min(b[0]) > self.hi[0] || a[1].max(b[1]) < self.lo[1] || a[1].min(b[1]) > self.hi[1] {
            return false;
        }
        geom::segment_crosses(a, b, &self.points)
    }

    fn distance(&self, p: P2) -> f64 {
        geom::point_polyline_distance(p, &self.points).0
    }
}

/// Outside sector: the component of the outside minus the twist lines
/// next to one fold arc.
#[derive(Debug, Clone)]
struct Sector {
    arc: usize,
    dying: usize,
    seed: FiberData,
}

/// Traced strata with the region graph and everything needed to locate
/// points and label fibers.
#[derive(Debug, Clone)]
pub struct Strata {
    pub f: GeneratingFunction,
    pub config: StrataConfig,
    pub caustic: Caustic,
    pub center: P2,
    pub grid: StarGrid,
    pub traced: Vec<TracedWall>,
    pub pieces: Vec<Piece>,
    /// Graph wall of each piece.
    pub piece_wall: Vec<Option<usize>>,
    pub sample_region: Vec<Option<usize>>,
    pub graph: RegionGraph,
    pub sectors: AsymptoticSectors,
    /// Dying saddle of each fold arc.
    pub arc_dying: Vec<usize>,
    reference: Option<FiberData>,
    sample_sector: Vec<Option<usize>>,
    sector_data: Vec<Sector>,
}

fn components<F: Fn(P2, P2) -> bool>(grid: &StarGrid, blocked: F) -> (Vec<Option<usize>>, usize) {
    let n = grid.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in grid.edges() {
        let (p, q) = (grid.points[a].unwrap(), grid.points[b].unwrap());
        if !blocked(p, q) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut comp = vec![None; n];
    let mut count = 0;
    for s in 0..n {
        if grid.points[s].is_none() || comp[s].is_some() {
            continue;
        }
        comp[s] = Some(count);
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if comp[v].is_none() {
                    comp[v] = Some(count);
                    q.push_back(v);
                }
            }
        }
        count += 1;
    }
    (comp, count)
}

/// Split curves at interior points where another curve ends on them, and
/// at proper crossings.
fn split_pieces(curves: Vec<Piece>) -> Vec<Piece> {
    let tol = 1e-9;
    let mut cuts: Vec<Vec<(usize, f64, P2)>> = vec![Vec::new(); curves.len()];
    for (a, ca) in curves.iter().enumerate() {
        for (b, cb) in curves.iter().enumerate() {
            if a == b {
                continue;
            }
            // endpoints of b lying inside a
            for &e in [cb.points[0], *cb.points.last().unwrap()].iter() {
                let (d, k, t) = geom::point_polyline_distance(e, &ca.points);
                let at_end = geom::dist(e, ca.points[0]) < tol || geom::dist(e, *ca.points.last().unwrap()) < tol;
                if d < tol && !at_end {
                    cuts[a].push((k, t, e));
                }
            }
            if a < b {
                for (k, w) in ca.points.windows(2).enumerate() {
                    for (s, _, _) in geom::segment_polyline_hits(w[0], w[1], &cb.points) {
                        let p = geom::add(w[0], geom::scale(geom::sub(w[1], w[0]), s));
                        let near_end = |c: &Piece| geom::dist(p, c.points[0]) < tol || geom::dist(p, *c.points.last().unwrap()) < tol;
                        if near_end(ca) || near_end(cb) {
                            continue;
                        }
                        cuts[a].push((k, s, p));
                        let (_, kb, tb) = geom::point_polyline_distance(p, &cb.points);
                        cuts[b].push((kb, tb, p));
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for (c, mut cs) in curves.into_iter().zip(cuts) {
        cs.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        cs.dedup_by(|x, y| geom::dist(x.2, y.2) < tol);
        let mut cur = vec![c.points[0]];
        let mut ci = 0;
        for k in 0..c.points.len() - 1 {
            while ci < cs.len() && cs[ci].0 == k {
                cur.push(cs[ci].2);
                out.push(Piece::new(c.kind, std::mem::take(&mut cur), c.source));
                cur.push(cs[ci].2);
                ci += 1;
            }
            cur.push(c.points[k + 1]);
        }
        out.push(Piece::new(c.kind, cur, c.source));
    }
    out.retain(|p| p.points.len() >= 2 && geom::polyline_length(&p.points) > 0.0);
    out
}

fn saddle_nearest_node(fb: &FiberData) -> Result<usize> {
    let n = fb.node().ok_or(Error::NotInsideCaustic { x: fb.base })?;
    fb.saddles()
        .min_by(|a, b| a.dist(n.y).total_cmp(&b.dist(n.y)))
        .and_then(|s| s.label.saddle_index())
        .map(|k| k + 1)
        .ok_or_else(|| Error::LabelMismatch("no labeled saddle near the node".into()))
}

/// Comparable form of a branch terminal.
fn terminal_key(t: &Terminal) -> (u8, usize) {
    match t {
        Terminal::Escaped { sector } => (0, *sector),
        Terminal::ConvergedTo { label, .. } => (1, label.saddle_index().map_or(9, |k| k)),
        Terminal::Undecided => (2, 0),
    }
}

impl Strata {
    fn blocked_by(&self, a: P2, b: P2, kinds: &[WallKind]) -> bool {
        self.pieces.iter().any(|p| kinds.contains(&p.kind) && p.crosses(a, b))
    }

    fn visible_sample(&self, p: P2, kinds: &[WallKind], want: impl Fn(usize) -> bool) -> Option<usize> {
        for count in [32, 256, self.grid.len()] {
            for s in self.grid.nearest(p, count) {
                if want(s) && !self.blocked_by(p, self.grid.points[s].unwrap(), kinds) {
                    return Some(s);
                }
            }
        }
        None
    }

    /// Region containing `p`.
    pub fn locate(&self, p: P2) -> Option<usize> {
        let all = [WallKind::Fold, WallKind::Bifurcation, WallKind::TwistLine];
        let s = self.visible_sample(p, &all, |s| self.sample_region[s].is_some())?;
        self.sample_region[s]
    }

    fn sector_of(&self, p: P2) -> Option<(usize, usize)> {
        let kinds = [WallKind::Fold, WallKind::TwistLine];
        let s = self.visible_sample(p, &kinds, |s| self.sample_sector[s].is_some())?;
        Some((s, self.sample_sector[s]?))
    }

    /// Fiber at `x` with continuation labels: from the reference point
    /// inside the caustic, or from the seed of the outside sector of `x`.
    pub fn labelled_fiber(&self, x: P2) -> Result<FiberData> {
        let reference = self
            .reference
            .as_ref()
            .ok_or_else(|| Error::LabelMismatch("no labels without a closed caustic".into()))?;
        let xb = BasePoint::from(x);
        if self.caustic.contains(x) {
            let ring = closed_ring(require_closed(&self.caustic)?);
            if geom::segment_crosses(self.center, x, &ring) {
                return Err(Error::LabelMismatch(format!("{x:?} is not visible from the reference point")));
            }
            return continue_labels(&self.f, reference, &[BasePoint::from(self.center), xb], &self.config.track);
        }
        let (sample, sector) = self
            .sector_of(x)
            .ok_or_else(|| Error::LabelMismatch(format!("{x:?} lies in no outside sector")))?;
        let data = self
            .sector_data
            .iter()
            .find(|s| self.sample_sector_of_seed(s) == Some(sector))
            .ok_or_else(|| Error::LabelMismatch(format!("sector of {x:?} has no fold arc")))?;
        let path = self.sector_path(data.seed.base.as_array(), sample)?;
        let mut pts: Vec<BasePoint> = vec![data.seed.base];
        pts.extend(path.into_iter().map(BasePoint::from));
        pts.push(xb);
        continue_labels(&self.f, &data.seed, &pts, &self.config.track)
    }

    fn sample_sector_of_seed(&self, s: &Sector) -> Option<usize> {
        self.sector_of(s.seed.base.as_array()).map(|x| x.1)
    }

    /// Grid path from `from` to sample `to` avoiding folds and twist lines.
    fn sector_path(&self, from: P2, to: usize) -> Result<Vec<P2>> {
        let kinds = [WallKind::Fold, WallKind::TwistLine];
        let start = self
            .visible_sample(from, &kinds, |s| self.sample_sector[s].is_some())
            .ok_or_else(|| Error::LabelMismatch("seed sees no sample".into()))?;
        let n = self.grid.len();
        let mut prev = vec![usize::MAX; n];
        prev[start] = start;
        let mut q = VecDeque::from([start]);
        let target = self.sample_sector[to];
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (a, b) in self.grid.edges() {
            if self.sample_sector[a] == target && self.sample_sector[b] == target {
                let (p, r) = (self.grid.points[a].unwrap(), self.grid.points[b].unwrap());
                if !self.blocked_by(p, r, &kinds) {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        while let Some(u) = q.pop_front() {
            if u == to {
                break;
            }
            for &v in &adj[u] {
                if prev[v] == usize::MAX {
                    prev[v] = u;
                    q.push_back(v);
                }
            }
        }
        if prev[to] == usize::MAX {
            return Err(Error::LabelMismatch("no path inside the outside sector".into()));
        }
        let mut path = vec![to];
        let mut u = to;
        while u != start {
            u = prev[u];
            path.push(u);
        }
        path.reverse();
        Ok(path.into_iter().map(|k| self.grid.points[k].unwrap()).collect())
    }

    pub fn incidence_at(&self, x: P2) -> Result<Incidence> {
        let fb = self.labelled_fiber(x)?;
        let flow = self.config.walls.flow;
        Ok(incidence_matrix(&self.f, &fb, &self.sectors, &flow)?.as_i64())
    }

    /// Walls crossed by the polyline `path`, in order, as a loop based at
    /// the region of its first vertex.
    pub fn loop_along(&self, path: &[P2]) -> Result<Loop> {
        let first = *path.first().ok_or_else(|| Error::InvalidLoop("empty path".into()))?;
        let base = self
            .locate(first)
            .ok_or_else(|| Error::InvalidLoop(format!("{first:?} is in no region")))?;
        for &v in path {
            for (pi, piece) in self.pieces.iter().enumerate() {
                let Some(wall) = self.piece_wall[pi] else { continue };
                if geom::point_polyline_distance(v, &piece.points).0 < self.config.walls.tol {
                    return Err(Error::InvalidLoop(format!("path vertex {v:?} lies on wall {wall}")));
                }
            }
        }
        let mut crossings = Vec::new();
        for seg in path.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let mut hits: Vec<(f64, usize, bool)> = Vec::new();
            for (pi, piece) in self.pieces.iter().enumerate() {
                let Some(wall) = self.piece_wall[pi] else { continue };
                if !piece.crosses(a, b) {
                    continue;
                }
                let mut local: Vec<(f64, bool)> = Vec::new();
                for (s, k, _) in geom::segment_polyline_hits(a, b, &piece.points) {
                    let t = geom::sub(piece.points[k + 1], piece.points[k]);
                    let forward = geom::cross(t, geom::sub(b, a)) < 0.0;
                    if !local.iter().any(|(s0, f0)| (s0 - s).abs() < 1e-12 && *f0 == forward) {
                        local.push((s, forward));
                    }
                }
                hits.extend(local.into_iter().map(|(s, fw)| (s, wall, fw)));
            }
            hits.sort_by(|x, y| x.0.total_cmp(&y.0));
            crossings.extend(hits.into_iter().map(|(_, wall, forward)| Crossing { wall, forward }));
        }
        let l = Loop { base, crossings };
        self.graph.walk(&l)?;
        Ok(l)
    }

    /// Counterclockwise circle about `c`, starting at angle `start`.
    pub fn circle(c: P2, r: f64, start: f64, samples: usize) -> Vec<P2> {
        (0..=samples)
            .map(|k| {
                let t = start + std::f64::consts::TAU * k as f64 / samples as f64;
                geom::add(c, [r * t.cos(), r * t.sin()])
            })
            .collect()
    }

    /// Loop around the whole caustic on a circle of radius `r` about the
    /// reference point.
    pub fn global_loop(&self, r: f64) -> Result<Loop> {
        self.loop_along(&Self::circle(self.center, r, 0.0123, 2048))
    }
}

fn twist_ray(cusp: P2, dir: P2, window: &Window) -> Option<Vec<P2>> {
    let t = geom::ray_box_exit(cusp, dir, window.lo, window.hi)?;
    Some(vec![cusp, geom::add(cusp, geom::scale(dir, t))])
}

/// Smallest angle, seen from `cusp`, between the ray and the wall, sampled
/// along the ray; infinite when they are far apart.
fn angular_clearance(cusp: P2, ray: &[P2], wall: &[P2]) -> f64 {
    let len = geom::dist(ray[0], ray[1]);
    let mut best = f64::INFINITY;
    for k in 1..=64 {
        let t = len * (k as f64 / 64.0).powi(2);
        let p = geom::add(cusp, geom::scale(geom::unit(geom::sub(ray[1], ray[0])), t));
        let d = geom::point_polyline_distance(p, wall).0;
        best = best.min(d / t.max(1e-12));
    }
    best
}

/// Outward rays from the cusps along their axes, clipped to the window.
/// A ray meeting a wall is rotated by the first clearing angle of
/// [`TWIST_LADDER`] and the rotation is recorded in `notes`.
pub fn install_twist_lines(
    caustic: &Caustic,
    traced: &[TracedWall],
    cfg: &StrataConfig,
    notes: &mut Vec<String>,
) -> Result<Vec<(usize, Vec<P2>)>> {
    let ring: Vec<P2> = caustic.curves.iter().find(|c| c.closed).map(closed_ring).unwrap_or_default();
    let mut out = Vec::new();
    for (k, c) in caustic.cusps().enumerate() {
        let mut placed = None;
        for &rot in TWIST_LADDER.iter() {
            let dir = geom::rotate(c.axis, rot);
            let Some(ray) = twist_ray(c.point, dir, &cfg.window) else { continue };
            let off = geom::add(c.point, geom::scale(dir, 1e-9));
            let hits_caustic = geom::segment_crosses(off, ray[1], &ring);
            let clear = traced.iter().all(|w| {
                let start_here = geom::dist(w.polyline[0], c.point) < 1e-9;
                let crosses = geom::segment_polyline_hits(off, ray[1], &w.polyline).iter().any(|h| h.0 > 1e-6);
                !crosses && (!start_here || angular_clearance(c.point, &ray, &w.polyline) > cfg.twist_clearance)
            });
            if !hits_caustic && clear {
                if rot != 0.0 {
                    notes.push(format!("twist line at cusp {k} rotated by {rot} rad to clear a bifurcation wall"));
                }
                placed = Some(ray);
                break;
            }
        }
        let ray = placed.ok_or_else(|| Error::PlacementConflict {
            cusp: k,
            reason: "no twist line direction clears the walls".into(),
        })?;
        out.push((k, ray));
    }
    Ok(out)
}

fn self_intersects(poly: &[P2]) -> bool {
    let n = poly.len();
    for a in 0..n.saturating_sub(1) {
        for b in a + 2..n - 1 {
            if geom::segment_intersection(poly[a], poly[a + 1], poly[b], poly[b + 1]).is_some() {
                return true;
            }
        }
    }
    false
}

/// Bifurcation walls of `f` in `window`, traced from a grid scan of the
/// phase portraits.
pub fn locate_bifurcation_walls(f: &GeneratingFunction, window: &Window, cfg: &StrataConfig) -> Result<Vec<TracedWall>> {
    let caustic = trace_caustic(f, &cfg.caustic)?;
    let center = caustic
        .interior_point()
        .ok_or_else(|| Error::ArrangementFailure("no interior point".into()))?;
    let grid = StarGrid::new(&caustic, center, window, &cfg.grid);
    let sectors = asymptotic_sectors(f)?;
    let sigs = sample_signatures(f, &grid, &sectors, &cfg.walls);
    Ok(find_walls(f, &caustic, &grid, &sigs, window, &sectors, &cfg.walls))
}

pub fn build_region_graph(f: &GeneratingFunction, window: &Window, cfg: &StrataConfig) -> Result<RegionGraph> {
    let cfg = StrataConfig { window: *window, ..*cfg };
    Ok(build_strata(f, &cfg)?.graph)
}

/// Region graph of the base for `f` inside the configured window.
pub fn build_strata(f: &GeneratingFunction, cfg: &StrataConfig) -> Result<Strata> {
    let caustic = trace_caustic(f, &cfg.caustic)?;
    let mut notes = Vec::new();
    let ring: Vec<P2> = if caustic.point.is_some() {
        Vec::new()
    } else {
        closed_ring(require_closed(&caustic)?)
    };
    let center = caustic
        .interior_point()
        .ok_or_else(|| Error::ArrangementFailure("no interior point".into()))?;
    let grid = StarGrid::new(&caustic, center, &cfg.window, &cfg.grid);
    let sectors = asymptotic_sectors(f)?;
    let sigs = sample_signatures(f, &grid, &sectors, &cfg.walls);
    let traced = find_walls(f, &caustic, &grid, &sigs, &cfg.window, &sectors, &cfg.walls);
    for (k, w) in traced.iter().enumerate() {
        if self_intersects(&w.polyline) {
            return Err(Error::ArrangementFailure(format!("wall {k} is not a simple curve")));
        }
        if matches!(w.start, WallEnd::Interior) || matches!(w.end, WallEnd::Interior) {
            notes.push(format!("wall {k} has an end away from the caustic and the window edge"));
        }
    }

    // curves of the arrangement
    let mut curves = Vec::new();
    if let Some(c) = caustic.curves.first() {
        for (a, arc) in c.arcs.iter().enumerate() {
            curves.push(Piece::new(WallKind::Fold, arc.polyline.clone(), PieceSource::Arc(a)));
        }
        if c.arcs.is_empty() {
            curves.push(Piece::new(WallKind::Fold, ring.clone(), PieceSource::Arc(0)));
        }
    }
    for (k, w) in traced.iter().enumerate() {
        curves.push(Piece::new(WallKind::Bifurcation, w.polyline.clone(), PieceSource::Traced(k)));
    }
    let twists = if cfg.twist_lines && caustic.point.is_none() {
        install_twist_lines(&caustic, &traced, cfg, &mut notes)?
    } else {
        Vec::new()
    };
    for (k, ray) in &twists {
        curves.push(Piece::new(WallKind::TwistLine, ray.clone(), PieceSource::Twist(*k)));
    }
    let pieces = split_pieces(curves);

    let blocked_all = |a: P2, b: P2| pieces.iter().any(|p| p.crosses(a, b));
    let (sample_region, nreg) = components(&grid, blocked_all);
    let blocked_sector = |a: P2, b: P2| {
        pieces
            .iter()
            .any(|p| matches!(p.kind, WallKind::Fold | WallKind::TwistLine) && p.crosses(a, b))
    };
    let (sample_sector, _) = components(&grid, blocked_sector);

    // representatives: samples of largest clearance
    let clearance = |p: P2| {
        let mut d = (p[0] - cfg.window.lo[0])
            .min(cfg.window.hi[0] - p[0])
            .min(p[1] - cfg.window.lo[1])
            .min(cfg.window.hi[1] - p[1]);
        for pc in &pieces {
            d = d.min(pc.distance(p));
        }
        if let Some(q) = caustic.point {
            d = d.min(geom::dist(p, q));
        }
        d
    };
    let mut best: Vec<(f64, Option<P2>)> = vec![(f64::NEG_INFINITY, None); nreg];
    for (s, r) in sample_region.iter().enumerate() {
        if let (Some(r), Some(p)) = (r, grid.points[s]) {
            let c = clearance(p);
            if c > best[*r].0 {
                best[*r] = (c, Some(p));
            }
        }
    }
    let regions: Vec<Region> = best
        .iter()
        .enumerate()
        .map(|(id, (_, p))| {
            let p = p.expect("region has a sample");
            Region {
                id,
                rep: BasePoint::from(p),
                inside: caustic.contains(p),
                incidence: None,
                labels: Vec::new(),
                name: None,
            }
        })
        .collect();

    let mut st = Strata {
        f: f.clone(),
        config: *cfg,
        caustic,
        center,
        grid,
        traced,
        pieces,
        piece_wall: Vec::new(),
        sample_region,
        graph: RegionGraph {
            regions,
            caustic: ring.clone(),
            reference: Some(BasePoint::from(center)),
            ..Default::default()
        },
        sectors,
        arc_dying: Vec::new(),
        reference: None,
        sample_sector,
        sector_data: Vec::new(),
    };

    // walls of the graph, with sides from probes
    let mut walls = Vec::new();
    let mut piece_wall = vec![None; st.pieces.len()];
    for (pi, piece) in st.pieces.iter().enumerate() {
        let len = geom::polyline_length(&piece.points);
        let m = geom::polyline_at(&piece.points, 0.5);
        let (_, k, _) = geom::point_polyline_distance(m, &piece.points);
        let t = geom::unit(geom::sub(piece.points[k + 1], piece.points[k]));
        let nl = [-t[1], t[0]];
        let other = st
            .pieces
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != pi)
            .map(|(_, q)| q.distance(m))
            .fold(f64::INFINITY, f64::min);
        let h = (0.3 * other).min(1e-3).min(0.1 * len);
        let left = st.locate(geom::add(m, geom::scale(nl, h)));
        let right = st.locate(geom::sub(m, geom::scale(nl, h)));
        match (left, right) {
            (Some(l), Some(r)) if l != r => {
                let id = walls.len();
                let mut w = Wall::new(id, piece.kind, l, r);
                w.polyline = piece.points.clone();
                if let PieceSource::Twist(c) = piece.source {
                    w.cusp = Some(c);
                }
                if let PieceSource::Traced(k) = piece.source {
                    w.cusp = match (st.traced[k].start, st.traced[k].end) {
                        (WallEnd::Cusp(c), _) | (_, WallEnd::Cusp(c)) => Some(c),
                        _ => None,
                    };
                }
                piece_wall[pi] = Some(id);
                walls.push(w);
            }
            _ => notes.push(format!("curve piece {pi} ({:?}) does not separate two regions", piece.kind)),
        }
    }
    st.piece_wall = piece_wall;
    st.graph.walls = walls;
    st.graph.twist_lines = st
        .graph
        .walls
        .iter()
        .filter(|w| w.kind == WallKind::TwistLine)
        .map(|w| w.id)
        .collect();

    if st.caustic.point.is_some() {
        finish_point_caustic(&mut st, &mut notes);
        st.graph.notes = notes;
        return Ok(st);
    }

    label_and_glue(&mut st, &mut notes)?;
    st.graph.notes = notes;
    Ok(st)
}

/// Unperturbed umbilic: the caustic is a point and the outside carries
/// two sheets with no fold to name them; walls are left without pairs.
fn finish_point_caustic(st: &mut Strata, notes: &mut Vec<String>) {
    for r in &mut st.graph.regions {
        r.labels = vec![1, 2];
    }
    notes.push("point caustic: saddles are not named by a fold, walls carry no pair or tau".into());
}

fn label_and_glue(st: &mut Strata, notes: &mut Vec<String>) -> Result<()> {
    let track = st.config.track;
    let mut reference = critical_points(&st.f, BasePoint::from(st.center), &track.solver)?;
    if reference.points.len() != 4 {
        return Err(Error::NotInsideCaustic { x: reference.base });
    }
    crate::family::reference_labels(&mut reference.points);
    st.reference = Some(reference.clone());

    // dying saddles and outside seeds, one per fold arc
    let curve = require_closed(&st.caustic)?.clone();
    let mut sector_data = Vec::new();
    let mut arc_dying = Vec::new();
    for (a, arc) in curve.arcs.iter().enumerate() {
        let m = geom::polyline_at(&arc.polyline, 0.5);
        let (_, k, _) = geom::point_polyline_distance(m, &arc.polyline);
        let t = geom::unit(geom::sub(arc.polyline[k + 1], arc.polyline[k]));
        let mut nrm = [-t[1], t[0]];
        let h = 1e-3 * geom::dist(m, st.center).max(1e-3);
        if st.caustic.contains(geom::add(m, geom::scale(nrm, h))) {
            nrm = geom::scale(nrm, -1.0);
        }
        let p_in = geom::sub(m, geom::scale(nrm, h));
        let p_out = geom::add(m, geom::scale(nrm, h));
        let inner = continue_labels(&st.f, &reference, &[BasePoint::from(st.center), BasePoint::from(p_in)], &track)?;
        let dying = saddle_nearest_node(&inner)?;
        let seed = continue_labels(&st.f, &inner, &[BasePoint::from(p_in), BasePoint::from(p_out)], &track)?;
        if seed.points.len() != 2 {
            return Err(Error::LabelMismatch(format!("fold arc {a} seed has {} points", seed.points.len())));
        }
        arc_dying.push(dying);
        sector_data.push(Sector { arc: a, dying, seed });
    }
    st.arc_dying = arc_dying.clone();
    st.sector_data = sector_data;

    // labels and incidences
    let mut sector_label: Vec<Option<usize>> = vec![None; st.sample_sector.iter().flatten().max().map_or(0, |m| m + 1)];
    for s in &st.sector_data {
        let Some((_, sec)) = st.sector_of(s.seed.base.as_array()) else {
            return Err(Error::LabelMismatch(format!("seed of arc {} lies in no sector", s.arc)));
        };
        match sector_label[sec] {
            Some(d) if d != s.dying => {
                return Err(Error::LabelMismatch(format!(
                    "outside sector {sec} borders folds where s{d} and s{} die",
                    s.dying
                )))
            }
            _ => sector_label[sec] = Some(s.dying),
        }
    }
    for r in 0..st.graph.regions.len() {
        let rep = st.graph.regions[r].rep.as_array();
        if st.graph.regions[r].inside {
            let i = st.incidence_at(rep)?;
            st.graph.regions[r].incidence = Some(i);
            st.graph.regions[r].labels = vec![1, 2, 3];
        } else {
            let (_, sec) = st
                .sector_of(rep)
                .ok_or_else(|| Error::LabelMismatch(format!("region {r} lies in no sector")))?;
            let d = sector_label[sec].ok_or_else(|| Error::LabelMismatch(format!("region {r} sees no fold arc")))?;
            st.graph.regions[r].labels = (1..=3).filter(|&l| l != d).collect();
        }
    }

    // fold data
    for pi in 0..st.pieces.len() {
        let Some(w) = st.piece_wall[pi] else { continue };
        if let PieceSource::Arc(a) = st.pieces[pi].source {
            st.graph.walls[w].dying = Some(arc_dying[a]);
        }
    }

    // separatrix pairs of the traced walls
    let mut traced_pair = Vec::new();
    for k in 0..st.traced.len() {
        traced_pair.push(wall_pair(st, k)?);
    }
    for pi in 0..st.pieces.len() {
        let (Some(w), PieceSource::Traced(k)) = (st.piece_wall[pi], st.pieces[pi].source) else { continue };
        st.graph.walls[w].pair = Some(traced_pair[k]);
    }

    // cusps
    let ncusp = curve.cusps.len();
    let mut cusps = Vec::new();
    for (k, c) in curve.cusps.iter().enumerate() {
        let adjacent: Vec<usize> = curve
            .arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.from_cusp == k || a.to_cusp == k)
            .map(|(i, _)| arc_dying[i])
            .collect();
        let pair = match adjacent.as_slice() {
            [a, b] if a != b => ((*a).min(*b), (*a).max(*b)),
            _ => {
                return Err(Error::LabelMismatch(format!("cusp {k} borders folds {adjacent:?}")));
            }
        };
        cusps.push(Cusp { id: k, point: c.point, pair, axis: c.axis, case: None, loop_walls: Vec::new() });
    }
    st.graph.cusps = cusps;

    // small loops about the cusps
    let min_sep = (0..ncusp)
        .flat_map(|a| (a + 1..ncusp).map(move |b| (a, b)))
        .map(|(a, b)| geom::dist(curve.cusps[a].point, curve.cusps[b].point))
        .fold(f64::INFINITY, f64::min);
    let rc = (0.2 * min_sep).min(0.05);
    for k in 0..ncusp {
        let twist = st.graph.walls.iter().find(|w| w.kind == WallKind::TwistLine && w.cusp == Some(k));
        let dir = match twist {
            Some(w) => geom::sub(w.polyline[1], w.polyline[0]),
            None => curve.cusps[k].axis,
        };
        let start = dir[1].atan2(dir[0]) + 0.02;
        let l = st.loop_along(&Strata::circle(curve.cusps[k].point, rc, start, 1440))?;
        let walls: Vec<(usize, bool)> = l.crossings.iter().map(|c| (c.wall, c.forward)).collect();
        let inside = l
            .crossings
            .iter()
            .filter_map(|c| {
                let w = &st.graph.walls[c.wall];
                let to = if c.forward { w.right } else { w.left };
                st.graph.regions[to].inside.then_some(to)
            })
            .next();
        let case = match inside.and_then(|r| st.graph.regions[r].incidence) {
            Some(i) => match cusp_case(st.graph.cusps[k].pair, i) {
                Ok(c) => Some(c),
                Err(e) => {
                    notes.push(format!("cusp {k}: {e}"));
                    None
                }
            },
            None => None,
        };
        st.graph.cusps[k].loop_walls = walls;
        st.graph.cusps[k].case = case;
    }

    // tau: forced by the incidences where they differ, else by the cusp loops
    for w in 0..st.graph.walls.len() {
        let wall = &st.graph.walls[w];
        if wall.kind != WallKind::Bifurcation {
            continue;
        }
        let (l, r) = (&st.graph.regions[wall.left], &st.graph.regions[wall.right]);
        if let (Some(iu), Some(iv), Some((i, j))) = (l.incidence, r.incidence, wall.pair) {
            let changed = (0..3).filter(|&k| iu[k] != iv[k]).count();
            let tau = solve_tau(iu, iv, i, j).ok().filter(|_| changed <= 1);
            match tau {
                Some(t) => st.graph.walls[w].tau = t,
                None => {
                    return Err(Error::UnresolvedWall(format!(
                        "wall {w}: incidences {iu:?} and {iv:?} disagree with the separatrix ({i},{j})"
                    )))
                }
            }
        }
    }
    let loops: Vec<Loop> = (0..ncusp).filter_map(|k| st.graph.cusp_loop(k).ok()).collect();
    let free = resolve_free_taus(&mut st.graph, &loops)?;
    for (w, t) in free {
        notes.push(format!("wall {w}: tau = {t} fixed by the cusp loops"));
    }
    Ok(())
}

/// `(target, source)` of the saddle connection on traced wall `k`.
fn wall_pair(st: &Strata, k: usize) -> Result<(usize, usize)> {
    let probe = &st.traced[k].probe;
    let a = st.labelled_fiber(probe.minus)?;
    let b = continue_labels(&st.f, &a, &[BasePoint::from(probe.minus), BasePoint::from(probe.plus)], &st.config.track)?;
    let flow = st.config.walls.flow;
    let ends = |fb: &FiberData, label: Label| -> Result<([(u8, usize); 2], [(u8, usize); 2])> {
        let idx = fb
            .points
            .iter()
            .position(|p| p.label == label)
            .ok_or_else(|| Error::LabelMismatch(format!("{label} missing at {:?}", fb.base)))?;
        let s = saddle_separatrices(&st.f, fb, &st.sectors, idx, &flow)?;
        let mut stb = [terminal_key(&s.stable[0].terminal), terminal_key(&s.stable[1].terminal)];
        let mut uns = [terminal_key(&s.unstable[0].terminal), terminal_key(&s.unstable[1].terminal)];
        stb.sort();
        uns.sort();
        Ok((stb, uns))
    };
    let mut source = Vec::new();
    let mut target = Vec::new();
    for p in a.saddles() {
        let (s0, u0) = ends(&a, p.label)?;
        let (s1, u1) = ends(&b, p.label)?;
        let l = p.label.saddle_index().map(|i| i + 1).unwrap_or(0);
        if u0 != u1 {
            source.push(l);
        }
        if s0 != s1 {
            target.push(l);
        }
    }
    match (target.as_slice(), source.as_slice()) {
        ([t], [s]) if t != s && *t > 0 && *s > 0 => Ok((*t, *s)),
        _ => Err(Error::UnresolvedWall(format!(
            "wall {k}: changed stable branches {target:?}, unstable {source:?}"
        ))),
    }
}
