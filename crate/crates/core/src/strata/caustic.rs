//! The caustic: the critical set `det Hess f = 0` traced in the `y`-plane
//! and pushed to the base by `x = grad f(y)`, with its cusps.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::geom::{self, P2};
use crate::error::{Error, Result};
use crate::family::{sym_eigs, sym_eigvec, GeneratingFunction};

/// A cusp is accepted where the image tangent of the critical curve falls
/// below this norm.
pub const CUSP_TANGENT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausticConfig {
    /// Radius of the disc in the `y`-plane scanned for seeds.
    pub scan_radius: f64,
    /// Number of rays in the seed scan.
    pub scan_rays: usize,
    /// Samples per ray.
    pub scan_samples: usize,
    /// Largest predictor step along the critical set.
    pub max_step: f64,
    /// Target spacing of the image polyline.
    pub image_step: f64,
    /// Curves whose image leaves this box are reported as open.
    pub bound: f64,
}

impl Default for CausticConfig {
    fn default() -> Self {
        CausticConfig {
            scan_radius: 3.0,
            scan_rays: 72,
            scan_samples: 400,
            max_step: 2e-3,
            image_step: 2e-3,
            bound: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspPoint {
    /// Position on the base.
    pub point: P2,
    pub preimage: P2,
    /// Unit vector along which the cusp opens away from its two arcs.
    pub axis: P2,
    /// Index of the curve vertex right before the cusp.
    pub vertex: usize,
}

/// Image of the caustic between two consecutive cusps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldArc {
    pub from_cusp: usize,
    pub to_cusp: usize,
    pub polyline: Vec<P2>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausticCurve {
    pub preimage: Vec<P2>,
    /// Image polyline; for a closed curve the first vertex is not repeated.
    pub image: Vec<P2>,
    pub closed: bool,
    pub cusps: Vec<CuspPoint>,
    pub arcs: Vec<FoldArc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Caustic {
    pub curves: Vec<CausticCurve>,
    /// Set when the caustic collapses to a point (the unperturbed umbilic).
    pub point: Option<P2>,
}

impl Caustic {
    pub fn cusp_count(&self) -> usize {
        self.curves.iter().map(|c| c.cusps.len()).sum()
    }

    pub fn closed_count(&self) -> usize {
        self.curves.iter().filter(|c| c.closed).count()
    }

    pub fn cusps(&self) -> impl Iterator<Item = &CuspPoint> {
        self.curves.iter().flat_map(|c| c.cusps.iter())
    }

    /// Inside one of the closed components.
    pub fn contains(&self, x: P2) -> bool {
        self.curves.iter().any(|c| c.closed && geom::point_in_polygon(x, &c.image))
    }

    pub fn distance(&self, x: P2) -> f64 {
        let mut d = self.point.map_or(f64::INFINITY, |p| geom::dist(x, p));
        for c in &self.curves {
            d = d.min(geom::point_polyline_distance(x, &closed_ring(c)).0);
        }
        d
    }

    /// A point well inside the first closed component.
    pub fn interior_point(&self) -> Option<P2> {
        if let Some(p) = self.point {
            return Some(p);
        }
        let c = self.curves.iter().find(|c| c.closed)?;
        if c.cusps.len() >= 3 {
            let s = c.cusps.iter().fold([0.0, 0.0], |s, k| geom::add(s, k.point));
            let m = geom::scale(s, 1.0 / c.cusps.len() as f64);
            if geom::point_in_polygon(m, &c.image) {
                return Some(m);
            }
        }
        Some(geom::area_centroid(&c.image))
    }
}

pub fn closed_ring(c: &CausticCurve) -> Vec<P2> {
    let mut v = c.image.clone();
    if c.closed {
        if let Some(&p) = c.image.first() {
            v.push(p);
        }
    }
    v
}

fn image(f: &GeneratingFunction, y: P2) -> P2 {
    f.gradient(y)
}

/// Newton projection onto `det Hess = 0` along the gradient of `det`.
fn correct(f: &GeneratingFunction, mut y: P2) -> Option<P2> {
    for _ in 0..30 {
        let d = f.hessian_det(y);
        let g = f.hessian_det_gradient(y);
        let gg = geom::dot(g, g);
        if gg == 0.0 || !gg.is_finite() {
            return None;
        }
        let step = geom::scale(g, d / gg);
        y = geom::sub(y, step);
        if geom::norm(step) < 1e-15 * (1.0 + geom::norm(y)) {
            return Some(y);
        }
    }
    (f.hessian_det(y).abs() < 1e-10).then_some(y)
}

fn tangent(f: &GeneratingFunction, y: P2) -> P2 {
    let g = f.hessian_det_gradient(y);
    geom::unit([-g[1], g[0]])
}

/// Nonzero eigenvector of the rank-one Hessian at a fold point.
fn fold_direction(f: &GeneratingFunction, y: P2) -> P2 {
    let h = f.hessian(y);
    let e = sym_eigs(h);
    let lam = if e[0].abs() > e[1].abs() { e[0] } else { e[1] };
    sym_eigvec(h, lam)
}

/// Seeds on the critical set from sign changes along rays.
fn seeds(f: &GeneratingFunction, cfg: &CausticConfig) -> Vec<P2> {
    let mut out = Vec::new();
    for k in 0..cfg.scan_rays {
        let th = TAU * (k as f64 + 0.5) / cfg.scan_rays as f64;
        let dir = [th.cos(), th.sin()];
        let at = |s: f64| f.hessian_det(geom::scale(dir, s));
        let mut s0 = 0.0;
        let mut d0 = at(0.0);
        for j in 1..=cfg.scan_samples {
            let s1 = cfg.scan_radius * j as f64 / cfg.scan_samples as f64;
            let d1 = at(s1);
            if d0 != 0.0 && d0.signum() != d1.signum() {
                let (mut a, mut b) = (s0, s1);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if at(m).signum() == d0.signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                out.push(geom::scale(dir, 0.5 * (a + b)));
            }
            s0 = s1;
            d0 = d1;
        }
    }
    out
}

/// Follow the critical set from `seed` in one direction. Returns the
/// vertices and whether the walk came back to the seed.
fn walk(f: &GeneratingFunction, seed: P2, sign: f64, cfg: &CausticConfig) -> (Vec<P2>, bool) {
    let mut pts = vec![seed];
    let mut y = seed;
    let mut t_prev = geom::scale(tangent(f, seed), sign);
    let mut travelled = 0.0;
    let max_vertices = 2_000_000;
    while pts.len() < max_vertices {
        let mut t = tangent(f, y);
        if geom::dot(t, t_prev) < 0.0 {
            t = geom::scale(t, -1.0);
        }
        let speed = geom::norm(mat_vec(f.hessian(y), t));
        let mut h = cfg.max_step.min(if speed > 0.0 { cfg.image_step / speed } else { cfg.max_step });
        h = h.max(1e-9);
        let next = loop {
            match correct(f, geom::add(y, geom::scale(t, h))) {
                Some(z) if geom::dist(z, y) < 2.0 * h && geom::dot(geom::sub(z, y), t) > 0.0 => break Some(z),
                _ if h > 1e-10 => h *= 0.5,
                _ => break None,
            }
        };
        let Some(z) = next else { return (pts, false) };
        travelled += geom::dist(z, y);
        // closing: back within one step of the seed after leaving it
        if travelled > 4.0 * cfg.max_step && geom::dist(z, seed) <= 1.5 * h.max(geom::dist(z, y)) {
            let ahead = geom::dot(geom::sub(seed, y), t) > 0.0;
            if ahead || geom::dist(z, seed) < 1e-9 {
                return (pts, true);
            }
        }
        let x = image(f, z);
        if x[0].abs() > cfg.bound || x[1].abs() > cfg.bound || geom::norm(z) > 10.0 * cfg.scan_radius {
            pts.push(z);
            return (pts, false);
        }
        t_prev = t;
        y = z;
        pts.push(z);
    }
    (pts, false)
}

fn mat_vec(h: [[f64; 2]; 2], v: P2) -> P2 {
    [h[0][0] * v[0] + h[0][1] * v[1], h[1][0] * v[0] + h[1][1] * v[1]]
}

fn trace_from(f: &GeneratingFunction, seed: P2, cfg: &CausticConfig) -> (Vec<P2>, bool) {
    let (fwd, closed) = walk(f, seed, 1.0, cfg);
    if closed {
        return (fwd, true);
    }
    let (bwd, _) = walk(f, seed, -1.0, cfg);
    let mut pts: Vec<P2> = bwd.into_iter().skip(1).rev().collect();
    pts.extend(fwd);
    (pts, false)
}

/// Cusps along a traced curve: zeros of `v . t` with `v` the fold
/// direction carried continuously along the curve.
fn find_cusps(f: &GeneratingFunction, pre: &[P2], closed: bool) -> Vec<CuspPoint> {
    let n = pre.len();
    if n < 3 {
        return Vec::new();
    }
    let tan = |k: usize| -> P2 {
        let (a, b) = if closed {
            (pre[(k + n - 1) % n], pre[(k + 1) % n])
        } else {
            (pre[k.saturating_sub(1)], pre[(k + 1).min(n - 1)])
        };
        geom::unit(geom::sub(b, a))
    };
    let mut v = fold_direction(f, pre[0]);
    let mut g: Vec<f64> = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    for k in 0..n {
        let mut w = fold_direction(f, pre[k]);
        if geom::dot(w, v) < 0.0 {
            w = geom::scale(w, -1.0);
        }
        v = w;
        vs.push(w);
        g.push(geom::dot(w, tan(k)));
    }
    let last = if closed { n } else { n - 1 };
    let mut out = Vec::new();
    for k in 0..last {
        let j = (k + 1) % n;
        let mut gj = g[j];
        if closed && j == 0 && geom::dot(vs[0], vs[n - 1]) < 0.0 {
            gj = -gj;
        }
        if g[k] == 0.0 || g[k].signum() == gj.signum() {
            continue;
        }
        let yc = bisect_cusp(f, pre[k], pre[j], vs[k]);
        if geom::norm(mat_vec(f.hessian(yc), tangent(f, yc))) >= CUSP_TANGENT_TOL {
            continue;
        }
        let point = image(f, yc);
        out.push(CuspPoint { point, preimage: yc, axis: [0.0, 0.0], vertex: k });
    }
    for c in &mut out {
        c.axis = cusp_axis(f, pre, c);
    }
    out
}

fn bisect_cusp(f: &GeneratingFunction, a: P2, b: P2, v_ref: P2) -> P2 {
    let chord = geom::unit(geom::sub(b, a));
    let value = |y: P2| {
        let mut w = fold_direction(f, y);
        if geom::dot(w, v_ref) < 0.0 {
            w = geom::scale(w, -1.0);
        }
        let t = tangent(f, y);
        let t = if geom::dot(t, chord) < 0.0 { geom::scale(t, -1.0) } else { t };
        geom::dot(w, t)
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    let g0 = value(a);
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        let y = correct(f, geom::add(a, geom::scale(geom::sub(b, a), m))).unwrap_or(a);
        if value(y).signum() == g0.signum() {
            lo = m;
        } else {
            hi = m;
        }
    }
    let m = 0.5 * (lo + hi);
    correct(f, geom::add(a, geom::scale(geom::sub(b, a), m))).unwrap_or(a)
}

/// The two arcs leave a cusp on the same side; the axis points away from
/// them.
fn cusp_axis(f: &GeneratingFunction, pre: &[P2], c: &CuspPoint) -> P2 {
    let n = pre.len();
    let t = tangent(f, c.preimage);
    let scale = if n > 1 { geom::dist(pre[0], pre[1]).max(1e-6) } else { 1e-3 };
    let mut best = [0.0, 0.0];
    for m in [20.0, 5.0, 1.0] {
        let d = m * scale;
        let p = correct(f, geom::add(c.preimage, geom::scale(t, d)));
        let q = correct(f, geom::sub(c.preimage, geom::scale(t, d)));
        if let (Some(p), Some(q)) = (p, q) {
            let mid = geom::scale(geom::add(image(f, p), image(f, q)), 0.5);
            let a = geom::sub(mid, c.point);
            if geom::norm(a) > 0.0 {
                best = geom::unit(geom::scale(a, -1.0));
                break;
            }
        }
    }
    best
}

fn split_arcs(curve: &CausticCurve) -> Vec<FoldArc> {
    let n = curve.image.len();
    let m = curve.cusps.len();
    if m == 0 {
        return Vec::new();
    }
    let mut arcs = Vec::new();
    let count = if curve.closed { m } else { m - 1 };
    for a in 0..count {
        let b = (a + 1) % m;
        let (ca, cb) = (&curve.cusps[a], &curve.cusps[b]);
        let mut poly = vec![ca.point];
        let mut k = (ca.vertex + 1) % n;
        loop {
            poly.push(curve.image[k]);
            if k == cb.vertex {
                break;
            }
            k = (k + 1) % n;
            if k == (ca.vertex + 1) % n {
                break;
            }
        }
        poly.push(cb.point);
        arcs.push(FoldArc { from_cusp: a, to_cusp: b, polyline: poly });
    }
    arcs
}

/// Trace every component of the caustic that meets the seed disc.
pub fn trace_caustic(f: &GeneratingFunction, cfg: &CausticConfig) -> Result<Caustic> {
    let h0 = f.hessian([0.0, 0.0]);
    let seeds = seeds(f, cfg);
    let mut curves: Vec<CausticCurve> = Vec::new();
    let mut traced: Vec<Vec<P2>> = Vec::new();
    for s in seeds {
        let Some(s) = correct(f, s) else { continue };
        if traced
            .iter()
            .any(|pre| geom::point_polyline_distance(s, pre).0 < 10.0 * cfg.max_step)
        {
            continue;
        }
        let (pre, closed) = trace_from(f, s, cfg);
        if pre.len() < 3 {
            continue;
        }
        let mut ring = pre.clone();
        if closed {
            ring.push(pre[0]);
        }
        traced.push(ring);
        let mut pre = pre;
        let mut img: Vec<P2> = pre.iter().map(|&y| image(f, y)).collect();
        // closed images run counterclockwise
        if closed && geom::signed_area(&pre) < 0.0 {
            pre.reverse();
            img.reverse();
        }
        let cusps = find_cusps(f, &pre, closed);
        let mut curve = CausticCurve { preimage: pre, image: img, closed, cusps, arcs: Vec::new() };
        curve.arcs = split_arcs(&curve);
        curves.push(curve);
    }
    let point = if curves.is_empty() && h0.iter().flatten().all(|v| v.abs() < 1e-14) {
        Some(image(f, [0.0, 0.0]))
    } else {
        None
    };
    if curves.is_empty() && point.is_none() {
        return Err(Error::OpenCurve("no caustic found in the scanned disc".into()));
    }
    Ok(Caustic { curves, point })
}

/// Check that the caustic is one closed curve; used by the region builder.
pub fn require_closed(c: &Caustic) -> Result<&CausticCurve> {
    let closed: Vec<&CausticCurve> = c.curves.iter().filter(|c| c.closed).collect();
    if let Some(open) = c.curves.iter().find(|c| !c.closed) {
        return Err(Error::OpenCurve(format!(
            "caustic component with {} vertices does not close",
            open.preimage.len()
        )));
    }
    match closed.as_slice() {
        [one] => Ok(one),
        _ => Err(Error::OpenCurve(format!("expected one closed caustic, found {}", closed.len()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{perturb, symmetric_umbilic, Perturbation};

    #[test]
    fn perturbed_umbilic_has_three_cusps() {
        let f = perturb(&symmetric_umbilic(), &Perturbation::radial(0.1)).unwrap();
        let c = trace_caustic(&f, &CausticConfig::default()).unwrap();
        assert_eq!(c.curves.len(), 1);
        assert!(c.curves[0].closed);
        assert_eq!(c.cusp_count(), 3);
        let mut pts: Vec<P2> = c.cusps().map(|k| k.point).collect();
        pts.sort_by(|a, b| a[1].total_cmp(&b[1]));
        let want = [[-0.015, -0.025980762], [0.03, 0.0], [-0.015, 0.025980762]];
        for (p, w) in pts.iter().zip(want) {
            assert!(geom::dist(*p, w) < 1e-6, "{p:?} vs {w:?}");
        }
        for k in c.cusps() {
            // axes point radially outward
            assert!(geom::dot(k.axis, geom::unit(k.point)) > 0.999, "{:?}", k.axis);
        }
        assert_eq!(c.curves[0].arcs.len(), 3);
        assert!(c.contains([0.0, 0.0]));
        assert!(!c.contains([0.1, 0.0]));
    }

    #[test]
    fn unperturbed_caustic_is_a_point() {
        let c = trace_caustic(&symmetric_umbilic(), &CausticConfig::default()).unwrap();
        assert!(c.curves.is_empty());
        assert_eq!(c.point, Some([0.0, 0.0]));
    }
}
