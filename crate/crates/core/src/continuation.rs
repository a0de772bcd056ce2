//! Continuation of labeled critical points along paths in the base.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{critical_points, BasePoint, CriticalPoint, FiberData, GeneratingFunction, Label, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackConfig {
    pub solver: SolverConfig,
    /// Largest step along the path.
    pub max_step: f64,
    /// Steps are halved down to this length before giving up.
    pub min_step: f64,
    /// A match is accepted when the nearest candidate is closer than this
    /// fraction of the second nearest.
    pub match_ratio: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        TrackConfig {
            solver: SolverConfig::default(),
            max_step: 0.05,
            min_step: 1e-12,
            match_ratio: 0.3,
        }
    }
}

/// Fiber at `x`, nudging along `dir` when `x` lands on a degenerate fiber.
fn fiber_near(f: &GeneratingFunction, x: BasePoint, dir: [f64; 2], cfg: &TrackConfig) -> Result<FiberData> {
    let mut last = None;
    for k in 0..8 {
        let s = if k == 0 { 0.0 } else { 1e-9 * 4f64.powi(k) };
        let p = BasePoint::new(x.x1 + s * dir[0], x.x2 + s * dir[1]);
        match critical_points(f, p, &cfg.solver) {
            Ok(fb) => return Ok(fb),
            Err(e @ Error::DegenerateFiber { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

fn nearest_two(p: [f64; 2], cands: &[CriticalPoint]) -> (usize, f64, f64) {
    let mut best = (usize::MAX, f64::INFINITY, f64::INFINITY);
    for (k, c) in cands.iter().enumerate() {
        let d = c.dist(p);
        if d < best.1 {
            best = (k, d, best.1);
        } else if d < best.2 {
            best.2 = d;
        }
    }
    best
}

/// Match `old` points to `new` ones when the counts agree.
fn match_same(old: &FiberData, new: &FiberData, ratio: f64) -> Option<Vec<CriticalPoint>> {
    let mut out = new.points.clone();
    let mut used = vec![false; new.points.len()];
    for p in &old.points {
        let (k, d1, d2) = nearest_two(p.y, &new.points);
        if k == usize::MAX || used[k] || d1 > ratio * d2 || new.points[k].morse_index != p.morse_index {
            return None;
        }
        used[k] = true;
        out[k].label = p.label;
    }
    Some(out)
}

/// Closest pair of points in a fiber.
fn closest_pair(pts: &[CriticalPoint]) -> (usize, usize, f64) {
    let mut best = (0, 0, f64::INFINITY);
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let d = pts[a].dist(pts[b].y);
            if d < best.2 {
                best = (a, b, d);
            }
        }
    }
    best
}

/// Labels across a fold: the vanishing or newborn pair is the closest pair;
/// survivors are matched by proximity.
fn match_fold(old: &FiberData, new: &FiberData, ratio: f64) -> Option<Vec<CriticalPoint>> {
    let (big, small, growing) = if old.points.len() > new.points.len() {
        (old, new, false)
    } else {
        (new, old, true)
    };
    if big.points.len() != small.points.len() + 2 {
        return None;
    }
    let (a, b, dpair) = closest_pair(&big.points);
    let survivors: Vec<usize> = (0..big.points.len()).filter(|&k| k != a && k != b).collect();
    // the pair must be much closer than anything else
    let rest = survivors
        .iter()
        .flat_map(|&s| [big.points[s].dist(big.points[a].y), big.points[s].dist(big.points[b].y)])
        .fold(f64::INFINITY, f64::min);
    if dpair > ratio * rest {
        return None;
    }
    let indices: Vec<u8> = vec![big.points[a].morse_index, big.points[b].morse_index];
    if !(indices.contains(&1) && indices.contains(&2)) {
        return None;
    }
    let surv: Vec<CriticalPoint> = survivors.iter().map(|&k| big.points[k]).collect();
    let sub = FiberData {
        base: big.base,
        points: surv,
        inside_caustic: false,
    };
    if growing {
        let matched = match_same(small, &sub, ratio)?;
        let mut out = Vec::with_capacity(4);
        let mut have = Vec::new();
        for (k, &s) in survivors.iter().enumerate() {
            let mut p = big.points[s];
            p.label = matched[k].label;
            have.push(p.label);
            out.push((s, p));
        }
        let missing = [Label::S1, Label::S2, Label::S3]
            .into_iter()
            .find(|l| !have.contains(l))?;
        for k in [a, b] {
            let mut p = big.points[k];
            p.label = if p.morse_index == 2 { Label::N } else { missing };
            out.push((k, p));
        }
        out.sort_by_key(|(k, _)| *k);
        Some(out.into_iter().map(|(_, p)| p).collect())
    } else {
        match_same(&sub, small, ratio)
    }
}

/// Continue the labels of `start` along the polyline `path` (whose first
/// vertex should be `start.base`). Crossing folds is allowed; the dying
/// or newborn pair is identified as the closest node-saddle pair.
pub fn continue_labels(
    f: &GeneratingFunction,
    start: &FiberData,
    path: &[BasePoint],
    cfg: &TrackConfig,
) -> Result<FiberData> {
    let mut cur = start.clone();
    for seg in path.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let len = a.dist(b);
        if len == 0.0 {
            continue;
        }
        let dir = [(b.x1 - a.x1) / len, (b.x2 - a.x2) / len];
        let mut t = 0.0;
        let mut h = cfg.max_step.min(len);
        while t < len {
            let step = h.min(len - t);
            let x = if t + step >= len { b } else { a.lerp(b, (t + step) / len) };
            let next = fiber_near(f, x, dir, cfg);
            let matched = match next {
                Ok(nf) => {
                    let m = if nf.points.len() == cur.points.len() {
                        match_same(&cur, &nf, cfg.match_ratio)
                    } else {
                        match_fold(&cur, &nf, cfg.match_ratio)
                    };
                    m.map(|pts| FiberData { points: pts, ..nf })
                }
                Err(Error::DegenerateFiber { .. }) => None,
                Err(e) => return Err(e),
            };
            match matched {
                Some(nf) => {
                    cur = nf;
                    t += step;
                    h = (h * 1.5).min(cfg.max_step);
                }
                None => {
                    h *= 0.5;
                    if h < cfg.min_step {
                        return Err(Error::SheetCollision {
                            step: 0,
                            distance: cur.separation(),
                        });
                    }
                }
            }
        }
    }
    Ok(cur)
}

/// Label the two outside critical points at `start` as sheets 1 and 2 in a
/// fixed order (increasing `y1`, then `y2`).
pub fn order_sheets(fiber: &mut FiberData) {
    let mut idx: Vec<usize> = (0..fiber.points.len()).collect();
    idx.sort_by(|&a, &b| {
        let (p, q) = (fiber.points[a].y, fiber.points[b].y);
        p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1]))
    });
    for (slot, k) in idx.into_iter().enumerate() {
        fiber.points[k].label = if slot < 3 { Label::saddle(slot) } else { Label::Unlabeled };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{perturb, symmetric_umbilic, Perturbation};

    #[test]
    fn labels_survive_fold_round_trip() {
        let f = perturb(&symmetric_umbilic(), &Perturbation::radial(0.1)).unwrap();
        let cfg = TrackConfig::default();
        let x0 = BasePoint::ORIGIN;
        let start = critical_points(&f, x0, &cfg.solver).unwrap();
        assert_eq!(start.points.len(), 4);
        // out across a fold (between cusps), then back in along another path
        let out = BasePoint::polar(0.05, std::f64::consts::PI / 3.0);
        let back = [x0, out, BasePoint::polar(0.05, 0.9), BasePoint::polar(0.001, 0.9), x0];
        let end = continue_labels(&f, &start, &back, &cfg).unwrap();
        for p in &start.points {
            let q = end.by_label(p.label).unwrap();
            assert!(q.dist(p.y) < 1e-9, "{:?} moved", p.label);
        }
    }
}
