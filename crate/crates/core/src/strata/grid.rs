//! Star-shaped sampling grid about a point inside the caustic: rings that
//! follow the caustic inside and grow geometrically outside it.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::caustic::{closed_ring, Caustic};
use super::geom::{self, P2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub angles: usize,
    pub inner_levels: usize,
    pub outer_levels: usize,
    /// Offset of the first outside ring from the caustic.
    pub first_offset: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            angles: 240,
            inner_levels: 12,
            outer_levels: 36,
            first_offset: 1e-3,
        }
    }
}

/// Axis-aligned window `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: P2,
    pub hi: P2,
}

impl Window {
    pub fn square(half: f64) -> Self {
        Window { lo: [-half, -half], hi: [half, half] }
    }

    pub fn contains(&self, p: P2) -> bool {
        p[0] >= self.lo[0] && p[0] <= self.hi[0] && p[1] >= self.lo[1] && p[1] <= self.hi[1]
    }

    pub fn corners(&self) -> [P2; 4] {
        [self.lo, [self.hi[0], self.lo[1]], self.hi, [self.lo[0], self.hi[1]]]
    }

    pub fn far_distance(&self, c: P2) -> f64 {
        self.corners().iter().map(|&p| geom::dist(p, c)).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    /// Fraction of the way from the centre to the caustic.
    Inner(f64),
    /// Distance outside the caustic along the ray.
    Outer(f64),
}

#[derive(Debug, Clone)]
pub struct StarGrid {
    pub center: P2,
    pub levels: Vec<Level>,
    pub angles: usize,
    /// Distance from the centre to the caustic along each grid ray.
    pub rho: Vec<f64>,
    /// Row-major over `(level, angle)`; `None` outside the window.
    pub points: Vec<Option<P2>>,
    ring: Vec<P2>,
}

impl StarGrid {
    pub fn new(caustic: &Caustic, center: P2, window: &Window, cfg: &GridConfig) -> Self {
        let ring = caustic.curves.iter().find(|c| c.closed).map(closed_ring).unwrap_or_default();
        let mut levels = Vec::new();
        if !ring.is_empty() {
            for k in 1..=cfg.inner_levels {
                levels.push(Level::Inner(k as f64 / (cfg.inner_levels + 1) as f64));
            }
        }
        let far = window.far_distance(center);
        let first = cfg.first_offset.min(far);
        let ratio = if cfg.outer_levels > 1 {
            (far / first).powf(1.0 / (cfg.outer_levels - 1) as f64)
        } else {
            1.0
        };
        for k in 0..cfg.outer_levels {
            levels.push(Level::Outer(first * ratio.powi(k as i32)));
        }
        let mut g = StarGrid {
            center,
            levels,
            angles: cfg.angles,
            rho: Vec::new(),
            points: Vec::new(),
            ring,
        };
        g.rho = (0..cfg.angles).map(|j| g.rho_at(g.angle(j))).collect();
        g.points = (0..g.levels.len())
            .flat_map(|l| (0..cfg.angles).map(move |j| (l, j)))
            .map(|(l, j)| {
                let p = g.point_at(g.levels[l], g.angle(j));
                window.contains(p).then_some(p)
            })
            .collect();
        g
    }

    /// Rays sit half a step off the axes so that symmetric walls never pass
    /// through a sample.
    pub fn angle(&self, j: usize) -> f64 {
        TAU * (j as f64 + 0.5) / self.angles as f64
    }

    /// Distance to the caustic along the ray at angle `theta`.
    pub fn rho_at(&self, theta: f64) -> f64 {
        if self.ring.is_empty() {
            return 0.0;
        }
        let d = [theta.cos(), theta.sin()];
        let far = geom::add(self.center, geom::scale(d, 1e6));
        let hits = geom::segment_polyline_hits(self.center, far, &self.ring);
        hits.iter().map(|h| h.0 * 1e6).fold(f64::INFINITY, f64::min)
    }

    pub fn point_at(&self, level: Level, theta: f64) -> P2 {
        let rho = self.rho_at(theta);
        self.point_with_rho(level, theta, rho)
    }

    fn point_with_rho(&self, level: Level, theta: f64, rho: f64) -> P2 {
        let u = [theta.cos(), theta.sin()];
        let r = match level {
            Level::Inner(s) => s * rho,
            Level::Outer(d) => rho + d,
        };
        geom::add(self.center, geom::scale(u, r))
    }

    pub fn index(&self, level: usize, j: usize) -> usize {
        level * self.angles + j % self.angles
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx / self.angles, idx % self.angles)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_inner(&self, level: usize) -> bool {
        matches!(self.levels[level], Level::Inner(_))
    }

    /// Grid edges: along each ring and between adjacent rings on the same
    /// side of the caustic, plus the edges crossing it.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for l in 0..self.levels.len() {
            for j in 0..self.angles {
                let a = self.index(l, j);
                if self.points[a].is_none() {
                    continue;
                }
                let b = self.index(l, j + 1);
                if self.points[b].is_some() {
                    out.push((a, b));
                }
                if l + 1 < self.levels.len() {
                    let c = self.index(l + 1, j);
                    if self.points[c].is_some() {
                        out.push((a, c));
                    }
                }
            }
        }
        out
    }

    /// Indices of existing points sorted by distance to `p`.
    pub fn nearest(&self, p: P2, count: usize) -> Vec<usize> {
        let mut v: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .filter_map(|(k, q)| q.map(|q| (geom::dist(p, q), k)))
            .collect();
        let count = count.min(v.len());
        if count == 0 {
            return Vec::new();
        }
        v.select_nth_unstable_by(count - 1, |a, b| a.0.total_cmp(&b.0));
        v.truncate(count);
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.into_iter().map(|(_, k)| k).collect()
    }
}
