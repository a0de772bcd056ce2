//! Gradient flow of `f_x`: adaptive integration, saddle separatrices,
//! terminal classification and incidence columns.
//!
//! The flow is `dy/dt = -grad f_x(y)`. The index-2 point is its source, so
//! a gradient line from `n` to `s_i` is a stable branch of `s_i` traced
//! backward into `n`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{sym_eigvec, BasePoint, CriticalPoint, FiberData, GeneratingFunction, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// `dy/dt = -grad f_x`
    Descending,
    /// `dy/dt = +grad f_x`, i.e. the descending flow in reversed time
    Ascending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Terminal {
    /// Reached the critical point with this index in the fiber.
    ConvergedTo { point: usize, label: Label },
    /// Crossed the escape radius inside this asymptotic sector.
    Escaped { sector: usize },
    Undecided,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub direction: Direction,
    /// `(t, y1, y2)`
    pub samples: Vec<[f64; 3]>,
    pub terminal: Terminal,
    /// Closest approach to any saddle other than the seed's own.
    pub min_saddle_distance: f64,
}

impl Trajectory {
    pub fn end(&self) -> [f64; 2] {
        let s = self.samples.last().expect("trajectory has a sample");
        [s[1], s[2]]
    }

    pub fn start(&self) -> [f64; 2] {
        [self.samples[0][1], self.samples[0][2]]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,y1,y2\n");
        for p in &self.samples {
            s.push_str(&format!("{:.12e},{:.12e},{:.12e}\n", p[0], p[1], p[2]));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_time: f64,
    pub max_steps: usize,
    /// Trajectories leaving this radius are classified by sector. Raised
    /// automatically to ten times the largest critical point.
    pub escape_radius: f64,
    /// Distance at which a trajectory counts as converged.
    pub converge_tol: f64,
    /// Seed offset relative to the local length scale.
    pub seed_offset: f64,
    pub keep_samples: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            rtol: 1e-9,
            atol: 1e-12,
            max_time: 1e12,
            max_steps: 200_000,
            escape_radius: 8.0,
            converge_tol: 1e-6,
            seed_offset: 1e-5,
            keep_samples: true,
        }
    }
}

/// An open arc of directions `(lo, hi)` (radians, `lo < hi`, possibly with
/// `hi > 2pi`) centred on an attracting direction of the cubic part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub id: usize,
    pub center: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Sector {
    pub fn contains(&self, theta: f64) -> bool {
        let t = theta.rem_euclid(TAU);
        let lo = self.lo.rem_euclid(TAU);
        let w = self.hi - self.lo;
        (t - lo).rem_euclid(TAU) < w
    }
}

/// Sign pattern of the cubic part at infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSectors {
    /// Arcs where the cubic form is negative (the descending flow escapes
    /// into these), ordered by centre angle.
    pub descent: Vec<Sector>,
    /// Arcs where the cubic form is positive.
    pub ascent: Vec<Sector>,
}

fn cubic_at(c: &[f64; 4], th: f64) -> f64 {
    let (s, co) = th.sin_cos();
    c[0] * co * co * co + c[1] * co * co * s + c[2] * co * s * s + c[3] * s * s * s
}

fn cubic_dtheta(c: &[f64; 4], th: f64) -> f64 {
    let (s, co) = th.sin_cos();
    // d/dth of the homogeneous cubic on the unit circle
    let c1 = 3.0 * c[0] * co * co * (-s);
    let c2 = c[1] * (2.0 * co * (-s) * s + co * co * co);
    let c3 = c[2] * ((-s) * s * s + co * 2.0 * s * co);
    let c4 = 3.0 * c[3] * s * s * co;
    c1 + c2 + c3 + c4
}

fn bisect(mut a: f64, mut b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let mut ga = g(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let gm = g(m);
        if gm == 0.0 {
            return m;
        }
        if (gm > 0.0) == (ga > 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Descent and ascent sectors of the cubic part of `f`.
pub fn asymptotic_sectors(f: &GeneratingFunction) -> Result<AsymptoticSectors> {
    let c = f.cubic_form();
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::DegenerateLeadingForm);
    }
    const N: usize = 4096;
    // grid offset keeps symmetric extrema off the sample nodes
    const SHIFT: f64 = 0.318_309_886;
    let g = |th: f64| cubic_at(&c, th);
    let dg = |th: f64| cubic_dtheta(&c, th);
    let mut extrema: Vec<(f64, bool)> = Vec::new(); // (theta, is_max)
    for k in 0..N {
        let a = TAU * (k as f64 + SHIFT) / N as f64;
        let b = TAU * (k as f64 + 1.0 + SHIFT) / N as f64;
        let (da, db) = (dg(a), dg(b));
        if da > 0.0 && db <= 0.0 {
            extrema.push((bisect(a, b, dg), true));
        } else if da < 0.0 && db >= 0.0 {
            extrema.push((bisect(a, b, dg), false));
        }
    }
    let mut zeros: Vec<f64> = Vec::new();
    for k in 0..N {
        let a = TAU * (k as f64 + SHIFT) / N as f64;
        let b = TAU * (k as f64 + 1.0 + SHIFT) / N as f64;
        if (g(a) > 0.0) != (g(b) > 0.0) {
            zeros.push(bisect(a, b, g));
        }
    }
    if zeros.is_empty() {
        return Err(Error::DegenerateLeadingForm);
    }
    let arc_around = |center: f64| -> (f64, f64) {
        // nearest zero below and above the centre
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for &z in &zeros {
            for shift in [-TAU, 0.0, TAU] {
                let zz = z + shift;
                if zz < center && zz > lo {
                    lo = zz;
                }
                if zz > center && zz < hi {
                    hi = zz;
                }
            }
        }
        (lo, hi)
    };
    let mut descent = Vec::new();
    let mut ascent = Vec::new();
    for &(th, is_max) in &extrema {
        let v = g(th);
        let (lo, hi) = arc_around(th);
        let s = Sector { id: 0, center: th, lo, hi };
        if is_max && v > 0.0 {
            ascent.push(s);
        } else if !is_max && v < 0.0 {
            descent.push(s);
        }
    }
    for list in [&mut descent, &mut ascent] {
        list.sort_by(|a, b| a.center.total_cmp(&b.center));
        for (k, s) in list.iter_mut().enumerate() {
            s.id = k;
        }
    }
    Ok(AsymptoticSectors { descent, ascent })
}

impl AsymptoticSectors {
    /// Sector a trajectory escaping at angle `theta` ends up in: the
    /// attracting direction whose basin (between the neighbouring
    /// attractors of the opposite flow) contains `theta`.
    pub fn classify(&self, direction: Direction, theta: f64) -> usize {
        let (targets, walls) = match direction {
            Direction::Descending => (&self.descent, &self.ascent),
            Direction::Ascending => (&self.ascent, &self.descent),
        };
        if targets.len() <= 1 {
            return 0;
        }
        let t = theta.rem_euclid(TAU);
        // basin of target k runs from the last wall before it to the first wall after it
        for s in targets {
            let before = walls
                .iter()
                .map(|w| (s.center - w.center).rem_euclid(TAU))
                .fold(f64::INFINITY, f64::min);
            let after = walls
                .iter()
                .map(|w| (w.center - s.center).rem_euclid(TAU))
                .fold(f64::INFINITY, f64::min);
            let off = (t - s.center + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0;
            if off >= -before && off < after {
                return s.id;
            }
        }
        // fall back to the nearest centre
        targets
            .iter()
            .min_by(|a, b| {
                let da = ((t - a.center + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0).abs();
                let db = ((t - b.center + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0).abs();
                da.total_cmp(&db)
            })
            .map(|s| s.id)
            .unwrap_or(0)
    }
}

// Dormand–Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Time-independent planar vector field.
pub trait PlanarField {
    fn eval(&self, y: [f64; 2]) -> [f64; 2];
}

pub struct GradientField<'a> {
    pub f: &'a GeneratingFunction,
    pub x: BasePoint,
    pub sign: f64,
}

impl PlanarField for GradientField<'_> {
    #[inline]
    fn eval(&self, y: [f64; 2]) -> [f64; 2] {
        let g = self.f.gradient_at(self.x, y);
        [self.sign * g[0], self.sign * g[1]]
    }
}

#[inline]
fn axpy(y: [f64; 2], h: f64, terms: &[(f64, [f64; 2])]) -> [f64; 2] {
    let mut out = y;
    for (a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

/// One Dormand–Prince step from `(y, k1)`. Returns the 5th-order update,
/// its derivative (FSAL) and the normalized error.
fn dopri_step<F: PlanarField>(field: &F, y: [f64; 2], k1: [f64; 2], h: f64, rtol: f64, atol: f64) -> ([f64; 2], [f64; 2], f64) {
    let k2 = field.eval(axpy(y, h, &[(A21, k1)]));
    let k3 = field.eval(axpy(y, h, &[(A31, k1), (A32, k2)]));
    let k4 = field.eval(axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]));
    let k5 = field.eval(axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
    let k6 = field.eval(axpy(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
    let y5 = axpy(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = field.eval(y5);
    let mut err = 0.0f64;
    for d in 0..2 {
        let e = h * (E1 * k1[d] + E3 * k3[d] + E4 * k4[d] + E5 * k5[d] + E6 * k6[d] + E7 * k7[d]);
        let sc = atol + rtol * y[d].abs().max(y5[d].abs());
        err = err.max((e / sc).abs());
    }
    (y5, k7, err)
}

/// Integrate `field` from `y0` until `stop` returns a terminal, the time
/// budget runs out, or the state stops being finite.
pub fn integrate<F: PlanarField>(
    field: &F,
    y0: [f64; 2],
    cfg: &FlowConfig,
    mut stop: impl FnMut(f64, [f64; 2]) -> Option<Terminal>,
) -> Result<(Vec<[f64; 3]>, Terminal)> {
    let mut y = y0;
    let mut t = 0.0;
    let mut samples = vec![[0.0, y0[0], y0[1]]];
    if let Some(term) = stop(t, y) {
        return Ok((samples, term));
    }
    let mut k1 = field.eval(y);
    let speed = k1[0].hypot(k1[1]);
    let mut h = if speed > 0.0 { (1e-3 * (1.0 + y[0].hypot(y[1])) / speed).min(1.0) } else { 1.0 };
    let mut steps = 0usize;
    while t < cfg.max_time && steps < cfg.max_steps {
        steps += 1;
        let (y5, k7, err) = dopri_step(field, y, k1, h, cfg.rtol, cfg.atol);
        if !(y5[0].is_finite() && y5[1].is_finite()) || !err.is_finite() {
            h *= 0.1;
            if h < 1e-300 {
                return Err(Error::IntegrationFailure(format!("non-finite state near {y:?}")));
            }
            continue;
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            k1 = k7;
            if cfg.keep_samples {
                samples.push([t, y[0], y[1]]);
            }
            if let Some(term) = stop(t, y) {
                if !cfg.keep_samples {
                    samples.push([t, y[0], y[1]]);
                }
                return Ok((samples, term));
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < 1e-14 * (1.0 + t) {
            return Err(Error::IntegrationFailure(format!("step size underflow at t={t}")));
        }
    }
    if !cfg.keep_samples {
        samples.push([t, y[0], y[1]]);
    }
    Ok((samples, Terminal::Undecided))
}

/// Integrate the gradient flow of `f_x` from `y0` in the given direction,
/// classifying where it ends.
pub fn integrate_flow(
    f: &GeneratingFunction,
    fiber: &FiberData,
    sectors: &AsymptoticSectors,
    y0: [f64; 2],
    direction: Direction,
    exclude: Option<usize>,
    cfg: &FlowConfig,
) -> Result<Trajectory> {
    let x = fiber.base;
    let sign = match direction {
        Direction::Descending => -1.0,
        Direction::Ascending => 1.0,
    };
    let sink_index = match direction {
        Direction::Descending => 0,
        Direction::Ascending => 2,
    };
    let radius = escape_radius(fiber, cfg);
    let field = GradientField { f, x, sign };
    let pts = &fiber.points;
    // starting exactly on an equilibrium
    if let Some((k, p)) = pts.iter().enumerate().find(|(_, p)| p.dist(y0) == 0.0) {
        return Ok(Trajectory {
            direction,
            samples: vec![[0.0, y0[0], y0[1]]],
            terminal: Terminal::ConvergedTo { point: k, label: p.label },
            min_saddle_distance: f64::INFINITY,
        });
    }
    let capture: Vec<f64> = pts
        .iter()
        .map(|p| if p.morse_index == sink_index { capture_radius(f, p) } else { 0.0 })
        .collect();
    let mut min_saddle = f64::INFINITY;
    let mut captured: Option<Terminal> = None;
    let stop = |_t: f64, y: [f64; 2]| -> Option<Terminal> {
        for (k, p) in pts.iter().enumerate() {
            let d = p.dist(y);
            if Some(k) != exclude && p.is_saddle() {
                min_saddle = min_saddle.min(d);
            }
            if p.morse_index == sink_index {
                let term = Terminal::ConvergedTo { point: k, label: p.label };
                if d <= cfg.converge_tol {
                    return Some(term);
                }
                if d <= capture[k] {
                    // inside a ball where f_x is strictly convex or concave the
                    // flow can only approach the point
                    if !cfg.keep_samples {
                        return Some(term);
                    }
                    captured = Some(term);
                }
            }
        }
        if y[0].hypot(y[1]) > radius {
            let th = y[1].atan2(y[0]);
            return Some(Terminal::Escaped {
                sector: sectors.classify(direction, th),
            });
        }
        None
    };
    let (samples, mut terminal) = integrate(&field, y0, cfg, stop)?;
    if terminal == Terminal::Undecided {
        if let Some(t) = captured {
            terminal = t;
        }
    }
    Ok(Trajectory {
        direction,
        samples,
        terminal,
        min_saddle_distance: min_saddle,
    })
}

/// Radius of a ball around `p` on which the Hessian keeps the sign
/// pattern of `p` (half the smallest eigenvalue margin).
pub fn capture_radius(f: &GeneratingFunction, p: &CriticalPoint) -> f64 {
    let lam = 0.5 * p.hess_eigs[0].abs().min(p.hess_eigs[1].abs());
    // bound(r) = a r + b r^2 / 2 is increasing; bisect bound(r) = lam
    let (mut lo, mut hi) = (0.0, 1.0);
    while f.hessian_variation_bound(p.y, hi) < lam && hi < 1e6 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let m = 0.5 * (lo + hi);
        if f.hessian_variation_bound(p.y, m) < lam {
            lo = m;
        } else {
            hi = m;
        }
    }
    lo
}

/// `integrate_flow` in the descending direction.
pub fn integrate_descending(
    f: &GeneratingFunction,
    fiber: &FiberData,
    y0: [f64; 2],
    cfg: &FlowConfig,
) -> Result<Trajectory> {
    let sectors = asymptotic_sectors(f)?;
    integrate_flow(f, fiber, &sectors, y0, Direction::Descending, None, cfg)
}

pub fn escape_radius(fiber: &FiberData, cfg: &FlowConfig) -> f64 {
    let ymax = fiber.points.iter().map(|p| p.y[0].hypot(p.y[1])).fold(0.0f64, f64::max);
    cfg.escape_radius.max(10.0 * ymax)
}

/// Stable branches (traced backward) and unstable branches (traced
/// forward) of one saddle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Separatrices {
    pub saddle: usize,
    pub stable: [Trajectory; 2],
    pub unstable: [Trajectory; 2],
}

/// Length scale used for seeding branches off a saddle.
fn seed_scale(fiber: &FiberData, p: &CriticalPoint) -> f64 {
    let sep = if fiber.points.len() > 1 { fiber.separation() } else { 1.0 };
    let lam = p.hess_eigs[0].abs().min(p.hess_eigs[1].abs());
    sep.min(0.5 * lam).min(1.0)
}

pub fn saddle_separatrices(
    f: &GeneratingFunction,
    fiber: &FiberData,
    sectors: &AsymptoticSectors,
    saddle: usize,
    cfg: &FlowConfig,
) -> Result<Separatrices> {
    let p = fiber.points[saddle];
    if p.morse_index != 1 {
        return Err(Error::Config(format!("point {saddle} is not a saddle")));
    }
    let h = f.hessian(p.y);
    let [lneg, lpos] = p.hess_eigs;
    // descending flow: unstable along the negative-curvature direction
    let vu = sym_eigvec(h, lneg);
    let vs = sym_eigvec(h, lpos);
    let delta = cfg.seed_offset * seed_scale(fiber, &p);
    let seed = |v: [f64; 2], s: f64| [p.y[0] + s * delta * v[0], p.y[1] + s * delta * v[1]];
    let run = |v: [f64; 2], s: f64, dir: Direction| integrate_flow(f, fiber, sectors, seed(v, s), dir, Some(saddle), cfg);
    Ok(Separatrices {
        saddle,
        stable: [run(vs, 1.0, Direction::Ascending)?, run(vs, -1.0, Direction::Ascending)?],
        unstable: [run(vu, 1.0, Direction::Descending)?, run(vu, -1.0, Direction::Descending)?],
    })
}

/// 0/1 column indexed by saddle label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IncidenceMatrix {
    pub entries: [u8; 3],
    /// Number of stable branches of each saddle reaching `n`.
    #[serde(default)]
    pub multiplicity: [u8; 3],
}

impl IncidenceMatrix {
    pub fn new(entries: [u8; 3]) -> Self {
        IncidenceMatrix { entries, multiplicity: entries }
    }

    pub fn as_i64(&self) -> [i64; 3] {
        [self.entries[0] as i64, self.entries[1] as i64, self.entries[2] as i64]
    }
}

/// Incidence column at `x`. The fiber must carry continuation labels
/// `s1, s2, s3, n`.
pub fn incidence_matrix(
    f: &GeneratingFunction,
    fiber: &FiberData,
    sectors: &AsymptoticSectors,
    cfg: &FlowConfig,
) -> Result<IncidenceMatrix> {
    let x = fiber.base;
    let Some(n) = fiber.points.iter().position(|p| p.morse_index == 2) else {
        return Err(Error::NotInsideCaustic { x });
    };
    let mut entries = [0u8; 3];
    let mut mult = [0u8; 3];
    let mut seen = [false; 3];
    let cfg = FlowConfig { keep_samples: false, ..*cfg };
    for (k, p) in fiber.points.iter().enumerate() {
        let Some(slot) = p.label.saddle_index() else { continue };
        seen[slot] = true;
        let sep = saddle_separatrices_stable(f, fiber, sectors, k, &cfg)?;
        for tr in &sep {
            match tr.terminal {
                Terminal::ConvergedTo { point, .. } if point == n => mult[slot] += 1,
                Terminal::Undecided => {
                    return Err(Error::NearWall {
                        x,
                        reason: format!("stable branch of {} undecided", p.label),
                    })
                }
                Terminal::ConvergedTo { .. } => {
                    return Err(Error::NearWall {
                        x,
                        reason: format!("stable branch of {} ends on a saddle", p.label),
                    })
                }
                Terminal::Escaped { .. } => {}
            }
        }
        entries[slot] = u8::from(mult[slot] > 0);
    }
    if !seen.iter().all(|&s| s) {
        return Err(Error::LabelMismatch(format!("fiber at {x:?} lacks labeled saddles")));
    }
    Ok(IncidenceMatrix { entries, multiplicity: mult })
}

/// Only the two stable branches (cheaper than the full set).
pub fn saddle_separatrices_stable(
    f: &GeneratingFunction,
    fiber: &FiberData,
    sectors: &AsymptoticSectors,
    saddle: usize,
    cfg: &FlowConfig,
) -> Result<[Trajectory; 2]> {
    let p = fiber.points[saddle];
    let h = f.hessian(p.y);
    let vs = sym_eigvec(h, p.hess_eigs[1]);
    let delta = cfg.seed_offset * seed_scale(fiber, &p);
    let run = |s: f64| {
        let y0 = [p.y[0] + s * delta * vs[0], p.y[1] + s * delta * vs[1]];
        integrate_flow(f, fiber, sectors, y0, Direction::Ascending, Some(saddle), cfg)
    };
    Ok([run(1.0)?, run(-1.0)?])
}

/// Label-free description of the phase portrait: for each saddle, the
/// sorted terminals of its stable and unstable branches, with convergence
/// recorded by Morse index rather than by point. Constant on each
/// connected component of the complement of caustic and walls.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub count: usize,
    pub saddles: Vec<([BranchEnd; 2], [BranchEnd; 2])>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BranchEnd {
    Node,
    Saddle,
    Escaped(usize),
    Undecided,
}

impl Signature {
    pub fn is_clean(&self) -> bool {
        self.saddles
            .iter()
            .all(|(s, u)| s.iter().chain(u.iter()).all(|e| matches!(e, BranchEnd::Node | BranchEnd::Escaped(_))))
    }
}

fn branch_end(t: &Terminal, fiber: &FiberData) -> BranchEnd {
    match t {
        Terminal::ConvergedTo { point, .. } => {
            if fiber.points[*point].is_saddle() {
                BranchEnd::Saddle
            } else {
                BranchEnd::Node
            }
        }
        Terminal::Escaped { sector } => BranchEnd::Escaped(*sector),
        Terminal::Undecided => BranchEnd::Undecided,
    }
}

/// Per-saddle branch data with point indices, plus the label-free signature.
#[derive(Debug, Clone)]
pub struct PhasePortrait {
    pub fiber: FiberData,
    pub separatrices: Vec<Separatrices>,
    pub signature: Signature,
}

pub fn phase_portrait(
    f: &GeneratingFunction,
    fiber: &FiberData,
    sectors: &AsymptoticSectors,
    cfg: &FlowConfig,
) -> Result<PhasePortrait> {
    let mut seps = Vec::new();
    let mut sig = Vec::new();
    for (k, p) in fiber.points.iter().enumerate() {
        if !p.is_saddle() {
            continue;
        }
        let s = saddle_separatrices(f, fiber, sectors, k, cfg)?;
        let mut st = [branch_end(&s.stable[0].terminal, fiber), branch_end(&s.stable[1].terminal, fiber)];
        let mut un = [branch_end(&s.unstable[0].terminal, fiber), branch_end(&s.unstable[1].terminal, fiber)];
        st.sort();
        un.sort();
        sig.push((st, un));
        seps.push(s);
    }
    sig.sort();
    Ok(PhasePortrait {
        fiber: fiber.clone(),
        separatrices: seps,
        signature: Signature {
            count: fiber.points.len(),
            saddles: sig,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{critical_points, elliptic_umbilic, perturb, symmetric_umbilic, Perturbation, SolverConfig};

    #[test]
    fn symmetric_sectors_are_rotation_invariant() {
        let s = asymptotic_sectors(&symmetric_umbilic()).unwrap();
        assert_eq!(s.descent.len(), 3);
        assert_eq!(s.ascent.len(), 3);
        // cos(3 th)/3: minima at pi/3, pi, 5pi/3
        let want = [TAU / 6.0, TAU / 2.0, 5.0 * TAU / 6.0];
        for (sec, w) in s.descent.iter().zip(want) {
            assert!((sec.center - w).abs() < 1e-9, "{sec:?}");
            assert!((sec.hi - sec.lo - TAU / 6.0).abs() < 1e-9);
        }
        for w in s.descent.windows(2) {
            assert!((w[1].center - w[0].center - TAU / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn umbilic_sectors_disjoint_with_margin() {
        let s = asymptotic_sectors(&elliptic_umbilic()).unwrap();
        assert_eq!(s.descent.len(), 3);
        for a in &s.descent {
            for b in &s.ascent {
                // disjoint open arcs
                assert!(!a.contains(b.center) && !b.contains(a.center));
            }
            assert!(a.hi - a.lo > 0.1);
        }
    }

    #[test]
    fn flat_cubic_is_rejected() {
        let g = crate::family::GeneratingFunction::from_monomials(&[crate::family::Monomial { i: 2, j: 0, c: 1.0 }]).unwrap();
        assert_eq!(asymptotic_sectors(&g).unwrap_err(), Error::DegenerateLeadingForm);
    }

    #[test]
    fn equilibrium_start_is_zero_length() {
        let f = elliptic_umbilic();
        let fib = critical_points(&f, BasePoint::new(1.0, 0.0), &SolverConfig::default()).unwrap();
        let y0 = fib.points[0].y;
        let tr = integrate_descending(&f, &fib, y0, &FlowConfig::default()).unwrap();
        assert_eq!(tr.samples.len(), 1);
        assert!(matches!(tr.terminal, Terminal::ConvergedTo { point: 0, .. }));
    }

    #[test]
    fn far_start_escapes() {
        let f = elliptic_umbilic();
        let fib = critical_points(&f, BasePoint::new(1.0, 0.0), &SolverConfig::default()).unwrap();
        let tr = integrate_descending(&f, &fib, [5.0, 5.0], &FlowConfig::default()).unwrap();
        assert!(matches!(tr.terminal, Terminal::Escaped { .. }));
        // f_x never increases along the descending flow
        let vals: Vec<f64> = tr.samples.iter().map(|s| f.value_at(fib.base, [s[1], s[2]])).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn perturbed_incidence_at_origin_runs() {
        let g = perturb(&symmetric_umbilic(), &Perturbation::radial(0.1)).unwrap();
        let fib = critical_points(&g, BasePoint::ORIGIN, &SolverConfig::default()).unwrap();
        let sec = asymptotic_sectors(&g).unwrap();
        let inc = incidence_matrix(&g, &fib, &sec, &FlowConfig::default()).unwrap();
        // D3-symmetric at the centre: every saddle is reached from n
        assert_eq!(inc.entries, [1, 1, 1]);
    }
}
