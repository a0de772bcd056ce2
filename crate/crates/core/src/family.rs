//! Generating functions, the parametric family `f_x(y) = f(y) - x.y`, and
//! the critical points of its members.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{complex_roots, resultant_u, Bivar, Poly1};

pub const MAX_DEGREE: usize = 4;

/// Generic rotation used before eliminating a variable, so that no two
/// solutions share a projection and no leading coefficient vanishes.
const ELIMINATION_ANGLE: f64 = 0.463_647_609;

/// One `c * y1^i * y2^j` term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub i: usize,
    pub j: usize,
    pub c: f64,
}

#[derive(Serialize, Deserialize)]
struct MonomialList {
    monomials: Vec<Monomial>,
}

/// A real polynomial `f(y1, y2)` of total degree at most 4.
#[derive(Clone, PartialEq)]
pub struct GeneratingFunction {
    poly: Bivar,
    grad: [Bivar; 2],
    hess: [Bivar; 3],
    /// `f111, f112, f122, f222`
    third: [Bivar; 4],
    /// Frobenius norm of the (constant) fourth derivative tensor.
    fourth_norm: f64,
    /// Gradient of `f(R u)` in the rotated coordinates `u`.
    grad_rot: [Bivar; 2],
}

impl fmt::Debug for GeneratingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.monomials()).finish()
    }
}

impl GeneratingFunction {
    pub fn from_monomials(terms: &[Monomial]) -> Result<Self> {
        let mut poly = Bivar::zero(MAX_DEGREE);
        for t in terms {
            if t.i + t.j > MAX_DEGREE {
                return Err(Error::DegreeTooHigh { i: t.i, j: t.j });
            }
            if !t.c.is_finite() {
                return Err(Error::Config(format!("non-finite coefficient for y1^{} y2^{}", t.i, t.j)));
            }
            poly.add_term(t.i, t.j, t.c);
        }
        Ok(Self::from_bivar(poly))
    }

    fn from_bivar(poly: Bivar) -> Self {
        let g1 = poly.du();
        let g2 = poly.dv();
        let hess = [g1.du(), g1.dv(), g2.dv()];
        let third = [hess[0].du(), hess[0].dv(), hess[2].du(), hess[2].dv()];
        let q = [third[0].du(), third[0].dv(), third[1].dv(), third[2].dv(), third[3].dv()];
        let w = [1.0, 4.0, 6.0, 4.0, 1.0];
        let fourth_norm = q.iter().zip(w).map(|(b, w)| w * b.eval(0.0, 0.0).powi(2)).sum::<f64>().sqrt();
        let (c, s) = (ELIMINATION_ANGLE.cos(), ELIMINATION_ANGLE.sin());
        // y = R u with R = [[c, -s], [s, c]]
        let rotated = poly.linear_substitute(c, -s, s, c);
        let grad_rot = [rotated.du(), rotated.dv()];
        GeneratingFunction {
            poly,
            grad: [g1, g2],
            hess,
            third,
            fourth_norm,
            grad_rot,
        }
    }

    /// Nonzero terms in `(i, j)` order.
    pub fn monomials(&self) -> Vec<Monomial> {
        let mut out = Vec::new();
        for i in 0..=MAX_DEGREE {
            for j in 0..=MAX_DEGREE - i {
                let c = self.poly.get(i, j);
                if c != 0.0 {
                    out.push(Monomial { i, j, c });
                }
            }
        }
        out
    }

    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.poly.get(i, j)
    }

    pub fn degree(&self) -> usize {
        self.monomials().iter().map(|m| m.i + m.j).max().unwrap_or(0)
    }

    pub fn value(&self, y: [f64; 2]) -> f64 {
        self.poly.eval(y[0], y[1])
    }

    #[inline]
    pub fn gradient(&self, y: [f64; 2]) -> [f64; 2] {
        [self.grad[0].eval(y[0], y[1]), self.grad[1].eval(y[0], y[1])]
    }

    /// `[[f11, f12], [f12, f22]]`
    pub fn hessian(&self, y: [f64; 2]) -> [[f64; 2]; 2] {
        let a = self.hess[0].eval(y[0], y[1]);
        let b = self.hess[1].eval(y[0], y[1]);
        let d = self.hess[2].eval(y[0], y[1]);
        [[a, b], [b, d]]
    }

    pub fn hessian_det(&self, y: [f64; 2]) -> f64 {
        let h = self.hessian(y);
        h[0][0] * h[1][1] - h[0][1] * h[1][0]
    }

    /// `[f111, f112, f122, f222]` at `y`.
    pub fn third_derivatives(&self, y: [f64; 2]) -> [f64; 4] {
        let t = |k: usize| self.third[k].eval(y[0], y[1]);
        [t(0), t(1), t(2), t(3)]
    }

    pub fn hessian_det_gradient(&self, y: [f64; 2]) -> [f64; 2] {
        let h = self.hessian(y);
        let [t111, t112, t122, t222] = self.third_derivatives(y);
        let (a, b, d) = (h[0][0], h[0][1], h[1][1]);
        [t111 * d + a * t122 - 2.0 * b * t112, t112 * d + a * t222 - 2.0 * b * t122]
    }

    /// Upper bound on `|Hess(z) - Hess(y)|` over the ball `|z - y| <= r`.
    pub fn hessian_variation_bound(&self, y: [f64; 2], r: f64) -> f64 {
        let t: Vec<f64> = self.third.iter().map(|b| b.eval(y[0], y[1])).collect();
        let n3 = (t[0] * t[0] + 3.0 * t[1] * t[1] + 3.0 * t[2] * t[2] + t[3] * t[3]).sqrt();
        n3 * r + 0.5 * self.fourth_norm * r * r
    }

    /// `f_x(y) = f(y) - x.y`
    pub fn value_at(&self, x: BasePoint, y: [f64; 2]) -> f64 {
        self.value(y) - x.x1 * y[0] - x.x2 * y[1]
    }

    #[inline]
    pub fn gradient_at(&self, x: BasePoint, y: [f64; 2]) -> [f64; 2] {
        let g = self.gradient(y);
        [g[0] - x.x1, g[1] - x.x2]
    }

    /// Coefficients `(c30, c21, c12, c03)` of the cubic part.
    pub fn cubic_form(&self) -> [f64; 4] {
        [
            self.poly.get(3, 0),
            self.poly.get(2, 1),
            self.poly.get(1, 2),
            self.poly.get(0, 3),
        ]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&MonomialList {
            monomials: self.monomials(),
        })
        .expect("monomial list serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let list: MonomialList =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("generating function JSON: {e}")))?;
        Self::from_monomials(&list.monomials)
    }
}

impl Serialize for GeneratingFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MonomialList {
            monomials: self.monomials(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeneratingFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let list = MonomialList::deserialize(d)?;
        GeneratingFunction::from_monomials(&list.monomials).map_err(serde::de::Error::custom)
    }
}

/// `f(y) = y1^3/3 - 2 y1 y2^2`, the umbilic generating function as written
/// in its coefficient form.
pub fn elliptic_umbilic() -> GeneratingFunction {
    GeneratingFunction::from_monomials(&[
        Monomial { i: 3, j: 0, c: 1.0 / 3.0 },
        Monomial { i: 1, j: 2, c: -2.0 },
    ])
    .expect("fixed monomials")
}

/// `f(y) = y1^3/3 - y1 y2^2 = Re(w^3)/3` with `w = y1 + i y2`. Its Lagrangian
/// map is `x1 + i x2 = conj(w)^2`, and its bifurcation set consists of the
/// rays at angles 0, 2pi/3, 4pi/3.
pub fn symmetric_umbilic() -> GeneratingFunction {
    GeneratingFunction::from_monomials(&[
        Monomial { i: 3, j: 0, c: 1.0 / 3.0 },
        Monomial { i: 1, j: 2, c: -1.0 },
    ])
    .expect("fixed monomials")
}

/// Small polynomial deformation of a generating function.
///
/// `eps` enters as `-eps (y1^2 + y2^2)`, so that for `eps > 0` the extra
/// critical point inside the caustic is a maximum (Morse index 2).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub eps: f64,
    #[serde(default)]
    pub extra: Vec<Monomial>,
}

impl Perturbation {
    pub fn radial(eps: f64) -> Self {
        Perturbation { eps, extra: Vec::new() }
    }

    pub fn with_extra(mut self, i: usize, j: usize, c: f64) -> Self {
        self.extra.push(Monomial { i, j, c });
        self
    }

    pub fn norm(&self) -> f64 {
        (self.eps * self.eps + self.extra.iter().map(|m| m.c * m.c).sum::<f64>()).sqrt()
    }
}

pub fn perturb(f: &GeneratingFunction, p: &Perturbation) -> Result<GeneratingFunction> {
    if let Some(m) = p.extra.iter().find(|m| m.i + m.j > MAX_DEGREE) {
        return Err(Error::DegreeTooHigh { i: m.i, j: m.j });
    }
    let norm = p.norm();
    if norm > 1.0 {
        return Err(Error::PerturbationTooLarge { norm });
    }
    let mut terms = f.monomials();
    terms.push(Monomial { i: 2, j: 0, c: -p.eps });
    terms.push(Monomial { i: 0, j: 2, c: -p.eps });
    terms.extend(p.extra.iter().copied());
    GeneratingFunction::from_monomials(&terms)
}

/// A point `x = (x1, x2)` of the base plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BasePoint {
    pub x1: f64,
    pub x2: f64,
}

impl BasePoint {
    pub const ORIGIN: BasePoint = BasePoint { x1: 0.0, x2: 0.0 };

    pub fn new(x1: f64, x2: f64) -> Self {
        BasePoint { x1, x2 }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        BasePoint::new(r * theta.cos(), r * theta.sin())
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn dist(&self, o: BasePoint) -> f64 {
        (self.x1 - o.x1).hypot(self.x2 - o.x2)
    }

    pub fn lerp(&self, o: BasePoint, t: f64) -> BasePoint {
        BasePoint::new(self.x1 + t * (o.x1 - self.x1), self.x2 + t * (o.x2 - self.x2))
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.x1, self.x2]
    }
}

impl From<[f64; 2]> for BasePoint {
    fn from(a: [f64; 2]) -> Self {
        BasePoint::new(a[0], a[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    S1,
    S2,
    S3,
    N,
    Unlabeled,
}

impl Label {
    pub fn saddle(k: usize) -> Label {
        match k {
            0 => Label::S1,
            1 => Label::S2,
            2 => Label::S3,
            _ => panic!("saddle index {k} out of range"),
        }
    }

    /// Zero-based saddle slot.
    pub fn saddle_index(self) -> Option<usize> {
        match self {
            Label::S1 => Some(0),
            Label::S2 => Some(1),
            Label::S3 => Some(2),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Label::S1 => "s1",
            Label::S2 => "s2",
            Label::S3 => "s3",
            Label::N => "n",
            Label::Unlabeled => "?",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub y: [f64; 2],
    pub morse_index: u8,
    pub value: f64,
    pub hess_eigs: [f64; 2],
    pub label: Label,
}

impl CriticalPoint {
    pub fn is_saddle(&self) -> bool {
        self.morse_index == 1
    }

    pub fn det(&self) -> f64 {
        self.hess_eigs[0] * self.hess_eigs[1]
    }

    pub fn dist(&self, y: [f64; 2]) -> f64 {
        (self.y[0] - y[0]).hypot(self.y[1] - y[1])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberData {
    pub base: BasePoint,
    pub points: Vec<CriticalPoint>,
    pub inside_caustic: bool,
}

impl FiberData {
    pub fn node(&self) -> Option<&CriticalPoint> {
        self.points.iter().find(|p| p.morse_index == 2)
    }

    pub fn saddles(&self) -> impl Iterator<Item = &CriticalPoint> {
        self.points.iter().filter(|p| p.is_saddle())
    }

    pub fn by_label(&self, l: Label) -> Option<&CriticalPoint> {
        self.points.iter().find(|p| p.label == l)
    }

    pub fn min_abs_det(&self) -> f64 {
        self.points.iter().map(|p| p.det().abs()).fold(f64::INFINITY, f64::min)
    }

    /// Minimum pairwise distance between critical points.
    pub fn separation(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (a, p) in self.points.iter().enumerate() {
            for q in &self.points[a + 1..] {
                d = d.min(p.dist(q.y));
            }
        }
        d
    }
}

/// Tolerances for the critical-point solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Residual target of the final Newton polish.
    pub newton_tol: f64,
    /// Fibers with `min |det Hess|` below this are refused.
    pub degenerate_det: f64,
    /// Relative imaginary part below which a root counts as real.
    pub real_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            newton_tol: 1e-12,
            degenerate_det: 1e-8,
            real_tol: 1e-7,
        }
    }
}

/// `x = grad f(y)`
pub fn lagrangian_map(f: &GeneratingFunction, y: [f64; 2]) -> BasePoint {
    BasePoint::from(f.gradient(y))
}

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
pub fn sym_eigs(h: [[f64; 2]; 2]) -> [f64; 2] {
    let m = 0.5 * (h[0][0] + h[1][1]);
    let d = (0.5 * (h[0][0] - h[1][1])).hypot(h[0][1]);
    [m - d, m + d]
}

/// Unit eigenvector of a symmetric 2x2 matrix for eigenvalue `lambda`.
pub fn sym_eigvec(h: [[f64; 2]; 2], lambda: f64) -> [f64; 2] {
    let a = [h[0][1], lambda - h[0][0]];
    let b = [lambda - h[1][1], h[1][0]];
    let v = if a[0].hypot(a[1]) >= b[0].hypot(b[1]) { a } else { b };
    let n = v[0].hypot(v[1]);
    if n == 0.0 {
        // multiple of the identity: any direction works
        return [1.0, 0.0];
    }
    [v[0] / n, v[1] / n]
}

pub(crate) fn classify(f: &GeneratingFunction, x: BasePoint, y: [f64; 2]) -> CriticalPoint {
    let eigs = sym_eigs(f.hessian(y));
    let morse_index = eigs.iter().filter(|&&e| e < 0.0).count() as u8;
    CriticalPoint {
        y,
        morse_index,
        value: f.value_at(x, y),
        hess_eigs: eigs,
        label: Label::Unlabeled,
    }
}

/// Real Newton iteration on `grad f(y) = x`.
pub fn newton_polish(f: &GeneratingFunction, x: BasePoint, mut y: [f64; 2], tol: f64) -> Option<[f64; 2]> {
    for _ in 0..60 {
        let g = f.gradient_at(x, y);
        let scale = 1.0 + y[0] * y[0] + y[1] * y[1];
        if g[0].hypot(g[1]) <= tol * scale {
            return Some(y);
        }
        let h = f.hessian(y);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dy0 = (h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let dy1 = (-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        y = [y[0] - dy0, y[1] - dy1];
        if !(y[0].is_finite() && y[1].is_finite()) {
            return None;
        }
    }
    let g = f.gradient_at(x, y);
    let scale = 1.0 + y[0] * y[0] + y[1] * y[1];
    (g[0].hypot(g[1]) <= 100.0 * tol * scale).then_some(y)
}

/// All complex solutions of `grad f(y) = x`, in the original coordinates.
pub fn complex_critical_points(f: &GeneratingFunction, x: BasePoint) -> Vec<[Complex64; 2]> {
    let (c, s) = (ELIMINATION_ANGLE.cos(), ELIMINATION_ANGLE.sin());
    // R^T x
    let xr = [c * x.x1 + s * x.x2, -s * x.x1 + c * x.x2];
    let mut g: [Vec<Poly1>; 2] = [f.grad_rot[0].as_poly_in_u(), f.grad_rot[1].as_poly_in_u()];
    for k in 0..2 {
        g[k][0].coef[0] -= xr[k];
        while g[k].len() > 1 && g[k].last().unwrap().is_zero() {
            g[k].pop();
        }
    }
    let res = resultant_u(&g[0], &g[1]).trimmed(1e-12);
    if res.degree() == 0 {
        return Vec::new();
    }
    let g1 = &f.grad_rot[0];
    let g2 = &f.grad_rot[1];
    let mut out: Vec<[Complex64; 2]> = Vec::new();
    for v in res.roots() {
        // candidate u from the first equation at this v
        let coef: Vec<Complex64> = g[0].iter().map(|p| p.eval_c(v)).collect();
        let mut best: Option<(f64, Complex64)> = None;
        for u in complex_roots(&coef) {
            let r = (g2.eval_c(u, v) - xr[1]).norm();
            if best.map_or(true, |(b, _)| r < b) {
                best = Some((r, u));
            }
        }
        let Some((_, mut u)) = best else { continue };
        let mut v = v;
        // complex Newton on the rotated system
        let hu = g1.du();
        let hv = g1.dv();
        let kv = g2.dv();
        for _ in 0..40 {
            let r1 = g1.eval_c(u, v) - xr[0];
            let r2 = g2.eval_c(u, v) - xr[1];
            let a = hu.eval_c(u, v);
            let b = hv.eval_c(u, v);
            let d = kv.eval_c(u, v);
            let det = a * d - b * b;
            if det.norm() == 0.0 {
                break;
            }
            let du = (d * r1 - b * r2) / det;
            let dv = (a * r2 - b * r1) / det;
            if !(du.is_finite() && dv.is_finite()) {
                break;
            }
            u -= du;
            v -= dv;
            if du.norm() + dv.norm() < 1e-15 * (1.0 + u.norm() + v.norm()) {
                break;
            }
        }
        out.push([c * u - s * v, s * u + c * v]);
    }
    out
}

/// All real critical points of `f_x`, classified. Saddles are left
/// unlabeled except inside the caustic, where they receive the reference
/// labeling (increasing angle about the index-2 point).
pub fn critical_points(f: &GeneratingFunction, x: BasePoint, cfg: &SolverConfig) -> Result<FiberData> {
    if !x.is_finite() {
        return Err(Error::Config(format!("non-finite base point {x:?}")));
    }
    let roots = complex_critical_points(f, x);
    let total = roots.len();
    let mut real: Vec<[f64; 2]> = Vec::new();
    for r in &roots {
        let scale = 1.0 + r[0].norm() + r[1].norm();
        if r[0].im.abs() + r[1].im.abs() <= cfg.real_tol * scale {
            let Some(y) = newton_polish(f, x, [r[0].re, r[1].re], cfg.newton_tol) else {
                return Err(Error::SolverDivergence {
                    x,
                    reason: "Newton polish failed on a real root".into(),
                });
            };
            if !real.iter().any(|q| (q[0] - y[0]).hypot(q[1] - y[1]) < 1e-9 * scale) {
                real.push(y);
            }
        }
    }
    let mut points: Vec<CriticalPoint> = real.iter().map(|&y| classify(f, x, y)).collect();
    let min_det = points.iter().map(|p| p.det().abs()).fold(f64::INFINITY, f64::min);
    // merged roots show up as a degenerate point, so test before parity
    if min_det < cfg.degenerate_det {
        return Err(Error::DegenerateFiber { x, min_det });
    }
    if (total - real.len()) % 2 != 0 {
        return Err(Error::SolverDivergence {
            x,
            reason: format!("{} real of {} complex solutions", real.len(), total),
        });
    }
    let inside = points.len() == 4;
    if inside {
        reference_labels(&mut points);
    }
    Ok(FiberData {
        base: x,
        points,
        inside_caustic: inside,
    })
}

/// Label the index-2 point `n` and the saddles by increasing angle of
/// `y - y_n` in `[0, 2pi)`.
pub fn reference_labels(points: &mut [CriticalPoint]) {
    let Some(n) = points.iter().position(|p| p.morse_index == 2) else {
        return;
    };
    points[n].label = Label::N;
    let yn = points[n].y;
    let mut saddles: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_saddle())
        .map(|(k, p)| {
            let a = (p.y[1] - yn[1]).atan2(p.y[0] - yn[0]);
            (a.rem_euclid(std::f64::consts::TAU), k)
        })
        .collect();
    if saddles.len() != 3 {
        return;
    }
    saddles.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (slot, (_, k)) in saddles.into_iter().enumerate() {
        points[k].label = Label::saddle(slot);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn umbilic_values() {
        let f = elliptic_umbilic();
        assert!(close(f.value([1.0, 0.0]), 1.0 / 3.0, 1e-15));
        assert_eq!(f.value([0.0, 0.0]), 0.0);
        assert_eq!(f.gradient([1.0, 1.0]), [-1.0, -4.0]);
    }

    #[test]
    fn lagrangian_map_examples() {
        let f = elliptic_umbilic();
        assert_eq!(lagrangian_map(&f, [1.0, 0.0]), BasePoint::new(1.0, 0.0));
        assert_eq!(lagrangian_map(&f, [0.0, 0.0]), BasePoint::new(0.0, 0.0));
        assert_eq!(lagrangian_map(&f, [0.0, 1.0]), BasePoint::new(-2.0, 0.0));
        let y = [0.3, -0.8];
        let x = lagrangian_map(&f, y);
        assert!(close(x.x1, 0.09 - 2.0 * 0.64, 1e-15));
        assert!(close(x.x2, -4.0 * 0.3 * -0.8, 1e-15));
    }

    #[test]
    fn symmetric_umbilic_map_is_conj_square() {
        let f = symmetric_umbilic();
        let w = Complex64::new(0.7, -0.4);
        let x = lagrangian_map(&f, [w.re, w.im]);
        let z = w.conj() * w.conj();
        assert!(close(x.x1, z.re, 1e-14) && close(x.x2, z.im, 1e-14));
    }

    #[test]
    fn two_saddles_at_unit_x() {
        let f = elliptic_umbilic();
        let fib = critical_points(&f, BasePoint::new(1.0, 0.0), &SolverConfig::default()).unwrap();
        assert!(!fib.inside_caustic);
        assert_eq!(fib.points.len(), 2);
        let mut pts = fib.points.clone();
        pts.sort_by(|a, b| a.y[0].total_cmp(&b.y[0]));
        assert!(close(pts[0].y[0], -1.0, 1e-12) && close(pts[0].y[1], 0.0, 1e-12));
        assert!(close(pts[1].y[0], 1.0, 1e-12) && close(pts[1].y[1], 0.0, 1e-12));
        // Hessians diag(-2, 4) and diag(2, -4)
        let h0 = f.hessian(pts[0].y);
        let h1 = f.hessian(pts[1].y);
        assert!(close(h0[0][0], -2.0, 1e-11) && close(h0[1][1], 4.0, 1e-11) && h0[0][1].abs() < 1e-11);
        assert!(close(h1[0][0], 2.0, 1e-11) && close(h1[1][1], -4.0, 1e-11) && h1[0][1].abs() < 1e-11);
        assert!(pts.iter().all(|p| p.morse_index == 1));
    }

    #[test]
    fn origin_of_unperturbed_is_refused() {
        let f = elliptic_umbilic();
        let err = critical_points(&f, BasePoint::ORIGIN, &SolverConfig::default()).unwrap_err();
        assert!(
            matches!(err, Error::DegenerateFiber { .. } | Error::SolverDivergence { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn perturbation_identity_and_errors() {
        let f = elliptic_umbilic();
        assert_eq!(perturb(&f, &Perturbation::radial(0.0)).unwrap().monomials(), f.monomials());
        let bad = Perturbation::radial(0.1).with_extra(4, 1, 0.01);
        assert_eq!(perturb(&f, &bad).unwrap_err(), Error::DegreeTooHigh { i: 4, j: 1 });
        assert!(matches!(
            perturb(&f, &Perturbation::radial(2.0)),
            Err(Error::PerturbationTooLarge { .. })
        ));
    }

    #[test]
    fn perturbed_origin_has_four_points() {
        // closed form: y = 0 (max), (2 eps, 0), (-eps/2, +-sqrt(5/8) eps)
        let eps = 0.1;
        let g = perturb(&elliptic_umbilic(), &Perturbation::radial(eps)).unwrap();
        let fib = critical_points(&g, BasePoint::ORIGIN, &SolverConfig::default()).unwrap();
        assert!(fib.inside_caustic);
        assert_eq!(fib.points.len(), 4);
        let n = fib.node().unwrap();
        assert!(n.y[0].abs() < 1e-12 && n.y[1].abs() < 1e-12);
        assert_eq!(n.label, Label::N);
        assert_eq!(fib.saddles().count(), 3);
        let want = [[2.0 * eps, 0.0], [-eps / 2.0, (5.0f64 / 8.0).sqrt() * eps], [-eps / 2.0, -(5.0f64 / 8.0).sqrt() * eps]];
        for w in want {
            assert!(fib.saddles().any(|p| p.dist(w) < 1e-12), "missing {w:?}");
        }
        // reference labels go by angle about n
        assert!(fib.by_label(Label::S1).unwrap().dist(want[0]) < 1e-12);
        assert!(fib.by_label(Label::S2).unwrap().dist(want[1]) < 1e-12);
        assert!(fib.by_label(Label::S3).unwrap().dist(want[2]) < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let f = perturb(&symmetric_umbilic(), &Perturbation::radial(0.1).with_extra(2, 1, 0.01)).unwrap();
        let s = f.to_json();
        assert!(s.contains("\"monomials\""));
        let g = GeneratingFunction::from_json(&s).unwrap();
        assert_eq!(f.monomials(), g.monomials());
    }
}
