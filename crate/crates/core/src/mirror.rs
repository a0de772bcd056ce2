//! Local analytic data of the mirror bundle: sheet positions, the
//! connection form, Legendre potentials and holomorphic frame weights.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continuation::{continue_labels, order_sheets, TrackConfig};
use crate::error::{Error, Result};
use crate::family::{critical_points, BasePoint, GeneratingFunction, Label};

/// Largest real exponent accepted by `frame_weight`.
pub const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sheet {
    pub label: Label,
    pub y: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetData {
    pub base: BasePoint,
    pub sheets: Vec<Sheet>,
    /// Dual fibre coordinate.
    pub w: [f64; 2],
}

impl SheetData {
    pub fn get(&self, l: Label) -> Option<&Sheet> {
        self.sheets.iter().find(|s| s.label == l)
    }

    /// Largest `|grad f(y) - x|` over the sheets.
    pub fn residual(&self, f: &GeneratingFunction) -> f64 {
        self.sheets
            .iter()
            .map(|s| {
                let g = f.gradient(s.y);
                (g[0] - self.base.x1).hypot(g[1] - self.base.x2)
            })
            .fold(0.0, f64::max)
    }
}

/// Coefficients of `A_i = a1 dz1 + a2 dz2` for each sheet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionSample {
    pub base: BasePoint,
    pub coefficients: Vec<(Label, [Complex64; 2])>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePotential {
    pub base: BasePoint,
    pub label: Label,
    pub h: f64,
    pub a: f64,
    pub weight: Complex64,
}

fn sheet_list(fd: &crate::family::FiberData) -> Vec<Sheet> {
    let mut v: Vec<Sheet> = fd.points.iter().map(|p| Sheet { label: p.label, y: p.y }).collect();
    v.sort_by_key(|s| s.label);
    v
}

/// Fibre points over `x`, labeled in a fixed order (increasing `y1`, then
/// `y2`). Points on the caustic are rejected with `DegenerateFiber`.
pub fn sheets(f: &GeneratingFunction, x: BasePoint, cfg: &TrackConfig) -> Result<SheetData> {
    let mut fd = critical_points(f, x, &cfg.solver)?;
    order_sheets(&mut fd);
    Ok(SheetData { base: x, sheets: sheet_list(&fd), w: [0.0, 0.0] })
}

/// Carry the labels of `from` along `path` (starting at `from.base`).
pub fn transport(f: &GeneratingFunction, from: &SheetData, path: &[BasePoint], cfg: &TrackConfig) -> Result<SheetData> {
    let mut fd = critical_points(f, from.base, &cfg.solver)?;
    for p in fd.points.iter_mut() {
        let s = from
            .sheets
            .iter()
            .min_by(|a, b| p.dist(a.y).total_cmp(&p.dist(b.y)))
            .ok_or_else(|| Error::LabelMismatch("empty sheet list".into()))?;
        p.label = s.label;
    }
    let end = continue_labels(f, &fd, path, cfg)?;
    Ok(SheetData {
        base: end.base,
        sheets: sheet_list(&end),
        w: from.w,
    })
}

/// `A_i = i (y_i1 dz1 + y_i2 dz2)` for each sheet.
pub fn connection_form(sd: &SheetData) -> ConnectionSample {
    ConnectionSample {
        base: sd.base,
        coefficients: sd
            .sheets
            .iter()
            .map(|s| (s.label, [Complex64::new(0.0, s.y[0]), Complex64::new(0.0, s.y[1])]))
            .collect(),
    }
}

/// `h = x . y - f(y)` at a fibre point `y` over `x`.
pub fn legendre_value(f: &GeneratingFunction, x: BasePoint, y: [f64; 2]) -> f64 {
    x.x1 * y[0] + x.x2 * y[1] - f.value(y)
}

/// A caustic-free patch with sheets labeled at an anchor point. Values at
/// other points are obtained by continuation from the anchor.
#[derive(Debug, Clone)]
pub struct SheetPatch<'a> {
    pub f: &'a GeneratingFunction,
    pub anchor: SheetData,
    pub track: TrackConfig,
    /// Largest allowed disagreement between two continuation paths.
    pub path_tol: f64,
}

impl<'a> SheetPatch<'a> {
    pub fn new(f: &'a GeneratingFunction, anchor: BasePoint, track: TrackConfig) -> Result<Self> {
        Ok(SheetPatch {
            f,
            anchor: sheets(f, anchor, &track)?,
            track,
            path_tol: 1e-8,
        })
    }

    /// Sheets over `x`, continued along the straight segment from the anchor
    /// and compared against a bent path.
    pub fn sheets_at(&self, x: BasePoint) -> Result<SheetData> {
        let a = self.anchor.base;
        if a.dist(x) == 0.0 {
            return Ok(self.anchor.clone());
        }
        let direct = transport(self.f, &self.anchor, &[a, x], &self.track)?;
        let (dx, dy) = (x.x1 - a.x1, x.x2 - a.x2);
        let mid = BasePoint::new(0.5 * (a.x1 + x.x1) - 0.25 * dy, 0.5 * (a.x2 + x.x2) + 0.25 * dx);
        let bent = transport(self.f, &self.anchor, &[a, mid, x], &self.track)?;
        for s in &direct.sheets {
            let d = bent.get(s.label).map(|t| (t.y[0] - s.y[0]).hypot(t.y[1] - s.y[1]));
            match d {
                Some(d) if d <= self.path_tol => {}
                _ => {
                    return Err(Error::PatchNotSimplyConnected(format!(
                        "sheet {} over ({}, {}) depends on the path",
                        s.label, x.x1, x.x2
                    )))
                }
            }
        }
        Ok(direct)
    }

    pub fn legendre_potential(&self, label: Label, x: BasePoint) -> Result<f64> {
        let sd = self.sheets_at(x)?;
        let s = sd
            .get(label)
            .ok_or_else(|| Error::LabelMismatch(format!("no sheet {label} over ({}, {})", x.x1, x.x2)))?;
        Ok(legendre_value(self.f, x, s.y))
    }

    /// Central-difference gradient of `h` for `label` at `x`.
    pub fn potential_gradient(&self, label: Label, x: BasePoint, step: f64) -> Result<[f64; 2]> {
        let h = |p: BasePoint| self.legendre_potential(label, p);
        let g1 = (h(BasePoint::new(x.x1 + step, x.x2))? - h(BasePoint::new(x.x1 - step, x.x2))?) / (2.0 * step);
        let g2 = (h(BasePoint::new(x.x1, x.x2 + step))? - h(BasePoint::new(x.x1, x.x2 - step))?) / (2.0 * step);
        Ok([g1, g2])
    }

    /// Largest `|dh/dx - y|` over the sheets at `x`.
    pub fn gradient_error(&self, x: BasePoint, step: f64) -> Result<f64> {
        let sd = self.sheets_at(x)?;
        let mut worst: f64 = 0.0;
        for s in &sd.sheets {
            let g = self.potential_gradient(s.label, x, step)?;
            worst = worst.max((g[0] - s.y[0]).hypot(g[1] - s.y[1]));
        }
        Ok(worst)
    }
}

/// `exp[2 pi (h/2 - A/(4 pi) + i dh.w)]`.
pub fn frame_weight(h: f64, a: f64, dh_dx: [f64; 2], w: [f64; 2]) -> Result<Complex64> {
    if !(PI * h).is_finite() || (PI * h).abs() > MAX_EXPONENT {
        return Err(Error::WeightOverflow(PI * h));
    }
    let re = 2.0 * PI * (h / 2.0 - a / (4.0 * PI));
    if !re.is_finite() || re.abs() > MAX_EXPONENT {
        return Err(Error::WeightOverflow(re));
    }
    let im = 2.0 * PI * (dh_dx[0] * w[0] + dh_dx[1] * w[1]);
    Ok(Complex64::from_polar(re.exp(), im))
}

/// Potentials and weights of every sheet in `sd`. `a` is the flat
/// connection potential per sheet.
pub fn frame_potentials(
    f: &GeneratingFunction,
    sd: &SheetData,
    a: &dyn Fn(Label, BasePoint) -> f64,
) -> Result<Vec<FramePotential>> {
    sd.sheets
        .iter()
        .map(|s| {
            let h = legendre_value(f, sd.base, s.y);
            let av = a(s.label, sd.base);
            Ok(FramePotential {
                base: sd.base,
                label: s.label,
                h,
                a: av,
                weight: frame_weight(h, av, s.y, sd.w)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorRow {
    pub x1: f64,
    pub x2: f64,
    pub sheet: String,
    pub y1: f64,
    pub y2: f64,
    pub h: f64,
    pub re_weight: f64,
    pub im_weight: f64,
}

/// Sample an `n x n` grid over `[lo, hi]` with zero connection potential.
pub fn sample_grid(patch: &SheetPatch, lo: [f64; 2], hi: [f64; 2], n: usize, w: [f64; 2]) -> Result<Vec<MirrorRow>> {
    let pts: Vec<BasePoint> = (0..n * n)
        .map(|k| {
            let (i, j) = (k % n, k / n);
            let t = |m: usize| if n == 1 { 0.5 } else { m as f64 / (n - 1) as f64 };
            BasePoint::new(lo[0] + t(i) * (hi[0] - lo[0]), lo[1] + t(j) * (hi[1] - lo[1]))
        })
        .collect();
    let rows: Result<Vec<Vec<MirrorRow>>> = pts
        .par_iter()
        .map(|&x| {
            let mut sd = patch.sheets_at(x)?;
            sd.w = w;
            let fp = frame_potentials(patch.f, &sd, &|_, _| 0.0)?;
            Ok(sd
                .sheets
                .iter()
                .zip(fp)
                .map(|(s, p)| MirrorRow {
                    x1: x.x1,
                    x2: x.x2,
                    sheet: s.label.to_string(),
                    y1: s.y[0],
                    y2: s.y[1],
                    h: p.h,
                    re_weight: p.weight.re,
                    im_weight: p.weight.im,
                })
                .collect())
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

pub fn rows_to_csv(rows: &[MirrorRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{elliptic_umbilic, symmetric_umbilic};
    use crate::monodromy::sheets::circle_loop;

    fn close(a: [f64; 2], b: [f64; 2]) -> bool {
        (a[0] - b[0]).hypot(a[1] - b[1]) < 1e-9
    }

    #[test]
    fn sheets_at_unit_point() {
        for f in [elliptic_umbilic(), symmetric_umbilic()] {
            let sd = sheets(&f, BasePoint::new(1.0, 0.0), &TrackConfig::default()).unwrap();
            assert_eq!(sd.sheets.len(), 2);
            assert!(close(sd.sheets[0].y, [-1.0, 0.0]));
            assert!(close(sd.sheets[1].y, [1.0, 0.0]));
            assert!(sd.residual(&f) < 1e-9);
        }
    }

    #[test]
    fn origin_is_rejected() {
        let r = sheets(&elliptic_umbilic(), BasePoint::ORIGIN, &TrackConfig::default());
        assert!(matches!(r, Err(Error::DegenerateFiber { .. })), "{r:?}");
    }

    #[test]
    fn circle_transport_swaps_labels() {
        let f = elliptic_umbilic();
        let cfg = TrackConfig::default();
        let start = sheets(&f, BasePoint::new(1.0, 0.0), &cfg).unwrap();
        let end = transport(&f, &start, &circle_loop(BasePoint::ORIGIN, 1.0, 64), &cfg).unwrap();
        for s in &start.sheets {
            let t = end.get(s.label).unwrap();
            let other = start.sheets.iter().find(|o| o.label != s.label).unwrap();
            assert!(close(t.y, other.y));
        }
    }

    #[test]
    fn connection_at_unit_point() {
        let sd = sheets(&elliptic_umbilic(), BasePoint::new(1.0, 0.0), &TrackConfig::default()).unwrap();
        let c = connection_form(&sd);
        let a = c.coefficients[0].1;
        let b = c.coefficients[1].1;
        assert!((a[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12 && a[1].norm() < 1e-12);
        assert!((b[0] - Complex64::new(0.0, 1.0)).norm() < 1e-12 && b[1].norm() < 1e-12);
        assert!(c.coefficients.iter().all(|(_, v)| v[0].re == 0.0 && v[1].re == 0.0));
    }

    #[test]
    fn legendre_value_and_gradient() {
        let f = elliptic_umbilic();
        let x = BasePoint::new(1.0, 0.0);
        let patch = SheetPatch::new(&f, x, TrackConfig::default()).unwrap();
        let sd = patch.sheets_at(x).unwrap();
        let plus = sd.sheets.iter().find(|s| s.y[0] > 0.0).unwrap();
        let h = patch.legendre_potential(plus.label, x).unwrap();
        assert!((h - 2.0 / 3.0).abs() < 1e-12);
        let g = patch.potential_gradient(plus.label, x, 1e-4).unwrap();
        assert!((g[0] - 1.0).hypot(g[1]) < 1e-5);
    }

    #[test]
    fn path_dependence_is_detected() {
        let f = elliptic_umbilic();
        let patch = SheetPatch::new(&f, BasePoint::new(1.0, 0.0), TrackConfig::default()).unwrap();
        // the bent path to (-1, 0) passes the other side of the origin
        let r = patch.sheets_at(BasePoint::new(-1.0, 0.1));
        assert!(matches!(r, Err(Error::PatchNotSimplyConnected(_))), "{r:?}");
    }

    #[test]
    fn weights() {
        assert_eq!(frame_weight(0.0, 0.0, [0.0, 0.0], [5.0, -2.0]).unwrap(), Complex64::new(1.0, 0.0));
        let v = frame_weight(2.0 / 3.0, 0.0, [1.0, 0.0], [0.0, 0.0]).unwrap();
        assert!((v.re - (2.0 * PI / 3.0).exp()).abs() < 1e-12 && v.im == 0.0);
        let m1 = frame_weight(0.4, 0.2, [1.0, 2.0], [0.0, 0.0]).unwrap().norm();
        let m2 = frame_weight(0.4, 0.2, [1.0, 2.0], [0.7, -3.1]).unwrap().norm();
        assert!((m1 - m2).abs() < 1e-12 * m1);
        assert!(matches!(frame_weight(1e6, 0.0, [0.0; 2], [0.0; 2]), Err(Error::WeightOverflow(_))));
    }

    #[test]
    fn csv_header() {
        let f = elliptic_umbilic();
        let patch = SheetPatch::new(&f, BasePoint::new(1.0, 0.5), TrackConfig::default()).unwrap();
        let rows = sample_grid(&patch, [0.8, 0.3], [1.2, 0.7], 2, [0.0, 0.0]).unwrap();
        assert_eq!(rows.len(), 8);
        let s = rows_to_csv(&rows).unwrap();
        assert!(s.starts_with("x1,x2,sheet,y1,y2,h,re_weight,im_weight\n"));
    }
}
