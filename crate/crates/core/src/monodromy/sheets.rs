//! Exchange of the sheets of the Lagrangian over a loop in the base.

use serde::{Deserialize, Serialize};

use crate::continuation::{continue_labels, order_sheets, TrackConfig};
use crate::error::{Error, Result};
use crate::family::{critical_points, BasePoint, GeneratingFunction};
use crate::homology::IMat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SheetMonodromy {
    /// `permutation[k]` is the sheet that sheet `k` ends on.
    pub permutation: Vec<usize>,
    pub matrix: IMat,
    /// Largest distance between a continued sheet and its matched start.
    pub mismatch: f64,
}

/// Closed polygonal loop sampling a circle.
pub fn circle_loop(center: BasePoint, radius: f64, samples: usize) -> Vec<BasePoint> {
    (0..=samples)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / samples as f64;
            BasePoint::new(center.x1 + radius * t.cos(), center.x2 + radius * t.sin())
        })
        .collect()
}

/// Continue the critical points of `f` around the closed loop `path` and
/// return the end-to-start matching. The loop must avoid the caustic.
pub fn sheet_monodromy(f: &GeneratingFunction, path: &[BasePoint], cfg: &TrackConfig, tol: f64) -> Result<SheetMonodromy> {
    let (first, last) = match (path.first(), path.last()) {
        (Some(a), Some(b)) if path.len() >= 3 => (*a, *b),
        _ => return Err(Error::InvalidLoop("sheet loop needs at least three vertices".into())),
    };
    if first.dist(last) > tol {
        return Err(Error::InvalidLoop(format!("loop does not close: gap {:e}", first.dist(last))));
    }
    let mut start = critical_points(f, first, &cfg.solver)?;
    order_sheets(&mut start);
    let n = start.points.len();
    let mut end = start.clone();
    for (k, seg) in path.windows(2).enumerate() {
        end = continue_labels(f, &end, seg, cfg).map_err(|e| match e {
            Error::SheetCollision { distance, .. } => Error::SheetCollision { step: k, distance },
            other => other,
        })?;
        if end.points.len() != n {
            return Err(Error::InvalidLoop(format!("loop meets the caustic near vertex {k}")));
        }
    }
    let mut perm = vec![usize::MAX; n];
    let mut mismatch: f64 = 0.0;
    for (k, p) in start.points.iter().enumerate() {
        // the point now carrying label of sheet k
        let q = end
            .points
            .iter()
            .find(|q| q.label == p.label)
            .ok_or_else(|| Error::LabelMismatch(format!("label {} lost", p.label)))?;
        let (j, d) = start
            .points
            .iter()
            .enumerate()
            .map(|(j, s)| (j, s.dist(q.y)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty fiber");
        mismatch = mismatch.max(d);
        perm[k] = j;
    }
    if mismatch > tol {
        return Err(Error::SheetCollision { step: path.len(), distance: mismatch });
    }
    let mut m = IMat::zeros(n, n);
    for (k, &j) in perm.iter().enumerate() {
        m.set(j, k, 1);
    }
    Ok(SheetMonodromy { permutation: perm, matrix: m, mismatch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{perturb, symmetric_umbilic, Perturbation};

    #[test]
    fn unit_circle_swaps_sheets() {
        let f = symmetric_umbilic();
        let r = sheet_monodromy(&f, &circle_loop(BasePoint::ORIGIN, 1.0, 64), &TrackConfig::default(), 1e-6).unwrap();
        assert_eq!(r.matrix, IMat::m2(0, 1, 1, 0));
    }

    #[test]
    fn small_loop_off_origin_is_trivial() {
        let f = symmetric_umbilic();
        let c = BasePoint::new(1.0, 0.5);
        let r = sheet_monodromy(&f, &circle_loop(c, 0.2, 16), &TrackConfig::default(), 1e-6).unwrap();
        assert!(r.matrix.is_identity());
    }

    #[test]
    fn loop_around_perturbed_caustic_swaps() {
        let f = perturb(&symmetric_umbilic(), &Perturbation::radial(0.1)).unwrap();
        let r = sheet_monodromy(&f, &circle_loop(BasePoint::ORIGIN, 0.5, 64), &TrackConfig::default(), 1e-6).unwrap();
        assert_eq!(r.matrix, IMat::m2(0, 1, 1, 0));
    }
}
