//! Planar polyline helpers.

pub type P2 = [f64; 2];

#[inline]
pub fn sub(a: P2, b: P2) -> P2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn add(a: P2, b: P2) -> P2 {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
pub fn scale(a: P2, s: f64) -> P2 {
    [a[0] * s, a[1] * s]
}

#[inline]
pub fn cross(a: P2, b: P2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn dot(a: P2, b: P2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn norm(a: P2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: P2, b: P2) -> f64 {
    norm(sub(a, b))
}

pub fn unit(a: P2) -> P2 {
    let n = norm(a);
    if n == 0.0 {
        a
    } else {
        scale(a, 1.0 / n)
    }
}

pub fn rotate(a: P2, t: f64) -> P2 {
    let (s, c) = t.sin_cos();
    [c * a[0] - s * a[1], s * a[0] + c * a[1]]
}

/// Parameters `(s, t)` of the proper crossing of segments `ab` and `cd`.
pub fn segment_intersection(a: P2, b: P2, c: P2, d: P2) -> Option<(f64, f64)> {
    let r = sub(b, a);
    let s = sub(d, c);
    let den = cross(r, s);
    // nearly parallel segments give rounding noise, not crossings
    if den.abs() <= 1e-13 * norm(r) * norm(s) {
        return None;
    }
    let ac = sub(c, a);
    let t = cross(ac, s) / den;
    let u = cross(ac, r) / den;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        Some((t, u))
    } else {
        None
    }
}

/// Crossings of segment `ab` with `poly`: (segment parameter, polyline
/// segment index, parameter on that segment).
pub fn segment_polyline_hits(a: P2, b: P2, poly: &[P2]) -> Vec<(f64, usize, f64)> {
    let (lo, hi) = bbox2(a, b);
    let mut out = Vec::new();
    for (k, w) in poly.windows(2).enumerate() {
        let (plo, phi) = bbox2(w[0], w[1]);
        if phi[0] < lo[0] || plo[0] > hi[0] || phi[1] < lo[1] || plo[1] > hi[1] {
            continue;
        }
        if let Some((s, t)) = segment_intersection(a, b, w[0], w[1]) {
            out.push((s, k, t));
        }
    }
    out
}

fn bbox2(a: P2, b: P2) -> (P2, P2) {
    ([a[0].min(b[0]), a[1].min(b[1])], [a[0].max(b[0]), a[1].max(b[1])])
}

pub fn segment_crosses(a: P2, b: P2, poly: &[P2]) -> bool {
    !segment_polyline_hits(a, b, poly).is_empty()
}

/// Even-odd point in polygon; the polygon may or may not repeat its first
/// vertex.
pub fn point_in_polygon(p: P2, poly: &[P2]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn point_segment_distance(p: P2, a: P2, b: P2) -> (f64, f64) {
    let ab = sub(b, a);
    let l2 = dot(ab, ab);
    let t = if l2 == 0.0 { 0.0 } else { (dot(sub(p, a), ab) / l2).clamp(0.0, 1.0) };
    (dist(p, add(a, scale(ab, t))), t)
}

/// Distance from `p` to a polyline with the closest segment and parameter.
pub fn point_polyline_distance(p: P2, poly: &[P2]) -> (f64, usize, f64) {
    if poly.len() == 1 {
        return (dist(p, poly[0]), 0, 0.0);
    }
    let mut best = (f64::INFINITY, 0, 0.0);
    for (k, w) in poly.windows(2).enumerate() {
        let (d, t) = point_segment_distance(p, w[0], w[1]);
        if d < best.0 {
            best = (d, k, t);
        }
    }
    best
}

pub fn polyline_length(poly: &[P2]) -> f64 {
    poly.windows(2).map(|w| dist(w[0], w[1])).sum()
}

/// Signed area (positive when counterclockwise).
pub fn signed_area(poly: &[P2]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        a += cross(p, q);
    }
    0.5 * a
}

pub fn area_centroid(poly: &[P2]) -> P2 {
    let n = poly.len();
    let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let c = cross(p, q);
        a += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    if a.abs() < 1e-300 {
        let m = poly.iter().fold([0.0, 0.0], |s, p| add(s, *p));
        return scale(m, 1.0 / n as f64);
    }
    [cx / (3.0 * a), cy / (3.0 * a)]
}

/// Point at arclength fraction `t` of a polyline.
pub fn polyline_at(poly: &[P2], t: f64) -> P2 {
    let total = polyline_length(poly);
    let mut target = t.clamp(0.0, 1.0) * total;
    for w in poly.windows(2) {
        let l = dist(w[0], w[1]);
        if target <= l && l > 0.0 {
            return add(w[0], scale(sub(w[1], w[0]), target / l));
        }
        target -= l;
    }
    *poly.last().expect("non-empty polyline")
}

/// Clip a ray from `o` along unit `d` to the axis-aligned box.
pub fn ray_box_exit(o: P2, d: P2, lo: P2, hi: P2) -> Option<f64> {
    let mut tmax = f64::INFINITY;
    for k in 0..2 {
        if d[k] > 0.0 {
            tmax = tmax.min((hi[k] - o[k]) / d[k]);
        } else if d[k] < 0.0 {
            tmax = tmax.min((lo[k] - o[k]) / d[k]);
        }
    }
    (tmax.is_finite() && tmax > 0.0).then_some(tmax)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_segments() {
        let (s, t) = segment_intersection([0.0, 0.0], [2.0, 0.0], [1.0, -1.0], [1.0, 1.0]).unwrap();
        assert!((s - 0.5).abs() < 1e-15 && (t - 0.5).abs() < 1e-15);
        assert!(segment_intersection([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]).is_none());
    }

    #[test]
    fn polygon_membership() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(point_in_polygon([0.5, 0.5], &sq));
        assert!(!point_in_polygon([1.5, 0.5], &sq));
        assert!((signed_area(&sq) - 1.0).abs() < 1e-15);
        let c = area_centroid(&sq);
        assert!((c[0] - 0.5).abs() < 1e-15 && (c[1] - 0.5).abs() < 1e-15);
    }
}
