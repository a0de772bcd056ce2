//! Small dense polynomials in one and two variables, with the pieces the
//! critical-point solver needs: products, a Sylvester resultant with
//! polynomial entries, and an all-roots Aberth iteration.

use num_complex::Complex64;

/// Univariate polynomial, coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly1 {
    pub coef: Vec<f64>,
}

impl Poly1 {
    pub fn new(mut coef: Vec<f64>) -> Self {
        if coef.is_empty() {
            coef.push(0.0);
        }
        Poly1 { coef }
    }

    pub fn zero() -> Self {
        Poly1 { coef: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Poly1 { coef: vec![c] }
    }

    /// Degree after discarding exactly-zero leading terms.
    pub fn degree(&self) -> usize {
        self.coef.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coef.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coef.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn eval_c(&self, t: Complex64) -> Complex64 {
        self.coef
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }

    pub fn add(&self, other: &Poly1) -> Poly1 {
        let n = self.coef.len().max(other.coef.len());
        let coef = (0..n)
            .map(|k| self.coef.get(k).unwrap_or(&0.0) + other.coef.get(k).unwrap_or(&0.0))
            .collect();
        Poly1 { coef }
    }

    pub fn scale(&self, s: f64) -> Poly1 {
        Poly1 {
            coef: self.coef.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul(&self, other: &Poly1) -> Poly1 {
        let mut coef = vec![0.0; self.coef.len() + other.coef.len() - 1];
        for (i, a) in self.coef.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coef.iter().enumerate() {
                coef[i + j] += a * b;
            }
        }
        Poly1 { coef }
    }

    /// Drops leading coefficients below `rel` times the largest coefficient.
    pub fn trimmed(&self, rel: f64) -> Poly1 {
        let scale = self.coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale == 0.0 {
            return Poly1::zero();
        }
        let mut coef = self.coef.clone();
        while coef.len() > 1 && coef.last().unwrap().abs() <= rel * scale {
            coef.pop();
        }
        Poly1 { coef }
    }

    /// All complex roots.
    pub fn roots(&self) -> Vec<Complex64> {
        let c: Vec<Complex64> = self.coef.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        complex_roots(&c)
    }
}

/// Roots of a complex polynomial (increasing-degree coefficients) by
/// Aberth–Ehrlich iteration followed by a Newton polish.
pub fn complex_roots(coef: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coef.to_vec();
    while c.len() > 1 && c.last().unwrap().norm() == 0.0 {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let c: Vec<Complex64> = c.iter().map(|z| z / lead).collect();
    if deg == 1 {
        return vec![-c[0]];
    }
    if deg == 2 {
        let b = c[1];
        let q = c[0];
        let disc = (b * b - 4.0 * q).sqrt();
        // avoid cancellation
        let s = if (b.conj() * disc).re >= 0.0 { -b - disc } else { -b + disc };
        let r1 = s / 2.0;
        let r2 = if r1.norm() > 0.0 { q / r1 } else { -b - r1 };
        return vec![r1, r2];
    }

    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for k in (0..=deg).rev() {
            dp = dp * z + p;
            p = p * z + c[k];
        }
        (p, dp)
    };

    // Fujiwara-style bound for the initial circle
    let bound = (0..deg)
        .map(|k| c[k].norm().powf(1.0 / (deg - k) as f64))
        .fold(0.0f64, f64::max)
        * 2.0;
    let radius = bound.max(1e-12);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            Complex64::from_polar(radius * 0.5, th)
        })
        .collect();

    for _ in 0..800 {
        let mut max_step = 0.0f64;
        for k in 0..deg {
            let (p, dp) = eval(z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let w = p / dp;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != k {
                    let d = z[k] - z[j];
                    if d.norm() > 0.0 {
                        s += 1.0 / d;
                    }
                }
            }
            let a = w / (Complex64::new(1.0, 0.0) - w * s);
            if a.is_finite() {
                z[k] -= a;
                max_step = max_step.max(a.norm() / (1.0 + z[k].norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(*zk);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            *zk -= step;
        }
    }
    z
}

/// Dense bivariate polynomial `sum c[i][j] u^i v^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bivar {
    pub deg: usize,
    /// Row-major `(deg+1) x (deg+1)`; entries with `i + j > deg` stay zero.
    pub coef: Vec<f64>,
}

impl Bivar {
    pub fn zero(deg: usize) -> Self {
        Bivar {
            deg,
            coef: vec![0.0; (deg + 1) * (deg + 1)],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i > self.deg || j > self.deg {
            0.0
        } else {
            self.coef[i * (self.deg + 1) + j]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, c: f64) {
        let d = self.deg + 1;
        self.coef[i * d + j] = c;
    }

    pub fn add_term(&mut self, i: usize, j: usize, c: f64) {
        let d = self.deg + 1;
        self.coef[i * d + j] += c;
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let mut acc = 0.0;
        for i in (0..=self.deg).rev() {
            let mut row = 0.0;
            for j in (0..=self.deg - i).rev() {
                row = row * v + self.get(i, j);
            }
            acc = acc * u + row;
        }
        acc
    }

    pub fn eval_c(&self, u: Complex64, v: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in (0..=self.deg).rev() {
            let mut row = Complex64::new(0.0, 0.0);
            for j in (0..=self.deg - i).rev() {
                row = row * v + self.get(i, j);
            }
            acc = acc * u + row;
        }
        acc
    }

    pub fn mul(&self, other: &Bivar) -> Bivar {
        let mut out = Bivar::zero(self.deg + other.deg);
        for i in 0..=self.deg {
            for j in 0..=self.deg - i {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..=other.deg {
                    for l in 0..=other.deg - k {
                        out.add_term(i + k, j + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Bivar) -> Bivar {
        let deg = self.deg.max(other.deg);
        let mut out = Bivar::zero(deg);
        for i in 0..=deg {
            for j in 0..=deg - i {
                out.set(i, j, self.get(i, j) + other.get(i, j));
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Bivar {
        Bivar {
            deg: self.deg,
            coef: self.coef.iter().map(|c| c * s).collect(),
        }
    }

    /// Partial derivative in `u`.
    pub fn du(&self) -> Bivar {
        let mut out = Bivar::zero(self.deg.saturating_sub(1).max(0));
        for i in 1..=self.deg {
            for j in 0..=self.deg - i {
                out.add_term(i - 1, j, i as f64 * self.get(i, j));
            }
        }
        out
    }

    /// Partial derivative in `v`.
    pub fn dv(&self) -> Bivar {
        let mut out = Bivar::zero(self.deg.saturating_sub(1).max(0));
        for i in 0..self.deg {
            for j in 1..=self.deg - i {
                out.add_term(i, j - 1, j as f64 * self.get(i, j));
            }
        }
        out
    }

    /// Composition with the linear substitution `u -> a u + b v`, `v -> c u + d v`.
    pub fn linear_substitute(&self, a: f64, b: f64, c: f64, d: f64) -> Bivar {
        let mut lu = Bivar::zero(1);
        lu.set(1, 0, a);
        lu.set(0, 1, b);
        let mut lv = Bivar::zero(1);
        lv.set(1, 0, c);
        lv.set(0, 1, d);
        let mut pu = vec![one()];
        let mut pv = vec![one()];
        for k in 1..=self.deg {
            pu.push(pu[k - 1].mul(&lu));
            pv.push(pv[k - 1].mul(&lv));
        }
        let mut out = Bivar::zero(self.deg);
        for i in 0..=self.deg {
            for j in 0..=self.deg - i {
                let cij = self.get(i, j);
                if cij == 0.0 {
                    continue;
                }
                let term = pu[i].mul(&pv[j]).scale(cij);
                out = out.add(&term);
            }
        }
        out.truncate(self.deg)
    }

    fn truncate(mut self, deg: usize) -> Bivar {
        if self.deg == deg {
            return self;
        }
        let mut out = Bivar::zero(deg);
        for i in 0..=deg {
            for j in 0..=deg - i {
                out.set(i, j, self.get(i, j));
            }
        }
        self.coef.clear();
        out
    }

    /// Coefficients in `u`, each a polynomial in `v`.
    pub fn as_poly_in_u(&self) -> Vec<Poly1> {
        (0..=self.deg)
            .map(|i| Poly1::new((0..=self.deg - i).map(|j| self.get(i, j)).collect()))
            .collect()
    }
}

fn one() -> Bivar {
    let mut b = Bivar::zero(0);
    b.set(0, 0, 1.0);
    b
}

/// Determinant of a square matrix with univariate polynomial entries, by
/// cofactor expansion along the first row. Sizes stay below 8 here.
pub fn poly_det(m: &[Vec<Poly1>]) -> Poly1 {
    let n = m.len();
    if n == 0 {
        return Poly1::constant(1.0);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    if n == 2 {
        return m[0][0].mul(&m[1][1]).add(&m[0][1].mul(&m[1][0]).scale(-1.0));
    }
    let mut acc = Poly1::zero();
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly1>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != col)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = m[0][col].mul(&poly_det(&minor));
        acc = if col % 2 == 0 {
            acc.add(&term)
        } else {
            acc.add(&term.scale(-1.0))
        };
    }
    acc
}

/// Resultant of `p` and `q` with respect to `u`, as a polynomial in `v`.
///
/// Both inputs are given by their `u`-coefficients (`p[k]` multiplies `u^k`).
pub fn resultant_u(p: &[Poly1], q: &[Poly1]) -> Poly1 {
    let dp = p.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    let dq = q.iter().rposition(|c| !c.is_zero()).unwrap_or(0);
    let n = dp + dq;
    if n == 0 {
        return Poly1::constant(1.0);
    }
    let mut m = vec![vec![Poly1::zero(); n]; n];
    for r in 0..dq {
        for k in 0..=dp {
            m[r][r + k] = p[dp - k].clone();
        }
    }
    for r in 0..dp {
        for k in 0..=dq {
            m[dq + r][r + k] = q[dq - k].clone();
        }
    }
    poly_det(&m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aberth_recovers_known_roots() {
        // (t-1)(t+2)(t-3)(t+0.5)
        let p = Poly1::new(vec![1.0, -1.0])
            .mul(&Poly1::new(vec![2.0, 1.0]))
            .mul(&Poly1::new(vec![-3.0, 1.0]))
            .mul(&Poly1::new(vec![0.5, 1.0]));
        let mut r: Vec<f64> = p.roots().iter().map(|z| z.re).collect();
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [-2.0, -0.5, 1.0, 3.0];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn aberth_complex_pair() {
        // t^2 + 1
        let r = Poly1::new(vec![1.0, 0.0, 1.0]).roots();
        assert_eq!(r.len(), 2);
        for z in r {
            assert!((z.norm() - 1.0).abs() < 1e-14 && z.re.abs() < 1e-14);
        }
        // t^5 - 1
        let r = Poly1::new(vec![-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).roots();
        assert_eq!(r.len(), 5);
        for z in r {
            assert!((z.powu(5) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn resultant_of_circle_and_line() {
        // p = u^2 + v^2 - 1, q = u - v ; res_u = 2 v^2 - 1
        let p = vec![
            Poly1::new(vec![-1.0, 0.0, 1.0]),
            Poly1::zero(),
            Poly1::constant(1.0),
        ];
        let q = vec![Poly1::new(vec![0.0, -1.0]), Poly1::constant(1.0)];
        let r = resultant_u(&p, &q).trimmed(1e-14);
        assert!((r.eval(0.0) + 1.0).abs() < 1e-14);
        assert!((r.eval(1.0) - 1.0).abs() < 1e-14);
        assert_eq!(r.degree(), 2);
    }

    #[test]
    fn linear_substitution_matches_pointwise() {
        let mut b = Bivar::zero(3);
        b.set(3, 0, 1.0 / 3.0);
        b.set(1, 2, -2.0);
        b.set(2, 0, 0.7);
        b.set(0, 1, -0.2);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let r = b.linear_substitute(c, -s, s, c);
        for &(u, v) in &[(0.2, -1.1), (1.3, 0.4), (-0.7, -0.9)] {
            let want = b.eval(c * u - s * v, s * u + c * v);
            assert!((r.eval(u, v) - want).abs() < 1e-12);
        }
    }
}
