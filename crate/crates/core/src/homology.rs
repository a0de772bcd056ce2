//! Morse complexes over the base, their rank-2 homology fibres, and the
//! integer glue maps between fibres of adjacent regions.
//!
//! Saddle labels are 1-based in matrix indices as in the usual display
//! `E_ij(tau)`: entry `tau` sits at row `i`, column `j`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Small dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

impl IMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMat { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m.data[k * n + k] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        IMat {
            rows: r,
            cols: c,
            data: rows.iter().flat_map(|x| x.iter().copied()).collect(),
        }
    }

    pub fn m2(a: i64, b: i64, c: i64, d: i64) -> Self {
        IMat { rows: 2, cols: 2, data: vec![a, b, c, d] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, o: &IMat) -> IMat {
        assert_eq!(self.cols, o.rows, "shape mismatch {}x{} * {}x{}", self.rows, self.cols, o.rows, o.cols);
        let mut m = IMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..o.cols {
                    m.data[i * o.cols + j] += a * o.get(k, j);
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == IMat::identity(self.rows)
    }

    pub fn trace(&self) -> i64 {
        (0..self.rows.min(self.cols)).map(|k| self.get(k, k)).sum()
    }

    /// Determinant of a square matrix of size at most 3.
    pub fn det(&self) -> i64 {
        assert_eq!(self.rows, self.cols);
        let g = |i, j| self.get(i, j);
        match self.rows {
            0 => 1,
            1 => g(0, 0),
            2 => g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0),
            3 => {
                g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1)) - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                    + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
            }
            n => panic!("det of {n}x{n} not supported"),
        }
    }

    /// Inverse over the integers; defined when the determinant is a unit.
    pub fn inverse(&self) -> Option<IMat> {
        let d = self.det();
        if d != 1 && d != -1 {
            return None;
        }
        let n = self.rows;
        let mut inv = IMat::zeros(n, n);
        match n {
            1 => inv.data[0] = d,
            2 => {
                inv = IMat::m2(self.get(1, 1), -self.get(0, 1), -self.get(1, 0), self.get(0, 0));
                for v in &mut inv.data {
                    *v *= d;
                }
            }
            3 => {
                for i in 0..3 {
                    for j in 0..3 {
                        // cofactor of (j, i)
                        let (r0, r1) = others(j);
                        let (c0, c1) = others(i);
                        let minor = self.get(r0, c0) * self.get(r1, c1) - self.get(r0, c1) * self.get(r1, c0);
                        let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                        inv.set(i, j, sign * minor * d);
                    }
                }
            }
            _ => return None,
        }
        Some(inv)
    }

    /// Delete row and column `k` (0-based).
    pub fn delete(&self, k: usize) -> IMat {
        let keep: Vec<usize> = (0..self.rows).filter(|&i| i != k).collect();
        let mut m = IMat::zeros(keep.len(), keep.len());
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                m.set(a, b, self.get(i, j));
            }
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }
}

fn others(k: usize) -> (usize, usize) {
    match k {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

impl fmt::Debug for IMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

/// Row-major display with sign-aligned columns.
impl fmt::Display for IMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.data.iter().map(|v| v.to_string().len()).max().unwrap_or(1);
        for i in 0..self.rows {
            write!(f, "(")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:>w$}", self.get(i, j))?;
            }
            writeln!(f, ")")?;
        }
        Ok(())
    }
}

impl Serialize for IMat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IMat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<i64>> = Vec::deserialize(d)?;
        let c = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != c) {
            return Err(serde::de::Error::custom("ragged matrix"));
        }
        Ok(IMat {
            rows: rows.len(),
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }
}

/// `E_ij(tau)` of size `n`, with 1-based `i != j`.
pub fn elementary(n: usize, i: usize, j: usize, tau: i64) -> IMat {
    assert!(i >= 1 && j >= 1 && i <= n && j <= n && i != j, "bad elementary index ({i},{j})");
    let mut m = IMat::identity(n);
    m.set(i - 1, j - 1, tau);
    m
}

/// Incidence column `(I_1, I_2, I_3)`.
pub type Incidence = [i64; 3];

/// Chain complex of one region: saddles in degree 1, the node (inside
/// only) in degree 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseComplex {
    /// 1-based saddle labels in increasing order.
    pub saddles: Vec<usize>,
    pub node: bool,
    /// `dn = sum I_i s_i`; absent outside.
    pub differential: Option<Incidence>,
}

impl MorseComplex {
    pub fn inside(incidence: Incidence) -> Self {
        MorseComplex {
            saddles: vec![1, 2, 3],
            node: true,
            differential: Some(incidence),
        }
    }

    pub fn outside(a: usize, b: usize) -> Result<Self> {
        if a == b || !(1..=3).contains(&a) || !(1..=3).contains(&b) {
            return Err(Error::LabelMismatch(format!("outside labels ({a},{b})")));
        }
        Ok(MorseComplex {
            saddles: vec![a.min(b), a.max(b)],
            node: false,
            differential: None,
        })
    }

    /// Differential as a matrix from degree 2 to degree 1.
    pub fn d2(&self) -> IMat {
        match self.differential {
            Some(i) => IMat::from_rows(&[&[i[0]], &[i[1]], &[i[2]]]),
            None => IMat::zeros(self.saddles.len(), 0),
        }
    }

    /// Differential from degree 1 to degree 0 (no index-0 points).
    pub fn d1(&self) -> IMat {
        IMat::zeros(0, self.saddles.len())
    }

    /// `d1 d2`, which must vanish.
    pub fn d_squared(&self) -> IMat {
        self.d1().mul(&self.d2())
    }
}

/// Degree-1 Morse homology of a region: `Z^3 / <I>` inside, `Z^2` outside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyFibre {
    /// 1-based labels of the ambient generators.
    pub labels: Vec<usize>,
    pub relation: Option<Incidence>,
    /// 0-based ambient slot eliminated by the relation.
    pub pivot: Option<usize>,
    /// Ambient representatives of the two basis classes.
    pub basis: Vec<Vec<i64>>,
}

pub fn homology_fibre(c: &MorseComplex) -> Result<HomologyFibre> {
    match c.differential {
        None => Ok(HomologyFibre {
            labels: c.saddles.clone(),
            relation: None,
            pivot: None,
            basis: vec![vec![1, 0], vec![0, 1]],
        }),
        Some(rel) => {
            if rel.iter().any(|v| !(0..=1).contains(v)) {
                return Err(Error::WrongIncidence(rel));
            }
            // first nonzero slot, s1 preferred
            let Some(p) = rel.iter().position(|&v| v != 0) else {
                return Err(Error::WrongIncidence(rel));
            };
            let basis = (0..3)
                .filter(|&j| j != p)
                .map(|j| {
                    let mut e = vec![0; 3];
                    e[j] = 1;
                    e
                })
                .collect();
            Ok(HomologyFibre {
                labels: vec![1, 2, 3],
                relation: Some(rel),
                pivot: Some(p),
                basis,
            })
        }
    }
}

impl HomologyFibre {
    pub fn inside(rel: Incidence) -> Result<Self> {
        homology_fibre(&MorseComplex::inside(rel))
    }

    pub fn outside(a: usize, b: usize) -> Result<Self> {
        homology_fibre(&MorseComplex::outside(a, b)?)
    }

    pub fn ambient(&self) -> usize {
        self.labels.len()
    }

    pub fn rank(&self) -> usize {
        self.ambient() - usize::from(self.relation.is_some())
    }

    pub fn is_inside(&self) -> bool {
        self.relation.is_some()
    }

    /// Representative with the pivot slot cleared.
    pub fn normalize(&self, h: &[i64]) -> Vec<i64> {
        match (self.relation, self.pivot) {
            (Some(rel), Some(p)) => {
                let c = h[p] / rel[p];
                h.iter().zip(rel).map(|(a, r)| a - c * r).collect()
            }
            _ => h.to_vec(),
        }
    }

    /// Coordinates of the class of `h` in the chosen basis.
    pub fn coords(&self, h: &[i64]) -> [i64; 2] {
        assert_eq!(h.len(), self.ambient());
        let n = self.normalize(h);
        match self.pivot {
            Some(p) => {
                let v: Vec<i64> = (0..3).filter(|&j| j != p).map(|j| n[j]).collect();
                [v[0], v[1]]
            }
            None => [n[0], n[1]],
        }
    }

    /// Ambient representative of coordinates `c`.
    pub fn lift(&self, c: [i64; 2]) -> Vec<i64> {
        let mut h = vec![0; self.ambient()];
        for (k, b) in self.basis.iter().enumerate() {
            for (slot, v) in b.iter().enumerate() {
                h[slot] += c[k] * v;
            }
        }
        h
    }

    pub fn equivalent(&self, a: &[i64], b: &[i64]) -> bool {
        self.normalize(a) == self.normalize(b)
    }

    /// Matrix of `x -> coords(chain * lift(x))` for a chain map into this
    /// fibre from `src`.
    fn induced_from(&self, src: &HomologyFibre, chain: &IMat) -> IMat {
        let mut m = IMat::zeros(2, 2);
        for k in 0..2 {
            let mut c = [0; 2];
            c[k] = 1;
            let img = chain.apply(&src.lift(c));
            let v = self.coords(&img);
            m.set(0, k, v[0]);
            m.set(1, k, v[1]);
        }
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlueKind {
    Fold,
    Bifurcation,
    TwistLine,
    /// Identification of outside bases by continuation of critical points.
    Continuation,
}

/// A chain map between adjacent regions and its action on homology bases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlueMap {
    pub kind: GlueKind,
    pub chain_map: IMat,
    pub induced: IMat,
    pub wall: Option<usize>,
    /// `+1` for the wall's stored direction, `-1` for its reverse.
    pub direction: i8,
}

impl GlueMap {
    pub fn det(&self) -> i64 {
        self.induced.det()
    }

    /// The same glue read in the opposite direction.
    pub fn reversed(&self) -> Result<GlueMap> {
        let induced = self
            .induced
            .inverse()
            .ok_or_else(|| Error::Config(format!("glue map {:?} is not invertible", self.induced)))?;
        let chain_map = if self.chain_map.rows == self.chain_map.cols {
            self.chain_map.inverse().unwrap_or_else(|| induced.clone())
        } else {
            // a fold: the reverse chain map is the projection/inclusion pair
            induced.clone()
        };
        Ok(GlueMap {
            kind: self.kind,
            chain_map,
            induced,
            wall: self.wall,
            direction: -self.direction,
        })
    }

    pub fn with_wall(mut self, wall: usize) -> Self {
        self.wall = Some(wall);
        self
    }
}

/// Glue across a fold where `(n, s_dying)` die. `into_inside` selects the
/// direction outside -> inside (inclusion) or inside -> outside.
pub fn caustic_glue(outside: &HomologyFibre, inside: &HomologyFibre, dying: usize, into_inside: bool) -> Result<GlueMap> {
    let Some(rel) = inside.relation else {
        return Err(Error::LabelMismatch("inside fibre has no relation".into()));
    };
    if outside.is_inside() {
        return Err(Error::LabelMismatch("outside fibre carries a relation".into()));
    }
    let expected: Vec<usize> = (1..=3).filter(|&l| l != dying).collect();
    if outside.labels != expected {
        return Err(Error::LabelMismatch(format!(
            "fold kills s{dying} but outside carries {:?}",
            outside.labels
        )));
    }
    if rel[dying - 1] != 1 {
        return Err(Error::IncompatibleIncidence {
            from: rel,
            to: rel,
            pair: (dying, dying),
        });
    }
    // inclusion Z^2 -> Z^3
    let mut inc = IMat::zeros(3, 2);
    for (k, &l) in outside.labels.iter().enumerate() {
        inc.set(l - 1, k, 1);
    }
    let induced_in = inside.induced_from(outside, &inc);
    if into_inside {
        return Ok(GlueMap {
            kind: GlueKind::Fold,
            chain_map: inc,
            induced: induced_in,
            wall: None,
            direction: 1,
        });
    }
    // projection Z^3 -> Z^2 clearing the dying slot: h -> h - h_k I
    let k = dying - 1;
    let mut proj = IMat::zeros(2, 3);
    for (row, &l) in outside.labels.iter().enumerate() {
        let s = l - 1;
        for col in 0..3 {
            let mut v = i64::from(s == col);
            if col == k {
                v -= rel[s];
            }
            proj.set(row, col, v);
        }
    }
    let induced = outside.induced_from(inside, &proj);
    Ok(GlueMap {
        kind: GlueKind::Fold,
        chain_map: proj,
        induced,
        wall: None,
        direction: -1,
    })
}

/// `tau` solving `E_ij(tau) I(U) = I(V)`; `None` when `I(U) = I(V)` leaves
/// it free.
pub fn solve_tau(iu: Incidence, iv: Incidence, i: usize, j: usize) -> Result<Option<i64>> {
    let err = || Error::IncompatibleIncidence { from: iu, to: iv, pair: (i, j) };
    if !(1..=3).contains(&i) || !(1..=3).contains(&j) || i == j {
        return Err(err());
    }
    let diff: Vec<usize> = (0..3).filter(|&k| iu[k] != iv[k]).collect();
    match diff.as_slice() {
        [] => Ok(None),
        [k] if *k == i - 1 => {
            let d = iv[i - 1] - iu[i - 1];
            if iu[j - 1] == 0 {
                return Err(err());
            }
            let tau = d / iu[j - 1];
            if tau * iu[j - 1] != d || !(-1..=1).contains(&tau) {
                return Err(err());
            }
            Ok(Some(tau))
        }
        _ => Err(err()),
    }
}

/// Wall-crossing matrix `E_ij(tau)` with `E I(U) = I(V)`. When the
/// incidences agree `tau` must be supplied by the caller's policy.
pub fn wall_matrix(iu: Incidence, iv: Incidence, pair: (usize, usize), policy_tau: Option<i64>) -> Result<(i64, IMat)> {
    let (i, j) = pair;
    let tau = match solve_tau(iu, iv, i, j)? {
        Some(t) => t,
        None => policy_tau.unwrap_or(0),
    };
    let e = elementary(3, i, j, tau);
    let img = e.apply(&iu);
    if img != iv.to_vec() {
        return Err(Error::IncompatibleIncidence { from: iu, to: iv, pair });
    }
    Ok((tau, e))
}

/// Glue across a bifurcation wall between two inside regions.
pub fn bifurcation_glue(src: &HomologyFibre, dst: &HomologyFibre, e: &IMat) -> Result<GlueMap> {
    match (src.relation, dst.relation) {
        (Some(iu), Some(iv)) => {
            if e.apply(&iu) != iv.to_vec() {
                return Err(Error::IncompatibleIncidence { from: iu, to: iv, pair: (0, 0) });
            }
            Ok(GlueMap {
                kind: GlueKind::Bifurcation,
                chain_map: e.clone(),
                induced: dst.induced_from(src, e),
                wall: None,
                direction: 1,
            })
        }
        (None, None) => {
            if src.labels != dst.labels || e.rows != 2 {
                return Err(Error::LabelMismatch(format!("{:?} vs {:?}", src.labels, dst.labels)));
            }
            Ok(GlueMap {
                kind: GlueKind::Bifurcation,
                chain_map: e.clone(),
                induced: e.clone(),
                wall: None,
                direction: 1,
            })
        }
        _ => Err(Error::LabelMismatch("bifurcation wall joins inside and outside".into())),
    }
}

/// Outside reduction of an inside wall matrix: delete the row and column of
/// the saddle `j` dying on the fold where the wall enters.
pub fn wall_matrix_outside(e: &IMat, pair: (usize, usize), j: usize) -> Result<IMat> {
    if e.rows != 3 || !(1..=3).contains(&j) {
        return Err(Error::LabelMismatch(format!("cannot reduce {}x{} by {j}", e.rows, e.cols)));
    }
    if pair.0 == j || pair.1 == j {
        return Err(Error::LabelMismatch(format!(
            "separatrix pair {pair:?} involves the dying saddle s{j}"
        )));
    }
    Ok(e.delete(j - 1))
}

/// Elementary 2x2 glue on outside labels `labels` for a separatrix whose
/// matrix entry sits at (target `i`, source `j`).
pub fn outside_elementary(labels: &[usize], pair: (usize, usize), tau: i64) -> Result<IMat> {
    let pi = labels.iter().position(|&l| l == pair.0);
    let pj = labels.iter().position(|&l| l == pair.1);
    match (pi, pj) {
        (Some(a), Some(b)) if a != b => {
            let mut m = IMat::identity(2);
            m.set(a, b, tau);
            Ok(m)
        }
        _ => Err(Error::LabelMismatch(format!("pair {pair:?} not among {labels:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CuspCase {
    /// All three saddles receive a gradient line from `n` near the cusp.
    A,
    /// Only the two saddles merging at the cusp do.
    B,
}

fn third_label(pair: (usize, usize)) -> usize {
    6 - pair.0 - pair.1
}

fn check_pair(pair: (usize, usize)) -> Result<(usize, usize)> {
    let (a, b) = (pair.0.min(pair.1), pair.0.max(pair.1));
    if a < 1 || b > 3 || a == b {
        return Err(Error::UnknownCase(format!("cusp pair {pair:?}")));
    }
    Ok((a, b))
}

/// Case of a cusp where `n` merges with the saddles in `pair`, from the
/// incidence of the inside region next to it.
pub fn cusp_case(pair: (usize, usize), incidence: Incidence) -> Result<CuspCase> {
    let (a, b) = check_pair(pair)?;
    let c = third_label((a, b));
    if incidence[a - 1] != 1 || incidence[b - 1] != 1 {
        return Err(Error::UnknownCase(format!("incidence {incidence:?} at cusp ({a},{b})")));
    }
    match incidence[c - 1] {
        1 => Ok(CuspCase::A),
        0 => Ok(CuspCase::B),
        _ => Err(Error::UnknownCase(format!("incidence {incidence:?} at cusp ({a},{b})"))),
    }
}

/// Incidence representing a cusp case.
pub fn case_incidence(pair: (usize, usize), case: CuspCase) -> Result<Incidence> {
    let (a, b) = check_pair(pair)?;
    let mut i = [1, 1, 1];
    if case == CuspCase::B {
        i[third_label((a, b)) - 1] = 0;
    }
    Ok(i)
}

/// Fold-to-fold route past a cusp: enter the caustic through the side where
/// `(n, s_enter)` die and leave through the side where the other saddle of
/// the pair dies. Bases are the label-ordered outside bases on each side.
pub fn cusp_route(pair: (usize, usize), incidence: Incidence, enter: usize) -> Result<IMat> {
    let (a, b) = check_pair(pair)?;
    if enter != a && enter != b {
        return Err(Error::UnknownCase(format!("side s{enter} is not on cusp ({a},{b})")));
    }
    let exit = if enter == a { b } else { a };
    let side = |k: usize| -> Result<HomologyFibre> {
        let l: Vec<usize> = (1..=3).filter(|&x| x != k).collect();
        HomologyFibre::outside(l[0], l[1])
    };
    let inside = HomologyFibre::inside(incidence)?;
    let g_in = caustic_glue(&side(enter)?, &inside, enter, true)?;
    let g_out = caustic_glue(&side(exit)?, &inside, exit, false)?;
    Ok(g_out.induced.mul(&g_in.induced))
}

/// The displayed cusp monodromies, entering through the lower-labelled side
/// of the pair. Entering through the other side gives the inverse.
pub fn cusp_case_matrix(pair: (usize, usize), case: CuspCase) -> Result<IMat> {
    let p = check_pair(pair)?;
    Ok(match (p, case) {
        ((2, 3), CuspCase::A) => IMat::m2(1, -1, 0, -1),
        ((2, 3), CuspCase::B) => IMat::m2(1, 0, 0, -1),
        ((1, 2), CuspCase::A) => IMat::m2(-1, 0, -1, 1),
        ((1, 2), CuspCase::B) => IMat::m2(-1, 0, 0, 1),
        ((1, 3), CuspCase::A) => IMat::m2(0, -1, 1, -1),
        ((1, 3), CuspCase::B) => IMat::m2(0, -1, 1, 0),
        _ => return Err(Error::UnknownCase(format!("{pair:?}"))),
    })
}

/// Glue along the twist line of a cusp: the inverse of the cusp monodromy
/// for a route entering through side `enter`. It maps the exit-side basis
/// back to the entry-side basis.
pub fn cusp_twist(pair: (usize, usize), case: CuspCase, enter: usize) -> Result<GlueMap> {
    let (a, b) = check_pair(pair)?;
    let m = if enter == a {
        cusp_case_matrix((a, b), case)?
    } else if enter == b {
        cusp_case_matrix((a, b), case)?.inverse().expect("cusp matrices are unimodular")
    } else {
        return Err(Error::UnknownCase(format!("side s{enter} is not on cusp ({a},{b})")));
    };
    let inv = m.inverse().expect("cusp matrices are unimodular");
    Ok(GlueMap {
        kind: GlueKind::TwistLine,
        chain_map: inv.clone(),
        induced: inv,
        wall: None,
        direction: 1,
    })
}

/// Continuation identification across a twist line of cusp `pair`, from
/// the side where `s_from_side` died to the other side. The local survivor
/// changes label; the third saddle keeps it.
pub fn continuation_glue(pair: (usize, usize), from_side: usize) -> Result<GlueMap> {
    let (a, b) = check_pair(pair)?;
    if from_side != a && from_side != b {
        return Err(Error::UnknownCase(format!("side s{from_side} is not on cusp ({a},{b})")));
    }
    let to_side = if from_side == a { b } else { a };
    let src: Vec<usize> = (1..=3).filter(|&x| x != from_side).collect();
    let dst: Vec<usize> = (1..=3).filter(|&x| x != to_side).collect();
    // on the source side the local survivor is s_to_side; it becomes s_from_side
    let mut m = IMat::zeros(2, 2);
    for (k, &l) in src.iter().enumerate() {
        let image = if l == to_side { from_side } else { l };
        let row = dst.iter().position(|&d| d == image).expect("label present");
        m.set(row, k, 1);
    }
    Ok(GlueMap {
        kind: GlueKind::Continuation,
        chain_map: m.clone(),
        induced: m,
        wall: None,
        direction: 1,
    })
}

/// Chain-level split twist `h -> (h1 - h2 - h3, -h2, -h3)` for a case (a)
/// cusp of `(n, s2, s3)`.
pub fn split_twist_chain_glue(incidence: Incidence) -> Result<GlueMap> {
    if incidence != [1, 1, 1] {
        return Err(Error::WrongIncidence(incidence));
    }
    let chain = IMat::from_rows(&[&[1, -1, -1], &[0, -1, 0], &[0, 0, -1]]);
    let fib = HomologyFibre::inside(incidence)?;
    // must preserve the relation line
    let img = chain.apply(&incidence);
    if !fib.equivalent(&img, &[0, 0, 0]) {
        return Err(Error::WrongIncidence(incidence));
    }
    Ok(GlueMap {
        kind: GlueKind::TwistLine,
        induced: fib.induced_from(&fib, &chain),
        chain_map: chain,
        wall: None,
        direction: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let m = IMat::from_rows(&[&[1, -1, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(m.det(), 1);
        assert!(m.mul(&m.inverse().unwrap()).is_identity());
        let r = IMat::m2(0, 1, 1, 0);
        assert_eq!(r.det(), -1);
        assert_eq!(r.inverse().unwrap(), r);
        assert!(IMat::m2(2, 0, 0, 1).inverse().is_none());
    }

    #[test]
    fn fibre_quotients() {
        let f = HomologyFibre::inside([1, 1, 1]).unwrap();
        assert_eq!(f.rank(), 2);
        assert!(f.equivalent(&[3, 4, 5], &[4, 5, 6]));
        assert!(!f.equivalent(&[3, 4, 5], &[4, 5, 5]));
        let g = HomologyFibre::inside([1, 1, 0]).unwrap();
        assert!(g.equivalent(&[1, 2, 7], &[2, 3, 7]));
        assert!(!g.equivalent(&[1, 2, 7], &[2, 3, 8]));
        assert_eq!(HomologyFibre::outside(3, 1).unwrap().labels, vec![1, 3]);
        assert!(HomologyFibre::inside([0, 0, 0]).is_err());
    }

    #[test]
    fn example_taus() {
        let (t, e) = wall_matrix([1, 1, 1], [1, 1, 0], (3, 1), None).unwrap();
        assert_eq!(t, -1);
        assert_eq!(e, elementary(3, 3, 1, -1));
        let (t, _) = wall_matrix([1, 1, 0], [1, 1, 1], (3, 1), None).unwrap();
        assert_eq!(t, 1);
        assert!(wall_matrix([1, 1, 1], [1, 0, 0], (3, 1), None).is_err());
    }

    #[test]
    fn reduction_of_inside_matrix() {
        let e = elementary(3, 3, 1, 1);
        assert_eq!(wall_matrix_outside(&e, (3, 1), 2).unwrap(), IMat::m2(1, 0, 1, 1));
        assert!(wall_matrix_outside(&e, (3, 1), 1).is_err());
    }

    #[test]
    fn routes_match_displayed_cusp_matrices() {
        for pair in [(1, 2), (1, 3), (2, 3)] {
            for case in [CuspCase::A, CuspCase::B] {
                let i = case_incidence(pair, case).unwrap();
                let m = cusp_case_matrix(pair, case).unwrap();
                assert_eq!(cusp_route(pair, i, pair.0).unwrap(), m, "{pair:?} {case:?}");
                assert_eq!(cusp_route(pair, i, pair.1).unwrap(), m.inverse().unwrap());
            }
        }
    }

    #[test]
    fn split_twist() {
        let g = split_twist_chain_glue([1, 1, 1]).unwrap();
        assert_eq!(g.chain_map.apply(&[1, 2, 3]), vec![-4, -2, -3]);
        assert!(split_twist_chain_glue([1, 1, 0]).is_err());
    }

    #[test]
    fn fold_round_trip() {
        let out = HomologyFibre::outside(2, 3).unwrap();
        let ins = HomologyFibre::inside([1, 1, 1]).unwrap();
        let a = caustic_glue(&out, &ins, 1, true).unwrap();
        let b = caustic_glue(&out, &ins, 1, false).unwrap();
        assert!(b.induced.mul(&a.induced).is_identity());
        assert!(caustic_glue(&out, &ins, 2, true).is_err());
    }
}
