//! Region graph: regions of the base cut out by the caustic, bifurcation
//! walls and twist lines, with the glue maps across each wall.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::BasePoint;
use crate::homology::{
    bifurcation_glue, caustic_glue, continuation_glue, cusp_twist, elementary, outside_elementary, CuspCase, GlueMap,
    HomologyFibre, IMat, Incidence,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallKind {
    Fold,
    Bifurcation,
    TwistLine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: usize,
    #[serde(with = "point_array")]
    pub rep: BasePoint,
    pub inside: bool,
    pub incidence: Option<Incidence>,
    /// 1-based saddle labels carried by the region.
    pub labels: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Region {
    pub fn fibre(&self) -> Result<HomologyFibre> {
        if self.inside {
            let i = self
                .incidence
                .ok_or_else(|| Error::LabelMismatch(format!("inside region {} has no incidence", self.id)))?;
            HomologyFibre::inside(i)
        } else {
            match self.labels.as_slice() {
                [a, b] => HomologyFibre::outside(*a, *b),
                l => Err(Error::LabelMismatch(format!("outside region {} carries labels {l:?}", self.id))),
            }
        }
    }

    /// For an outside region, the saddle that died on its side of the caustic.
    pub fn side(&self) -> Option<usize> {
        if self.inside || self.labels.len() != 2 {
            return None;
        }
        (1..=3).find(|l| !self.labels.contains(l))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub id: usize,
    pub kind: WallKind,
    /// Separatrix pair `(i, j)` placing `tau` at row `i`, column `j`.
    pub pair: Option<(usize, usize)>,
    /// `tau` for the left-to-right crossing.
    pub tau: Option<i64>,
    pub polyline: Vec<[f64; 2]>,
    pub left: usize,
    pub right: usize,
    /// Saddle dying with `n` on a fold.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dying: Option<usize>,
    /// Cusp a twist line (or a wall ending at a cusp) emanates from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cusp: Option<usize>,
    /// Left-to-right glue on the homology bases.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub glue: Option<GlueMap>,
    /// Continuation identification, used on twist lines when twists are off.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relabel: Option<GlueMap>,
    /// Fixed matrix overriding the computed glue.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed: Option<IMat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Wall {
    pub fn new(id: usize, kind: WallKind, left: usize, right: usize) -> Self {
        Wall {
            id,
            kind,
            pair: None,
            tau: None,
            polyline: Vec::new(),
            left,
            right,
            dying: None,
            cusp: None,
            glue: None,
            relabel: None,
            fixed: None,
            name: None,
        }
    }

    pub fn other(&self, region: usize) -> Option<usize> {
        if region == self.left {
            Some(self.right)
        } else if region == self.right {
            Some(self.left)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cusp {
    pub id: usize,
    pub point: [f64; 2],
    /// Saddles merging with `n` at this cusp.
    pub pair: (usize, usize),
    /// Unit vector pointing out of the caustic along the cusp axis.
    pub axis: [f64; 2],
    pub case: Option<CuspCase>,
    /// Walls met by a small counterclockwise loop around the cusp, starting
    /// just after the twist line.
    #[serde(default)]
    pub loop_walls: Vec<(usize, bool)>,
}

/// Serialized as `{"regions", "walls", "cusps": [[x1, x2], ..],
/// "twist_lines"}` plus the cusp details, caustic polyline and notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegionGraph {
    pub regions: Vec<Region>,
    pub walls: Vec<Wall>,
    pub cusps: Vec<Cusp>,
    pub twist_lines: Vec<usize>,
    pub caustic: Vec<[f64; 2]>,
    pub reference: Option<BasePoint>,
    pub notes: Vec<String>,
}

mod point_array {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::family::BasePoint;

    pub fn serialize<S: Serializer>(p: &BasePoint, s: S) -> Result<S::Ok, S::Error> {
        p.as_array().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BasePoint, D::Error> {
        <[f64; 2]>::deserialize(d).map(BasePoint::from)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    regions: Vec<Region>,
    walls: Vec<Wall>,
    cusps: Vec<[f64; 2]>,
    twist_lines: Vec<usize>,
    #[serde(default)]
    cusp_data: Vec<Cusp>,
    #[serde(default)]
    caustic: Vec<[f64; 2]>,
    #[serde(default)]
    reference: Option<[f64; 2]>,
    #[serde(default)]
    notes: Vec<String>,
}

impl Serialize for RegionGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphJson {
            regions: self.regions.clone(),
            walls: self.walls.clone(),
            cusps: self.cusps.iter().map(|c| c.point).collect(),
            twist_lines: self.twist_lines.clone(),
            cusp_data: self.cusps.clone(),
            caustic: self.caustic.clone(),
            reference: self.reference.map(|p| p.as_array()),
            notes: self.notes.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RegionGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = GraphJson::deserialize(d)?;
        let cusps = if j.cusp_data.is_empty() {
            j.cusps
                .iter()
                .enumerate()
                .map(|(id, &point)| Cusp { id, point, pair: (0, 0), axis: [0.0, 0.0], case: None, loop_walls: Vec::new() })
                .collect()
        } else {
            j.cusp_data
        };
        Ok(RegionGraph {
            regions: j.regions,
            walls: j.walls,
            cusps,
            twist_lines: j.twist_lines,
            caustic: j.caustic,
            reference: j.reference.map(BasePoint::from),
            notes: j.notes,
        })
    }
}

/// One wall crossing; `forward` means left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Crossing {
    pub wall: usize,
    pub forward: bool,
}

/// Closed path in the region graph, as the sequence of walls it crosses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Loop {
    pub base: usize,
    pub crossings: Vec<Crossing>,
}

impl Loop {
    pub fn inverse(&self) -> Loop {
        Loop {
            base: self.base,
            crossings: self
                .crossings
                .iter()
                .rev()
                .map(|c| Crossing { wall: c.wall, forward: !c.forward })
                .collect(),
        }
    }

    /// `self` followed by `other`; both must share the base region.
    pub fn concat(&self, other: &Loop) -> Result<Loop> {
        if self.base != other.base {
            return Err(Error::InvalidLoop(format!("bases {} and {} differ", self.base, other.base)));
        }
        let mut c = self.crossings.clone();
        c.extend_from_slice(&other.crossings);
        Ok(Loop { base: self.base, crossings: c })
    }
}

impl RegionGraph {
    pub fn region(&self, id: usize) -> Result<&Region> {
        self.regions
            .get(id)
            .ok_or_else(|| Error::InvalidLoop(format!("no region {id}")))
    }

    pub fn wall(&self, id: usize) -> Result<&Wall> {
        self.walls.get(id).ok_or_else(|| Error::InvalidLoop(format!("no wall {id}")))
    }

    pub fn inside_regions(&self) -> impl Iterator<Item = &Region> {
        self.regions.iter().filter(|r| r.inside)
    }

    pub fn walls_of_kind(&self, kind: WallKind) -> impl Iterator<Item = &Wall> {
        self.walls.iter().filter(move |w| w.kind == kind)
    }

    /// Walls adjacent to `region` with the region on the other side.
    pub fn neighbours(&self, region: usize) -> Vec<(Crossing, usize)> {
        self.walls
            .iter()
            .filter_map(|w| {
                if w.left == region {
                    Some((Crossing { wall: w.id, forward: true }, w.right))
                } else if w.right == region {
                    Some((Crossing { wall: w.id, forward: false }, w.left))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Regions visited by a loop, checking that consecutive crossings chain
    /// and that the loop closes.
    pub fn walk(&self, l: &Loop) -> Result<Vec<usize>> {
        self.region(l.base)?;
        let mut at = l.base;
        let mut path = vec![at];
        for (k, c) in l.crossings.iter().enumerate() {
            let w = self.wall(c.wall)?;
            let (from, to) = if c.forward { (w.left, w.right) } else { (w.right, w.left) };
            if from != at {
                return Err(Error::InvalidLoop(format!(
                    "crossing {k} leaves region {from} but the path is in region {at}"
                )));
            }
            at = to;
            path.push(at);
        }
        if at != l.base {
            return Err(Error::InvalidLoop(format!("path ends in region {at}, not at base {}", l.base)));
        }
        Ok(path)
    }

    /// Shortest crossing sequence from `a` to `b` (breadth first).
    pub fn path_between(&self, a: usize, b: usize) -> Option<Vec<Crossing>> {
        let n = self.regions.len();
        let mut prev: Vec<Option<(usize, Crossing)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut q = VecDeque::from([a]);
        seen[a] = true;
        while let Some(r) = q.pop_front() {
            if r == b {
                let mut out = Vec::new();
                let mut cur = b;
                while cur != a {
                    let (p, c) = prev[cur]?;
                    out.push(c);
                    cur = p;
                }
                out.reverse();
                return Some(out);
            }
            for (c, s) in self.neighbours(r) {
                if !seen[s] {
                    seen[s] = true;
                    prev[s] = Some((r, c));
                    q.push_back(s);
                }
            }
        }
        None
    }

    /// Fill in the glue map of every wall from the region data. Walls with a
    /// `fixed` matrix keep it.
    pub fn compute_glue(&mut self) -> Result<()> {
        for k in 0..self.walls.len() {
            let (glue, relabel) = self.glue_for(&self.walls[k])?;
            let w = &mut self.walls[k];
            w.glue = Some(glue.with_wall(k));
            w.relabel = relabel.map(|g| g.with_wall(k));
        }
        Ok(())
    }

    fn glue_for(&self, w: &Wall) -> Result<(GlueMap, Option<GlueMap>)> {
        let left = self.region(w.left)?;
        let right = self.region(w.right)?;
        if let Some(m) = &w.fixed {
            let kind = match w.kind {
                WallKind::Fold => crate::homology::GlueKind::Fold,
                WallKind::Bifurcation => crate::homology::GlueKind::Bifurcation,
                WallKind::TwistLine => crate::homology::GlueKind::TwistLine,
            };
            let g = GlueMap {
                kind,
                chain_map: m.clone(),
                induced: m.clone(),
                wall: Some(w.id),
                direction: 1,
            };
            let relabel = match (w.kind, w.cusp) {
                (WallKind::TwistLine, Some(c)) => self.relabel_for(w, c).ok(),
                _ => None,
            };
            return Ok((g, relabel));
        }
        match w.kind {
            WallKind::Fold => {
                let dying = w.dying.ok_or_else(|| Error::LabelMismatch(format!("fold {} lacks a dying saddle", w.id)))?;
                match (left.inside, right.inside) {
                    (false, true) => Ok((caustic_glue(&left.fibre()?, &right.fibre()?, dying, true)?, None)),
                    (true, false) => Ok((caustic_glue(&right.fibre()?, &left.fibre()?, dying, false)?, None)),
                    _ => Err(Error::LabelMismatch(format!("fold {} does not separate inside from outside", w.id))),
                }
            }
            WallKind::Bifurcation => {
                let pair = w.pair.ok_or_else(|| Error::LabelMismatch(format!("wall {} lacks a pair", w.id)))?;
                let tau = w.tau.ok_or(Error::UnresolvedWall(format!("wall {} has no tau", w.id)))?;
                if left.inside {
                    let e = elementary(3, pair.0, pair.1, tau);
                    Ok((bifurcation_glue(&left.fibre()?, &right.fibre()?, &e)?, None))
                } else {
                    let e = outside_elementary(&left.labels, pair, tau)?;
                    Ok((bifurcation_glue(&left.fibre()?, &right.fibre()?, &e)?, None))
                }
            }
            WallKind::TwistLine => {
                let c = w.cusp.ok_or_else(|| Error::PlacementConflict {
                    cusp: usize::MAX,
                    reason: format!("twist line {} has no cusp", w.id),
                })?;
                let cusp = self
                    .cusps
                    .get(c)
                    .ok_or_else(|| Error::PlacementConflict { cusp: c, reason: "unknown cusp".into() })?;
                let case = cusp.case.ok_or_else(|| Error::UnknownCase(format!("cusp {c} has no case")))?;
                let (_, sr) = self.twist_sides(w, c)?;
                // left basis is the exit side of a route entering on the right
                let g = cusp_twist(cusp.pair, case, sr)?;
                Ok((g, Some(self.relabel_for(w, c)?)))
            }
        }
    }

    fn twist_sides(&self, w: &Wall, c: usize) -> Result<(usize, usize)> {
        let cusp = &self.cusps[c];
        let side = |r: usize| -> Result<usize> {
            let reg = self.region(r)?;
            let s = reg
                .side()
                .ok_or_else(|| Error::LabelMismatch(format!("twist line {} borders non-outside region {r}", w.id)))?;
            if s != cusp.pair.0 && s != cusp.pair.1 {
                return Err(Error::LabelMismatch(format!(
                    "region {r} (side s{s}) is not next to cusp pair {:?}",
                    cusp.pair
                )));
            }
            Ok(s)
        };
        let (a, b) = (side(w.left)?, side(w.right)?);
        if a == b {
            return Err(Error::LabelMismatch(format!("twist line {} has side s{a} on both sides", w.id)));
        }
        Ok((a, b))
    }

    fn relabel_for(&self, w: &Wall, c: usize) -> Result<GlueMap> {
        let (sl, _) = self.twist_sides(w, c)?;
        continuation_glue(self.cusps[c].pair, sl)
    }

    /// Small loop around cusp `c`, following `loop_walls`.
    pub fn cusp_loop(&self, c: usize) -> Result<Loop> {
        let cusp = self
            .cusps
            .get(c)
            .ok_or_else(|| Error::InvalidLoop(format!("no cusp {c}")))?;
        let first = cusp
            .loop_walls
            .first()
            .ok_or_else(|| Error::InvalidLoop(format!("cusp {c} has no loop")))?;
        let w = self.wall(first.0)?;
        let base = if first.1 { w.left } else { w.right };
        let l = Loop {
            base,
            crossings: cusp
                .loop_walls
                .iter()
                .map(|&(wall, forward)| Crossing { wall, forward })
                .collect(),
        };
        self.walk(&l)?;
        Ok(l)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("region graph json: {e}")))
    }
}
