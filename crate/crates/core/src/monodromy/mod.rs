//! Composition of glue maps along loops in the region graph, cusp
//! monodromies, sheet monodromy and the fixture configurations.

pub mod fixtures;
pub mod sheets;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::{CuspCase, GlueKind, GlueMap, IMat};
use crate::strata::graph::{Crossing, Loop, RegionGraph, WallKind};

pub use sheets::{circle_loop, sheet_monodromy, SheetMonodromy};

/// Which wall kinds contribute their glue. A disabled bifurcation wall
/// crosses as the identity; a disabled twist line crosses by continuation
/// of critical points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluePolicy {
    pub bifurcation: bool,
    pub twist: bool,
}

impl GluePolicy {
    pub const ALL: GluePolicy = GluePolicy { bifurcation: true, twist: true };
    pub const NO_TWIST: GluePolicy = GluePolicy { bifurcation: true, twist: false };
}

impl Default for GluePolicy {
    fn default() -> Self {
        GluePolicy::ALL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    /// Composite on the base region's homology basis.
    pub matrix: IMat,
    /// Composite of chain maps when every region on the loop is inside.
    pub chain: Option<IMat>,
    pub trace: i64,
    pub det: i64,
    pub is_identity: bool,
    /// Glue applied at each crossing, in order.
    pub steps: Vec<GlueMap>,
}

fn crossing_glue(g: &RegionGraph, c: Crossing, policy: GluePolicy) -> Result<GlueMap> {
    let w = g.wall(c.wall)?;
    let stored = match w.kind {
        WallKind::Fold => w.glue.clone(),
        WallKind::Bifurcation if policy.bifurcation => w.glue.clone(),
        WallKind::Bifurcation => {
            let n = if g.region(w.left)?.inside { 3 } else { 2 };
            Some(GlueMap {
                kind: GlueKind::Bifurcation,
                chain_map: IMat::identity(n),
                induced: IMat::identity(2),
                wall: Some(w.id),
                direction: 1,
            })
        }
        WallKind::TwistLine if policy.twist => w.glue.clone(),
        WallKind::TwistLine => w.relabel.clone(),
    };
    let g = stored.ok_or(Error::MissingGlue { wall: c.wall })?;
    if c.forward {
        Ok(g)
    } else {
        g.reversed()
    }
}

/// Compose glue maps along `l`; later crossings multiply on the left.
pub fn compose_loop(g: &RegionGraph, l: &Loop, policy: GluePolicy) -> Result<MonodromyResult> {
    let path = g.walk(l)?;
    let all_inside = path.iter().all(|&r| g.regions[r].inside);
    let mut m = IMat::identity(2);
    let mut chain = if all_inside { Some(IMat::identity(3)) } else { None };
    let mut steps = Vec::with_capacity(l.crossings.len());
    for &c in &l.crossings {
        let glue = crossing_glue(g, c, policy)?;
        m = glue.induced.mul(&m);
        if let Some(ch) = chain.as_mut() {
            *ch = glue.chain_map.mul(ch);
        }
        steps.push(glue);
    }
    Ok(MonodromyResult {
        trace: m.trace(),
        det: m.det(),
        is_identity: m.is_identity(),
        matrix: m,
        chain,
        steps,
    })
}

/// Product of the fold (and bifurcation) glue maps on a small loop around
/// cusp `c`, omitting the twist line crossing.
pub fn cusp_monodromy(g: &RegionGraph, c: usize) -> Result<IMat> {
    let l = g.cusp_loop(c)?;
    let mut m = IMat::identity(2);
    for &cr in &l.crossings {
        if g.wall(cr.wall)?.kind == WallKind::TwistLine {
            continue;
        }
        m = crossing_glue(g, cr, GluePolicy::ALL)?.induced.mul(&m);
    }
    Ok(m)
}

/// Case of cusp `c` as recorded on the graph.
pub fn cusp_case(g: &RegionGraph, c: usize) -> Result<CuspCase> {
    g.cusps
        .get(c)
        .and_then(|k| k.case)
        .ok_or_else(|| Error::UnknownCase(format!("cusp {c}")))
}

/// Random closed walk of about `steps` crossings based at `base`.
pub fn random_loop<R: Rng>(g: &RegionGraph, base: usize, steps: usize, rng: &mut R) -> Result<Loop> {
    let mut at = base;
    let mut crossings = Vec::new();
    for _ in 0..steps {
        let nb = g.neighbours(at);
        if nb.is_empty() {
            break;
        }
        let (c, next) = nb[rng.gen_range(0..nb.len())];
        crossings.push(c);
        at = next;
    }
    let back = g
        .path_between(at, base)
        .ok_or_else(|| Error::InvalidLoop(format!("region {base} unreachable from {at}")))?;
    crossings.extend(back);
    Ok(Loop { base, crossings })
}

/// Each displayed fixture identity, checked in exact arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub fn verify_fixture_suite() -> Vec<SuiteEntry> {
    fixtures::suite()
}
