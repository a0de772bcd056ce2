//! Scan over perturbations, recording which wall configuration each one
//! produces. The scan reports what it finds; it does not claim to cover
//! every admissible diagram.

use serde::{Deserialize, Serialize};

use super::build::{build_strata, StrataConfig, Strata};
use super::graph::WallKind;
use super::walls::WallEnd;
use crate::family::{perturb, GeneratingFunction, Perturbation};
use crate::homology::{CuspCase, Incidence};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    /// Every wall ends at a cusp and the inside is a single region.
    CuspTerminated,
    /// Some wall ends on a fold arc away from the cusps.
    FoldEndpoint,
    /// Two walls meet inside the caustic.
    InsideCrossing,
    /// Anything else, described in words.
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub perturbation: Perturbation,
    pub configuration: Option<Configuration>,
    pub inside_incidences: Vec<Incidence>,
    pub cusp_cases: Vec<Option<CuspCase>>,
    pub walls: usize,
    /// Error text when the pipeline failed for this perturbation.
    pub error: Option<String>,
}

pub fn classify(st: &Strata) -> Configuration {
    let ends: Vec<(WallEnd, WallEnd)> = st.traced.iter().map(|w| (w.start, w.end)).collect();
    let inside_walls = st
        .graph
        .walls
        .iter()
        .filter(|w| w.kind == WallKind::Bifurcation && st.graph.regions[w.left].inside)
        .count();
    let inside_regions = st.graph.inside_regions().count();
    let at_fold = ends.iter().any(|(a, b)| matches!(a, WallEnd::Fold) || matches!(b, WallEnd::Fold));
    let all_cusp = ends
        .iter()
        .all(|(a, b)| matches!(a, WallEnd::Cusp(_)) || matches!(b, WallEnd::Cusp(_)));
    if inside_regions == 1 && inside_walls == 0 && all_cusp {
        Configuration::CuspTerminated
    } else if inside_walls > 0 && st.traced.iter().filter(|w| w.inside).count() >= 2 {
        Configuration::InsideCrossing
    } else if at_fold {
        Configuration::FoldEndpoint
    } else {
        Configuration::Other(format!("{inside_regions} inside regions, {inside_walls} inside walls"))
    }
}

pub fn scan(f: &GeneratingFunction, perturbations: &[Perturbation], cfg: &StrataConfig) -> Vec<ScanEntry> {
    perturbations
        .iter()
        .map(|p| {
            let built = perturb(f, p).and_then(|g| build_strata(&g, cfg));
            match built {
                Ok(st) => ScanEntry {
                    perturbation: p.clone(),
                    configuration: Some(classify(&st)),
                    inside_incidences: st.graph.inside_regions().filter_map(|r| r.incidence).collect(),
                    cusp_cases: st.graph.cusps.iter().map(|c| c.case).collect(),
                    walls: st.graph.walls_of_kind(WallKind::Bifurcation).count(),
                    error: None,
                },
                Err(e) => ScanEntry {
                    perturbation: p.clone(),
                    configuration: None,
                    inside_incidences: Vec::new(),
                    cusp_cases: Vec::new(),
                    walls: 0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}
