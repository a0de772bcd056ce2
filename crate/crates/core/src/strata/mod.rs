//! Stratification of the base: caustic, bifurcation walls, twist lines and
//! the region graph they cut out.

pub mod build;
pub mod caustic;
pub mod geom;
pub mod graph;
pub mod grid;
pub mod scan;
pub mod svg;
pub mod walls;

pub use graph::{Crossing, Cusp, Loop, Region, RegionGraph, Wall, WallKind};
