use thiserror::Error;

use crate::family::BasePoint;

/// Failures raised by the numerical pipeline and the glue algebra.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("perturbation raises the degree above 4 (monomial y1^{i} y2^{j})")]
    DegreeTooHigh { i: usize, j: usize },

    #[error("perturbation coefficients too large: norm {norm} > 1")]
    PerturbationTooLarge { norm: f64 },

    #[error("fiber over ({}, {}) is degenerate: min |det Hess| = {min_det:e}", .x.x1, .x.x2)]
    DegenerateFiber { x: BasePoint, min_det: f64 },

    #[error("root solver inconsistent over ({}, {}): {reason}", .x.x1, .x.x2)]
    SolverDivergence { x: BasePoint, reason: String },

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    #[error("fiber over ({}, {}) has no index-2 point", .x.x1, .x.x2)]
    NotInsideCaustic { x: BasePoint },

    #[error("incidence at ({}, {}) is ambiguous: {reason}", .x.x1, .x.x2)]
    NearWall { x: BasePoint, reason: String },

    #[error("leading cubic form vanishes identically")]
    DegenerateLeadingForm,

    #[error("caustic continuation did not close: {0}")]
    OpenCurve(String),

    #[error("wall detectors disagree: {0}")]
    UnresolvedWall(String),

    #[error("arrangement not in the catalogued cases: {0}")]
    ArrangementFailure(String),

    #[error("twist line placement conflict at cusp {cusp}: {reason}")]
    PlacementConflict { cusp: usize, reason: String },

    #[error("saddle labels disagree across a wall: {0}")]
    LabelMismatch(String),

    #[error("no tau in {{-1,0,1}} maps {from:?} to {to:?} for pair {pair:?}")]
    IncompatibleIncidence {
        from: [i64; 3],
        to: [i64; 3],
        pair: (usize, usize),
    },

    #[error("cusp case does not match (a) or (b): {0}")]
    UnknownCase(String),

    #[error("split twist requires incidence (1,1,1), got {0:?}")]
    WrongIncidence([i64; 3]),

    #[error("wall {wall} has no glue map under the active policy")]
    MissingGlue { wall: usize },

    #[error("sheets collided during continuation at step {step}: distance {distance:e}")]
    SheetCollision { step: usize, distance: f64 },

    #[error("sheet continuation is path dependent: {0}")]
    PatchNotSimplyConnected(String),

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("weight exponent out of range: {0}")]
    WeightOverflow(f64),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
