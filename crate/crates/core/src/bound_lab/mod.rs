//! Desk-scale checks of the cover (upper bound) and Cantor (lower bound)
//! constructions.

mod cantor;
mod cover;
mod localdim;

pub use cantor::{
    cantor_generate, total_mass, CantorMeasure, CantorSpec, LeafSample, MeasureNode, PositionKind, SparseRule,
    StageLabel, NODE_CAP, SPECIAL_CAP,
};
pub use cover::{
    cover_cost, cover_cost_exact, cover_cost_transition, exponent_fit, CoverCost, CoverDesign, CoverSpec,
    EnumerationMode, ExponentFit, TransitionEstimate, COVER_CAP, LOG_GUARD, PREFIX_CAP,
};
pub use localdim::{
    local_dimension_sample, natural_cover_exponent, LocalDimRow, LocalDimStats, NaturalCover, RadiusCase,
};
