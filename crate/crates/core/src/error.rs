use crate::lattice::Mode;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported torus dimension {0}; only 2 and 3 are supported")]
    UnsupportedDimension(usize),

    #[error("empty mode set")]
    EmptyModeSet,

    #[error("subgroup has rank {rank} < {dim}; its dual is not a lattice")]
    RankDeficient { rank: usize, dim: usize },

    #[error("field is not divergence-free")]
    NotDivergenceFree,

    #[error("mode {0} is not in the support of the field")]
    ModeNotInSupport(Mode),

    #[error("translation by the given angle is not exact for mode {0}")]
    InexactTranslation(Mode),

    #[error("closure descriptor is unclassified: {0}")]
    Unclassified(String),

    #[error("invalid radii: r_in = {r_in} must satisfy 0 < r_in < r_out = {r_out} < pi")]
    InvalidRadii { r_in: f64, r_out: f64 },

    #[error("points {0} and {1} of the ensemble coincide on the torus")]
    CoincidentPoints(usize, usize),

    #[error("ensemble separation {0} is too small for a disjoint bump construction")]
    SeparationTooSmall(f64),

    #[error("invalid control signal: {0}")]
    InvalidControl(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn check_torus_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}
