use thiserror::Error;

use crate::spaces::SpaceKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh has no panels")]
    EmptyMesh,

    #[error("mesh invariant violated: {0}")]
    InvalidMesh(String),

    #[error("unsupported quadrature order {0}")]
    UnsupportedOrder(usize),

    #[error("expected a {expected:?} space, found {found:?}")]
    WrongSpace { expected: SpaceKind, found: SpaceKind },

    #[error("unsupported space pairing {test:?} x {trial:?}")]
    UnsupportedPairing { test: SpaceKind, trial: SpaceKind },

    #[error("spaces are defined on different meshes")]
    MeshMismatch,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("kernel returned a non-finite value at a regular quadrature point")]
    NonFiniteKernel,

    #[error("matrix is numerically singular")]
    Singular,

    #[error("matrix is not symmetric (relative defect {0:.3e})")]
    NotSymmetric(f64),

    #[error("wavenumber must be nonzero")]
    ZeroWavenumber,

    #[error("rate series: {0}")]
    RateSeries(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
