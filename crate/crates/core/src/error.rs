use thiserror::Error;

use crate::expr::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dilation factor must be positive, got {0}")]
    NonPositiveDilation(f64),

    #[error("invalid group parameter n = {0}")]
    InvalidGroupParameter(usize),

    #[error("non-finite coordinate at index {0}")]
    NonFiniteCoordinate(usize),

    #[error("distance profile returned a non-finite value at (s = {s}, t = {t})")]
    NonFiniteProfile { s: f64, t: f64 },

    #[error("distance profile is not homogeneous: {0}")]
    NotHomogeneous(String),

    #[error("distance profile is not positive away from the origin: {0}")]
    NotPositive(String),

    #[error("degree overflow: {a} + {b} exceeds {dim}")]
    DegreeOverflow { a: usize, b: usize, dim: usize },

    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("invalid degree {p} for dimension {dim}")]
    InvalidDegree { p: usize, dim: usize },

    #[error("p-vector is not simple (subspace has dimension {found}, expected {expected})")]
    NotSimple { expected: usize, found: usize },

    #[error("p-vector is not vertical")]
    NotVertical,

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("evaluation failed: {0}")]
    Eval(String),

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("invalid domain box: {0}")]
    InvalidDomain(String),

    #[error("parametrization is not an embedding at {point:?} (smallest singular value ratio {ratio:e})")]
    NotAnEmbedding { point: Vec<f64>, ratio: f64 },

    #[error("operation requires a codimension-one surface (p = {expected}), got p = {got}")]
    WrongCodimension { expected: usize, got: usize },

    #[error("distance has no constant metric factor")]
    NonConstantMetricFactor,

    #[error("lambda must be nonzero")]
    ZeroLambda,

    #[error("point is characteristic; blow-up requires a transverse point")]
    CharacteristicPoint,

    #[error("ball region reaches the domain boundary")]
    BallTouchesBoundary,

    #[error("Riemannian jacobian vanishes: degenerate level set")]
    DegenerateLevelSet,

    #[error("level-set chart is inconsistent with the map: {0}")]
    ChartInconsistent(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
