use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero-length vector cannot be normalized")]
    ZeroVector,
    #[error("antipodal endpoints do not define a unique great arc")]
    AntipodalArc,
    #[error("invalid spherical polygon: {0}")]
    InvalidPolygon(String),
    #[error("quadrature level must be positive")]
    ZeroLevel,
    #[error("unsupported dimension {0}")]
    Dimension(usize),
    #[error("cone is not pointed")]
    NotPointed,
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("empty sector")]
    EmptySector,
    #[error("not a hull vertex")]
    NotHullVertex,
    #[error("gradient undefined/zero regime: point lies in or on the body")]
    InsideBody,
    #[error("non-constant-width input: profile spread {0:.3e}")]
    NotConstantWidth(f64),
    #[error("self-dual snap did not converge after {0} iterations")]
    SnapDiverged(usize),
    #[error("no feasible start found after {0} rejection samples")]
    NoFeasibleStart(usize),
    #[error("zero-length step at vertex {0}")]
    ZeroStep(usize),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("curve is not a steepest descent curve: violation at ({0}, {1}, {2})")]
    NotSdc(usize, usize, usize),
    #[error("curve leaves the containing body by {0:.3e}")]
    Containment(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
