use thiserror::Error;

/// Errors surfaced by geometry, measure, solver and ensemble operations.
#[derive(Error, Debug)]
pub enum Error {
    #[error("point at infinity has no chart-0 coordinate")]
    PointAtInfinity,

    #[error("measure support touches infinity; operation requires chart-0 support")]
    SupportAtInfinity,

    #[error("coincident points (chordal distance {dist:.3e} below collision tolerance)")]
    Collision { dist: f64 },

    #[error("quadrature resolution too coarse: {0}")]
    Resolution(String),

    #[error("solver did not converge after {iters} iterations (last gap {gap:.3e})")]
    NoConvergence { iters: usize, gap: f64 },

    #[error("matrix not positive definite (pivot failed at index {rank} of {dim})")]
    NotPositiveDefinite { rank: usize, dim: usize },

    #[error("root finder failed: {0}")]
    RootFinding(String),

    #[error("zero polynomial has no roots")]
    ZeroPolynomial,

    #[error("empty region: {0}")]
    EmptyRegion(String),

    #[error("invalid descriptor: {0}")]
    Descriptor(String),
}

pub type Result<T> = std::result::Result<T, Error>;
