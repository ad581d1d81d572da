use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("matrix is singular to working precision (pivot {pivot_index}: |pivot| = {pivot:.3e}, max |pivot| = {max_pivot:.3e})")]
    Singular {
        pivot_index: usize,
        pivot: f64,
        max_pivot: f64,
    },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("eigensolver did not converge after {restarts} restarts (worst Ritz residual {residual:.3e})")]
    EigenFailure { restarts: usize, residual: f64 },

    #[error("empty observation region: {0}")]
    EmptyRegion(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("operator invalid: {0}")]
    OperatorInvalid(String),

    #[error("inadmissible data: {0}")]
    Inadmissible(Admissibility),

    #[error("root not bracketed in [{lo:.3e}, {hi:.3e}]: discrepancy {e_lo:.6e} .. {e_hi:.6e} vs target {target:.6e}")]
    Bracket {
        lo: f64,
        hi: f64,
        e_lo: f64,
        e_hi: f64,
        target: f64,
    },

    #[error("nonsmooth point: ||(I-P)q|| = {0:.3e}")]
    Nonsmooth(f64),

    #[error("iteration cap of {iterations} reached (last gradient norm {gradient_norm:.3e})")]
    IterationCap {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("fixed-point iteration diverged: {0}")]
    Divergence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which inequality of `||g_perp|| < delta < ||g||` fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    /// `||g|| <= delta`: the data is below the noise level.
    BelowNoiseLevel { g_norm: f64, delta: f64 },
    /// `||g_perp|| >= delta`: the dual functional is not coercive.
    PerpTooLarge { perp_norm: f64, delta: f64 },
}

impl std::fmt::Display for Admissibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Admissibility::BelowNoiseLevel { g_norm, delta } => write!(
                f,
                "data below noise level (||g|| = {g_norm:.6e} <= delta = {delta:.6e})"
            ),
            Admissibility::PerpTooLarge { perp_norm, delta } => write!(
                f,
                "range-complement component too large, functional not coercive (||g_perp|| = {perp_norm:.6e} >= delta = {delta:.6e})"
            ),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
