use thiserror::Error;

/// Errors raised by tensor algebra, thresholding and the solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("SVD failed to converge on spectral slice {slice}")]
    SvdNonConvergence { slice: usize },

    #[error("spectral consistency violated: imaginary residue {residue:e} (limit {limit:e})")]
    SpectralConsistency { residue: f64, limit: f64 },

    #[error("solver diverged at iteration {iteration}: {reason}")]
    Divergence {
        iteration: usize,
        reason: String,
        trace: Box<crate::solver::ConvergenceTrace>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Shape(msg.into()))
}
