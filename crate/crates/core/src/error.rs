use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid {rows}x{cols} with mesh size {h}: {reason}")]
    InvalidGrid {
        rows: usize,
        cols: usize,
        h: f64,
        reason: &'static str,
    },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("grid mismatch: {left} vs {right}")]
    GridMismatch { left: String, right: String },

    #[error("spectral symbol has a non-positive entry {value} at ({row}, {col})")]
    NonPositiveSymbol { row: usize, col: usize, value: f64 },

    #[error("non-finite values in field: {0}")]
    NonFinite(String),

    #[error("non-finite values after {step} at outer iteration {iter}")]
    SolverDiverged { step: &'static str, iter: usize },

    #[error("fixed-point iteration did not converge in {iters} iterations (last step {last_step:e})")]
    FixedPointStalled { iters: usize, last_step: f64 },

    #[error("degenerate iterate: {0}")]
    DegenerateIterate(&'static str),

    #[error("invalid pattern geometry: {0}")]
    InvalidGeometry(String),

    #[error("unsupported image: {0}")]
    UnsupportedImage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Image(#[from] image::ImageError),
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a finite positive number",
        })
    }
}

pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be a finite non-negative number",
        })
    }
}
