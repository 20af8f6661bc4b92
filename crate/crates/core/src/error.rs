use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// Successive refinements (or the extended-domain truncation check)
    /// still disagree beyond the configured relative tolerance.
    #[error("quadrature did not converge: last estimate {last:e}, previous {previous:e}")]
    NonConvergence { last: f64, previous: f64 },

    #[error("degenerate normalization baseline {0:e}")]
    DegenerateBaseline(f64),

    #[error("no interior peak: maximum sits at bracket endpoint w0/r0 = {at}")]
    NoInteriorPeak { at: f64 },

    #[error("curve does not fall below half maximum inside the bracket")]
    NoHalfMaximum,

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("separation {d} outside valid range [0, {max}]")]
    SeparationOutOfRange { d: f64, max: f64 },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("{} sweep point(s) failed, first at w0/r0 = {}: {}", failures.len(), failures[0].0, failures[0].1)]
    SweepFailed { failures: Vec<(f64, Error)> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the error (or any aggregated sweep failure) is a quadrature
    /// non-convergence.
    pub fn is_non_convergence(&self) -> bool {
        match self {
            Error::NonConvergence { .. } => true,
            Error::SweepFailed { failures } => failures.iter().any(|(_, e)| e.is_non_convergence()),
            _ => false,
        }
    }
}
