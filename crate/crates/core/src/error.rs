use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// The Floquet eigenvectors have coalesced; the generator is defective.
    #[error(
        "Floquet eigenvectors coalesce (defect = {defect:.6}); use generalized_eigenvector instead"
    )]
    Coalescence { defect: f64 },

    #[error("monodromy is not defective (defect = {defect:.6}, gap = {gap:e})")]
    NotDefective { defect: f64, gap: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Fourier truncation {n_trunc} is below the required minimum {required}")]
    TruncationTooSmall { n_trunc: usize, required: usize },

    #[error("eigensolver did not converge (relative residual {residual:e})")]
    Eigensolver { residual: f64 },

    #[error("closed-form recurrence is singular at resonant index n = {n} (denominator {denominator:e})")]
    NearExceptionalPoint { n: usize, denominator: f64 },

    #[error("evaluation point {re} + {im}i is too close to a pole of the potential")]
    PoleProximity { re: f64, im: f64 },

    #[error("quadrature accuracy not reached: {0}")]
    Accuracy(String),

    #[error("grid spacing {dx} does not resolve the well (need dx <= {max})")]
    Resolution { dx: f64, max: f64 },

    #[error("wave field diverged at t = {t} (norm {norm:e})")]
    Divergence { t: f64, norm: f64 },

    #[error("shaking path leaves the analyticity stripe (max |Im x0| = {max_im}, half-width L = {half_width})")]
    StripeViolation { max_im: f64, half_width: f64 },

    #[error("ambiguous resonance window: {0}")]
    Ambiguous(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
