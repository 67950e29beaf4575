use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate lattice: basis determinant {det:e}")]
    DegenerateLattice { det: f64 },

    #[error("tube does not embed: r*kappa = {0} must be < 1")]
    Embedding(f64),

    #[error("spin structure (0,0) carries harmonic spinors; use the trivial-structure bound")]
    TrivialSpin,

    #[error("conformal factor must be strictly positive, found {value} at sample {index}")]
    NonPositiveFactor { index: usize, value: f64 },

    /// Adaptive refinement gave up; `lo..hi` is the worst remaining subinterval.
    #[error("quadrature did not converge: worst subinterval [{lo}, {hi}] has error estimate {error:e}")]
    Nonconvergence { lo: f64, hi: f64, error: f64 },

    #[error("integrand returned non-finite value {value} at {at}")]
    NonFinite { at: f64, value: f64 },

    #[error("root bracketing failed for target {target}")]
    RootBracket { target: f64 },
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Nonconvergence { .. } | Error::NonFinite { .. } | Error::RootBracket { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
