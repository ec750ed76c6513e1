use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite argument")]
    NonFinite,

    #[error("argument {0} lies on the branch cut (-inf, 0]")]
    BranchCut(Complex64),

    #[error("s = {s} is within {distance:e} of a pole of the kernel symbol")]
    SymbolPole { s: Complex64, distance: f64 },

    #[error("z = {z} collides with the eigenvalue {eigenvalue}")]
    SpectralCollision { z: Complex64, eigenvalue: Complex64 },

    #[error("resolvent family undefined: beta = {beta} must satisfy beta < 1 + alpha = {}", 1.0 + alpha)]
    IllPosed { alpha: f64, beta: f64 },

    #[error("{0} requires a sine basis")]
    BasisMismatch(&'static str),

    #[error("value overflows double precision (log magnitude about {0:.1})")]
    Overflow(f64),

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("need at least {needed} samples in the fit window, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("sample value {0} is not positive")]
    NonPositiveSample(f64),

    #[error("{context}: {source}")]
    Context { context: String, source: Box<Error> },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// The innermost error beneath any added context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn no_convergence(what: &'static str, detail: impl Into<String>) -> Self {
        Error::NonConvergence { what, detail: detail.into() }
    }
}
