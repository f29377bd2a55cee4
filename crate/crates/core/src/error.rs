use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("spectral function produced a non-finite value at eigenvalue {eigenvalue}")]
    SpectralFunction { eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample {index} has zero norm")]
    DegenerateSample { index: usize },

    #[error("pair ({0}, {1}) appears in both must-link and cannot-link sets")]
    InconsistentConstraints(usize, usize),

    #[error("graph kernel is singular: r(λ) = 0 at eigenvalue {eigenvalue}")]
    SingularGraphKernel { eigenvalue: f64 },

    #[error("kernel matrix is not positive semidefinite: leading eigenvalue {eigenvalue} (λ_max = {max})")]
    NotPsd { eigenvalue: f64, max: f64 },

    #[error("all mixture traces are zero")]
    DegenerateMixture,

    #[error("non-finite polynomial features (order {order}); rescale the data before fitting")]
    Overflow { order: usize },

    #[error("only {available} nonzero eigenvalues available, {requested} requested")]
    RankDeficientEmbedding { available: usize, requested: usize },

    #[error("generation failed: {0}")]
    Generation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// Stable name of the variant, used in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidMatrix(_) => "InvalidMatrix",
            Error::SpectralFunction { .. } => "SpectralFunctionError",
            Error::Dimension(_) => "DimensionError",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::DegenerateSample { .. } => "DegenerateSample",
            Error::InconsistentConstraints(..) => "InconsistentConstraints",
            Error::SingularGraphKernel { .. } => "SingularGraphKernel",
            Error::NotPsd { .. } => "NotPSD",
            Error::DegenerateMixture => "DegenerateMixture",
            Error::Overflow { .. } => "OverflowError",
            Error::RankDeficientEmbedding { .. } => "RankDeficientEmbedding",
            Error::Generation(_) => "GenerationError",
            Error::Format(_) => "FormatError",
            Error::Parse { .. } => "ParseError",
            Error::Io(_) => "IoError",
        }
    }

    /// True for errors caused by the input data rather than the solvers.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Dimension(_)
                | Error::DegenerateSample { .. }
                | Error::InconsistentConstraints(..)
                | Error::Format(_)
                | Error::Parse { .. }
                | Error::Io(_)
        )
    }
}
