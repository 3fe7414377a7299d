use thiserror::Error;

/// Error type shared by the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("mesh generation failed: {0}")]
    Generation(String),
    #[error("structural error: {0}")]
    Structure(String),
    #[error("degree {degree} out of range for operation `{op}` (dim {dim})")]
    Degree { op: &'static str, degree: usize, dim: usize },
    #[error("mesh format error: {0}")]
    MeshFormat(String),
    #[error("assembly failed: {0}")]
    Assembly(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("rank decision failed: {0}")]
    Rank(String),
    #[error("spectral gap indistinguishable from zero: {0}")]
    SpectralGap(String),
    #[error("audit failure: {0}")]
    Audit(String),
    #[error("fit failure: {0}")]
    Fit(String),
    #[error("input error: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by front ends to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration or parameters.
    Config,
    /// Mesh input, generation or structure problems.
    Mesh,
    /// Solver / numerical failures.
    Solver,
    /// A verification or audit failed.
    Audit,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Parameter(_) | Input(_) => ErrorClass::Config,
            Generation(_) | Structure(_) | Degree { .. } | MeshFormat(_) | Io(_) => {
                ErrorClass::Mesh
            }
            Assembly(_) | Numerical(_) | SpectralGap(_) => ErrorClass::Solver,
            Rank(_) | Audit(_) | Fit(_) => ErrorClass::Audit,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
