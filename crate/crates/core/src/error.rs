use thiserror::Error;

/// Errors raised by the solvers and the experiment driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero pivot at row {0} during tridiagonal elimination")]
    ZeroPivot(usize),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("singular low-rank correction in cyclic solve")]
    SingularCorrection,

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("structure start L/2 is not a mesh node (n_nodes - 1 = {0} is odd)")]
    MisalignedStructure(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unstable time step: courant number {courant:.6} with diffusion number {diffusion:.6}")]
    CflViolation { courant: f64, diffusion: f64 },

    #[error("meshes differ: {0} vs {1} nodes")]
    MeshMismatch(usize, usize),

    #[error("rate fit needs positive data: {0}")]
    NonPositiveData(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("i/o failure on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
