use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("branch index not fixed for a multivalued subexpression")]
    BranchUnset,
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("expansion is not Laurent at this center: {0}")]
    EssentialOrBranch(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("singular matrix (|det| = {0:e})")]
    SingularMatrix(f64),
    #[error("not an end: {0}")]
    NotAnEnd(String),
    #[error("irregular end: {0}")]
    IrregularEnd(String),
    #[error("continuation failure: {0}")]
    ContinuationFailure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resonance in series recursion at j = {0}")]
    ResonanceError(usize),
    #[error("inadmissible pole: {0}")]
    BadPole(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("critical point: {0}")]
    CriticalPoint(String),
    #[error("path passes through a singularity: {0}")]
    PathThroughSingularity(String),
    #[error("mesh quality: {0}")]
    MeshQuality(String),
    #[error("truncation disks overlap: {0}")]
    DisjointnessViolation(String),
    #[error("assembly: {0}")]
    AssemblyError(String),
    #[error("factorization breakdown at row {row} (retry shift {shift:e})")]
    FactorizationBreakdown { row: usize, shift: f64 },
    #[error("not converged: {0}")]
    NotConverged(String),
    #[error("scene: {0}")]
    Scene(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
