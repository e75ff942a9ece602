use std::path::PathBuf;

/// Errors produced anywhere in the planner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid derivative order {0} (expected 0, 1 or 2)")]
    InvalidOrder(usize),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("singular parameter {0}: first derivative vanishes")]
    SingularParameter(f64),
    #[error("knot multiplicity would exceed degree at u = {0}")]
    MultiplicityOverflow(f64),
    #[error("degenerate hull: input points are collinear or too few")]
    DegenerateHull,
    #[error("invalid collision state: {0}")]
    InvalidCollisionState(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(usize, usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid cut: {0}")]
    InvalidCut(String),
    #[error("curve initialization failed: {0}")]
    InitializationFailed(String),
    #[error("non-simple polygon: {0}")]
    NonSimplePolygon(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("plan does not match mesh: {0}")]
    PlanMismatch(String),
    #[error("planning aborted: {0}")]
    Aborted(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
