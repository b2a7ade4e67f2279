use std::path::PathBuf;

/// Errors produced by the remeshing toolkit.
///
/// Variants are grouped by class so that frontends can map them onto exit
/// codes (see [`Error::class`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{what} exceeds resource guard ({value} > {limit})")]
    Guard {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("coordinate out of domain range: {0}")]
    OutOfRange(String),

    #[error("point lies on the singular locus of the coordinate system: {0}")]
    Singular(String),

    #[error("parameterization fold: {faces} faces flipped, {collapsed} vertex pairs collapsed")]
    Fold { faces: usize, collapsed: usize },

    #[error("underdetermined least-squares system: {rows} samples for {unknowns} unknowns")]
    Underdetermined { rows: usize, unknowns: usize },

    #[error("rank-deficient least-squares system (condition estimate {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("solver breakdown after {iterations} iterations: {reason}")]
    Breakdown { iterations: usize, reason: String },

    #[error("solver did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("flip recovery exhausted at iteration {iteration} after {halvings} time-step halvings")]
    FlipRecoveryExhausted { iteration: usize, halvings: usize },

    #[error("self-intersecting contours: particles {0:?}")]
    SelfIntersection(Vec<usize>),
}

/// Coarse error classes used by frontends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Io,
    Parse,
    Topology,
    Engine,
    Guard,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } => ErrorClass::Io,
            Error::Parse { .. } => ErrorClass::Parse,
            Error::Topology(_) | Error::Fold { .. } => ErrorClass::Topology,
            Error::Guard { .. } => ErrorClass::Guard,
            _ => ErrorClass::Engine,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line: Some(line),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io("<csv output>", io),
            other => Error::InvalidInput(format!("csv: {other:?}")),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
