use thiserror::Error;

/// Broad failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad parameters, malformed files, mismatched grids.
    Input,
    /// Singularities, vanishing denominators, overflow, ODE breakdown.
    Numerical,
    /// A residual or consistency check exceeded its tolerance.
    Tolerance,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("derivative order ({kx}, {ky}) not supported: total order must be <= 3")]
    InvalidOrder { kx: usize, ky: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value at node ({i}, {j}) = ({x}, {y})")]
    NonFinite { i: usize, j: usize, x: f64, y: f64 },
    #[error("singular locus: {0}")]
    Singular(String),
    #[error("{what} vanishes at node ({i}, {j})")]
    Vanishing { what: String, i: usize, j: usize },
    #[error("flow breakdown at {at}: {reason}")]
    FlowBreakdown { at: f64, reason: String },
    #[error("overflow while integrating at node ({i}, {j})")]
    Overflow { i: usize, j: usize },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),
    #[error("bad field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidGrid(_)
            | Error::GridMismatch
            | Error::InvalidOrder { .. }
            | Error::InvalidParameter(_)
            | Error::Format(_)
            | Error::Io(_) => ErrorKind::Input,
            Error::NonFinite { .. }
            | Error::Singular(_)
            | Error::Vanishing { .. }
            | Error::FlowBreakdown { .. }
            | Error::Overflow { .. }
            | Error::Degenerate(_) => ErrorKind::Numerical,
            Error::Tolerance(_) => ErrorKind::Tolerance,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
