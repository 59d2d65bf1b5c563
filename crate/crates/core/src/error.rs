use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the toolkit.
///
/// Variants are grouped loosely by whether they describe bad input data or a
/// numerical failure; [`Error::is_numerical`] makes that split explicit for
/// the command line.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("distance matrix diagonal must be zero (entry {index} is {value})")]
    BadDiagonal { index: usize, value: f64 },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("random projection density must lie in (0, 1], got {0}")]
    BadDensity(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input")]
    EmptyInput,

    #[error("graph has no edge weight; modularity undefined")]
    EmptyGraph,

    #[error("instance too large for exhaustive search: n = {n} > {max}")]
    TooLarge { n: usize, max: usize },

    #[error("sentence has {len} words, fewer than the n-gram order {order}")]
    TooShort { len: usize, order: usize },

    #[error("corpus has no usable sentence")]
    EmptyCorpus,

    #[error("realizations have different column counts ({0} and {1})")]
    MixedK(usize, usize),

    #[error("label {label} outside 1..={h} (need h >= 2)")]
    BadLabelRange { label: usize, h: usize },

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("training produced non-finite parameters in epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// True for failures of a numerical method rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::NotPsd(_) | Error::Diverged { .. }
        )
    }
}
