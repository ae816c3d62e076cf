use thiserror::Error;

#[derive(Debug, Error)]
pub enum GuideError {
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("polygon is not convex")]
    NonConvex,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("index {index} out of range for tree of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("guidance returned an empty selection distribution")]
    EmptyDistribution,
    #[error("could not sample {wanted} valid vertices within {attempts} attempts")]
    VertexSampling { wanted: usize, attempts: usize },
    #[error("no free cells in occupancy grid")]
    NoFreeCells,
    #[error("empty skeleton")]
    EmptySkeleton,
    #[error("empty path database")]
    EmptyDatabase,
    #[error("generator produced no solvable instance within {0} attempts")]
    Unsolvable(usize),
    #[error("goal cell is not valid in the oracle grid")]
    InvalidGoalCell,
    #[error("metric mode `{0}` requires an explicit selection distribution")]
    MissingDistribution(String),
    #[error("unknown {kind} `{name}`; valid names: {valid}")]
    UnknownName { kind: &'static str, name: String, valid: String },
    #[error("malformed oracle file: {0}")]
    OracleFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, GuideError>;
