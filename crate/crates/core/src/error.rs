use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoarseError {
    #[error("distance table has {rows} rows (row {bad_row} has {cols} entries) but there are {points} points")]
    DimensionMismatch {
        points: usize,
        rows: usize,
        bad_row: usize,
        cols: usize,
    },
    #[error("unknown point label `{0}`")]
    UnknownPoint(String),
    #[error("point index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is disconnected: no path between `{0}` and `{1}`")]
    Disconnected(String, String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown model family `{0}`")]
    UnknownFamily(String),
    #[error("invalid tower: {0}")]
    InvalidTower(String),
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("empty space")]
    EmptySpace,
    #[error("query {query} exceeds the tabulated range (largest scale {max})")]
    OutOfRange { query: f64, max: f64 },
    #[error("not {c}-coarsely connected: no {c}-path between `{from}` and `{to}`")]
    NotConnected { c: f64, from: String, to: String },
    #[error("{} points unreachable from `{base}` at step {c}: {points:?}", points.len())]
    Unreachable { base: String, c: f64, points: Vec<String> },
    #[error("sequence reaches only distance {reach} from its start; needs {required}")]
    SequenceBounded { reach: f64, required: f64 },
    #[error("no cover ball retains members of the sequence tail at depth {depth}")]
    BranchLost { depth: usize },
    #[error("asymptotic product is empty at tolerance {0}")]
    EmptyProduct(f64),
    #[error("maps incompatible at `{point}`: radius gap {gap} exceeds declared slack {slack}")]
    Incompatible { point: String, gap: f64, slack: f64 },
    #[error("no candidate within slack {c} of radius for `{point}`; try a larger c")]
    NoCandidate { point: String, c: f64 },
    #[error("cone levels start at 1; got level 0")]
    ZeroLevel,
    #[error("triangle inequality fails at ({0}, {1}, {2})")]
    TriangleFailure(String, String, String),
    #[error("parameter grid must contain both endpoints 0 and 1")]
    GridEndpoints,
    #[error("parameter {0} is not on the family grid")]
    ParamNotOnGrid(String),
    #[error("selector places `{point}` at level {level}, outside the product")]
    SelectorOutside { point: String, level: u32 },
    #[error("no grid parameter other than {t} lies within {c}/{level} of it")]
    GridTooCoarse { t: String, c: f64, level: usize },
    #[error("iterate cap {0} exceeded")]
    IterateCap(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoarseError>;
