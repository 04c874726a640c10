use thiserror::Error;

/// Errors raised by the numerical and combinatorial routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular (smallest normalized singular value {0:e})")]
    SingularInput(f64),
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("no gap of index {p}: ratio {ratio}")]
    NoGap { p: usize, ratio: f64 },
    #[error("total rank {total} exceeds ambient dimension {ambient}")]
    RankOverflow { total: usize, ambient: usize },
    #[error("unknown letter {0}")]
    UnknownLetter(u32),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("ball of radius {radius} has {size} elements, budget is {budget}")]
    BallTooLarge {
        radius: usize,
        size: u128,
        budget: u128,
    },
    #[error("no gap of index {p} along ray prefix of length {prefix}")]
    NoGapAlongRay { p: usize, prefix: usize },
    #[error("no Anosov certificate for index {0}")]
    NotCertified(usize),
    #[error("ray of depth {have} too short, need {need}")]
    RayTooShort { have: usize, need: usize },
    #[error("points not transverse (margin {0:e})")]
    NotTransverse(f64),
    #[error("axes of the generators coincide")]
    DegenerateAxes,
    #[error("weights do not form an sl2 module: {0}")]
    NotAnSl2Module(String),
    #[error("degenerate triple: {0}")]
    DegenerateTriple(String),
    #[error("intersection has rank {got}, expected {expected}")]
    EmptyIntersection { got: usize, expected: usize },
    #[error("regression window has {0} usable bins, need 4")]
    WindowTooShort(usize),
    #[error("no scales between diameter {diameter:e} and error floor {floor:e}")]
    ScaleRangeEmpty { diameter: f64, floor: f64 },
    #[error("empty shadow for {0}")]
    EmptyShadow(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
