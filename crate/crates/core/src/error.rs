use thiserror::Error;

/// Errors raised by the partition algebra, the solvers and the data layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty ground set")]
    EmptyGroundSet,

    #[error("ground set mismatch: {left} vs {right} elements")]
    GroundMismatch { left: usize, right: usize },

    #[error("element {element} out of range for a ground set of size {size}")]
    ElementOutOfRange { element: usize, size: usize },

    #[error("family not pairwise disjoint (element {element} appears twice)")]
    FamilyNotDisjoint { element: usize },

    #[error("invalid block pair ({j1}, {j2}) for a partition with {blocks} blocks")]
    InvalidBlockPair { j1: usize, j2: usize, blocks: usize },

    #[error("not a solution")]
    NotASolution,

    #[error("oracle limit exceeded: ground set of size {size} (limit {limit})")]
    OracleLimitExceeded { size: usize, limit: usize },

    #[error("invalid r-function: {0}")]
    InvalidRFunction(String),

    #[error("measurement length {got} does not match ground set size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite measurement at element {0}")]
    NonFiniteMeasurement(usize),

    #[error("invalid data object: {0}")]
    InvalidDataObject(String),

    #[error("not an arrow: {0}")]
    NotAnArrow(String),

    #[error("invalid group pair ({j1}, {j2}) for {groups} groups")]
    InvalidGroupPair { j1: usize, j2: usize, groups: usize },

    #[error("κ undefined: {0}")]
    KappaUndefined(String),

    #[error("invalid degrees of freedom ({d1}, {d2})")]
    InvalidDegreesOfFreedom { d1: usize, d2: usize },

    #[error("invalid F statistic {0}")]
    InvalidFStatistic(f64),

    #[error("segment length mismatch: {left} vs {right} positions")]
    SegmentLengthMismatch { left: usize, right: usize },

    #[error("position {position} out of range 1..={n}")]
    PositionOutOfRange { position: usize, n: usize },

    #[error("pair not exact")]
    PairNotExact,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("classifier not total: {0}")]
    ClassifierNotTotal(String),

    #[error("e is not a solution at τ")]
    NotASolutionAtSegment,

    #[error("degenerate phenotype: all measurements are equal")]
    DegeneratePhenotype,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
