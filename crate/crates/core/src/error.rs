use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("non-finite complex value ({re}, {im})")]
    NonFinite { re: f64, im: f64 },
    #[error("cannot parse complex literal {0:?}")]
    ParseComplex(String),
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("index must be at least 1")]
    ZeroIndex,
    #[error("explicit sequence must be nonempty")]
    EmptyExplicit,
    #[error("invalid sequence family: {0}")]
    InvalidFamily(String),
    #[error("window must be nonempty")]
    EmptyWindow,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("sign entries must be -1 or +1, found {0}")]
    InvalidSign(i64),
    #[error("x = {0} is outside [0, 1)")]
    OutOfUnitInterval(f64),
    #[error("window length {len} is not aligned to a tower block boundary")]
    NotBlockAligned { len: usize },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("value exceeds exact-arithmetic range: {0}")]
    Overflow(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("window length {len} exceeds enumeration guard {max}")]
    TooLarge { len: usize, max: usize },
    #[error("singular matrix (det = {det})")]
    SingularMatrix { det: f64 },
    #[error("range set is empty")]
    EmptyRange,
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("invalid rectangle: {0}")]
    InvalidRect(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("term {index} has max-norm {norm} > 1")]
    NormTooLarge { index: usize, norm: f64 },
    #[error("terms {first} and {second} are pairable (|c{first} {sign} c{second}| <= 1)")]
    PairablePair {
        first: usize,
        second: usize,
        sign: char,
    },
    #[error("no ratio supplied")]
    NoRatio,
    #[error("epsilon must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("insufficient mass: residual {residual} misses eps {eps} (shortfall {shortfall})")]
    InsufficientMass {
        residual: f64,
        eps: f64,
        shortfall: f64,
    },
    #[error("empty input")]
    Empty,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RatioError {
    #[error("singular matrix (det = {det})")]
    SingularMatrix { det: f64 },
    #[error("blocks do not partition the window: {0}")]
    NotAPartition(String),
    #[error("need at least 4 directions, got {0}")]
    TooFewDirections(usize),
    #[error("ratios must be distinct")]
    IdenticalRatios,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoranError {
    #[error("contraction {0} is not in (0, 1)")]
    BadContraction(f64),
    #[error("level {level} has {count} maps; at least 2 are required")]
    TooFewMaps { level: usize, count: usize },
    #[error("system has no levels")]
    NoLevels,
    #[error("depth {depth} exceeds the {levels} stored levels")]
    DepthExceedsLevels { depth: usize, levels: usize },
    #[error("enumeration of {count} addresses exceeds guard {max}")]
    TooManyPoints { count: u128, max: u128 },
    #[error("delta {0} is not in (0, 1)")]
    BadDelta(f64),
    #[error("eta schedule has {got} entries, need {need}")]
    ShortEta { got: usize, need: usize },
    #[error("insufficient mass at level {level}: shortfall {shortfall}")]
    InsufficientMass { level: usize, shortfall: f64 },
    #[error("bracket violation at level {level}: {inequality} (value {value})")]
    BracketViolation {
        level: usize,
        inequality: String,
        value: f64,
    },
    #[error("target escapes at level {level}: no image contains the pullback {point}")]
    TargetEscapes {
        level: usize,
        point: crate::Complex2,
    },
    #[error("invalid rectangle: {0}")]
    InvalidRect(String),
    #[error("ratios {first} and {second} give collinear directions")]
    DegenerateRatios { first: f64, second: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("horizon must be at least 10, got {0}")]
    HorizonTooSmall(u64),
    #[error("invalid index set: {0}")]
    InvalidSet(String),
    #[error("upper density {upper} is not below eps {eps}")]
    DensityTooHigh { upper: f64, eps: f64 },
    #[error("eps must lie in (0, 1), got {0}")]
    BadEps(f64),
    #[error(transparent)]
    Series(#[from] SeriesError),
}
