use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown model family `{0}`")]
    UnknownFamily(String),
    #[error("empty site table")]
    EmptySiteTable,
    #[error("tuple arity mismatch: expected {expected} entries, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(
        "memory cap exceeded: {predicted} distinct tuples predicted at X = {scale}, cap is {cap}; \
         use the streaming threshold counters instead"
    )]
    MemoryCapExceeded { scale: u64, predicted: String, cap: usize },

    #[error("scale mismatch: spectrum is at X = {spectrum}, requested X = {requested}")]
    ScaleMismatch { spectrum: u64, requested: u64 },
    #[error("shell half-width must be positive")]
    NonPositiveDelta,
    #[error("empty shell")]
    EmptyShell,
    #[error("macrostate has {found} densities but the model has {expected} observables")]
    MacrostateArity { expected: usize, found: usize },
    #[error("invalid macrostate: {0}")]
    InvalidMacrostate(String),
    #[error("invalid number `{0}`")]
    InvalidNumber(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid scale grid: {0}")]
    InvalidScales(String),
    #[error("all shells empty")]
    AllShellsEmpty,
    #[error("{method} needs at least {needed} points, got {got}")]
    InsufficientPoints { method: &'static str, needed: usize, got: usize },
    #[error("empty schedule family")]
    EmptyFamily,
    #[error("empty tail window")]
    EmptyTail,
    #[error("gap condition never met within tested scales for epsilon = {epsilon}")]
    GapConditionNeverMet { epsilon: String },

    #[error("degenerate lower bound: D↓ at a(1-δ) is zero at X = {scale}")]
    DegenerateLowerBound { scale: u64 },
    #[error("sandwich inequality violated at X = {scale}")]
    SandwichViolated { scale: u64 },

    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: String },
    #[error("vector is not normalized: sum = {sum}")]
    NotNormalized { sum: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no T-transform witness exists: {0}")]
    NotMajorized(String),
    #[error("size {size} exceeds the configured cap {cap}")]
    CapExceeded { size: usize, cap: usize },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("entropy gap must be positive, got {0}")]
    NonPositiveGap(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
