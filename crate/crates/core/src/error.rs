use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("duplicate image path `{0}`")]
    DuplicatePath(String),
    #[error("MOS {mos} of `{path}` lies outside the declared range [{min}, {max}]")]
    MosOutOfDeclaredRange {
        path: String,
        mos: f64,
        min: f64,
        max: f64,
    },
    #[error("split fractions must be non-negative and sum to 1")]
    BadFractions,
    #[error("split `{0}` would be empty")]
    DegenerateSplit(&'static str),
    #[error("image of {width}x{height} is smaller than the required {required}")]
    ImageTooSmall {
        width: usize,
        height: usize,
        required: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("correlation is undefined for constant input")]
    ConstantInput,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("expected {expected} feature columns, got {got}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("corrupt model: {0}")]
    CorruptModel(String),
    #[error("unsupported model format version {found} (supported: {supported})")]
    VersionMismatch { found: u32, supported: u32 },
}
