use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: search space of size {size} exceeds the cap {cap}")]
    CapExceeded { what: &'static str, size: String, cap: u64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid factor graph: {0}")]
    InvalidNfg(String),

    #[error("unknown edge `{0}`")]
    UnknownEdge(String),

    #[error("unknown factor `{0}`")]
    UnknownFactor(String),

    #[error("symbol {symbol} is outside the alphabet of edge `{edge}`")]
    OutOfAlphabet { edge: String, symbol: u32 },

    #[error("distribution puts mass on a configuration with zero global value")]
    SupportOnZeroMass,

    #[error("the factor graph has no valid configuration")]
    EmptyCode,

    #[error("sequence member {0} is not a valid configuration")]
    InvalidMember(usize),

    #[error("configuration is not valid on the cover")]
    InvalidConfiguration,

    #[error("M * beta is not integral for M = {0}")]
    NonIntegralType(u32),

    #[error("pseudo-marginals violate the local marginal polytope: {0}")]
    InconsistentBeta(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("pseudo-marginal puts mass on a zero entry of factor `{0}`")]
    SupportOnZeroFactor(String),

    #[error("cover configuration has zero global value")]
    ZeroGlobalValue,

    #[error("pseudo-marginal entry {value:e} at {location} is not strictly interior")]
    BoundaryBeta { location: String, value: f64 },

    #[error("omega is outside the fundamental polytope: {0}")]
    InfeasibleOmega(String),

    #[error("edge `{0}` does not have a binary alphabet")]
    NonBinaryAlphabet(String),

    #[error("not a cycle code: {0}")]
    NotCycleCode(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("linear program failed: {0}")]
    LpFailure(String),

    #[error("the factor graph does not represent a code with one configuration per codeword: {0}")]
    NotSingleFiber(String),

    #[error("unsupported structure: {0}")]
    Unsupported(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}
