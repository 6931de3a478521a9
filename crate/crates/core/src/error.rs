use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hbar must be positive, got {0}")]
    NonPositiveHbar(f64),
    #[error("Gaussian width s must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("hbar^2 - calB*theta = {gap:e} lies inside the degeneracy tolerance band; refusing to classify")]
    AmbiguouslyDegenerate { gap: f64 },
    #[error("group labels give rho*alpha = 0; deformation parameters are undefined")]
    DegenerateLabel,
    #[error("operation requires generic parameters (hbar^2 != calB*theta)")]
    DegenerateParams,
    #[error("degenerate parameters need theta != 0")]
    ZeroTheta,
    #[error("parameter kind does not match the requested construction: {0}")]
    KindMismatch(&'static str),
    #[error("kernel variant {variant} cannot be used with {kind} parameters")]
    VariantParamsMismatch {
        variant: &'static str,
        kind: &'static str,
    },
    #[error("operation requires a Dirac measure")]
    NonDiracMeasure,

    #[error("syntax error at position {pos}: {msg}")]
    SyntaxError { pos: usize, msg: String },
    #[error("unknown variable `{name}` at position {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("symbol chart mismatch: expected {expected}, found {found}")]
    ChartMismatch { expected: String, found: String },
    #[error("point has dimension {found}, chart expects {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadrature needs at least {min} nodes per dimension, got {got}")]
    BadNodeCount { got: usize, min: usize },
    #[error("bad cutoff: {0}")]
    BadCutoff(String),
    #[error("operators live on different bases")]
    BasisMismatch,
    #[error("cutoff N = {n} too small; need at least {needed}")]
    CutoffTooSmall { n: usize, needed: usize },
    #[error("Taylor series in (B, T) does not converge at |B*T| = {0} >= 1")]
    NotExpandable(f64),

    #[error("malformed file: {0}")]
    Format(String),
}
