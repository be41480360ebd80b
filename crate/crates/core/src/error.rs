use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("term `{term}` has degree {degree}, which exceeds the jet order m = {m}")]
    DegreeOverflow { term: String, degree: u32, m: u32 },

    #[error("signature mismatch: (m={0}, n={1}) vs (m={2}, n={3})")]
    SignatureMismatch(u32, usize, u32, usize),

    #[error("invalid signature: {0}")]
    InvalidSignature(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("diffeomorphism jet has a non-invertible linear part")]
    NotInvertible,

    #[error("jet has nonzero constant term: {0}")]
    NonzeroConstant(String),

    #[error("zero jet has no lowest homogeneous part")]
    ZeroJet,

    #[error("jet has order of vanishing 0")]
    OrderZero,

    #[error("zero ideal")]
    ZeroIdeal,

    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(usize),

    #[error("domain violation: {0}")]
    Domain(String),

    #[error("derivative order {order} exceeds registered smoothness {smoothness} of `{node}`")]
    Smoothness {
        node: String,
        order: u32,
        smoothness: u32,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("jet `{0}` is not a member of the ideal")]
    NotMember(String),

    #[error("allowed direction {0} is not covered by the certificate scope")]
    UncoveredDirection(String),

    #[error("region mismatch: {0}")]
    RegionMismatch(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code for the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::DegreeOverflow { .. } => "degree_overflow",
            Error::SignatureMismatch(..) => "signature_mismatch",
            Error::InvalidSignature(_) => "invalid_signature",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NotInvertible => "not_invertible",
            Error::NonzeroConstant(_) => "nonzero_constant",
            Error::ZeroJet => "zero_jet",
            Error::OrderZero => "order_zero",
            Error::ZeroIdeal => "zero_ideal",
            Error::UnsupportedDimension(_) => "unsupported_dimension",
            Error::Domain(_) => "domain",
            Error::Smoothness { .. } => "smoothness",
            Error::Invalid(_) => "invalid",
            Error::NotMember(_) => "not_member",
            Error::UncoveredDirection(_) => "uncovered_direction",
            Error::RegionMismatch(_) => "region_mismatch",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
