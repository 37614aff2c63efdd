use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid regularity: {0}")]
    InvalidRegularity(String),
    #[error("invalid index: {0}")]
    InvalidIndex(String),
    #[error("unsupported derivative order {0}")]
    UnsupportedOrder(usize),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid multiplicity: {0}")]
    InvalidMultiplicity(String),
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),
    #[error("control net construction failed: {0}")]
    NetConstructionFailed(String),
    #[error("singular jacobian: {0}")]
    SingularJacobian(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("no C1 space: {0}")]
    NoC1Space(String),
    #[error("assembly failure: {0}")]
    Assembly(String),
    #[error("load error: {0}")]
    Load(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("specification error: {0}")]
    Spec(String),
    #[error("domain is not star-shaped: {0}")]
    NotStarShaped(String),
}

impl Error {
    /// Stable machine-readable tag for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidRegularity(_) => "invalid-regularity",
            Error::InvalidIndex(_) => "invalid-index",
            Error::UnsupportedOrder(_) => "unsupported-order",
            Error::InvalidWeights(_) => "invalid-weights",
            Error::InvalidMultiplicity(_) => "invalid-multiplicity",
            Error::InvalidKnots(_) => "invalid-knots",
            Error::NetConstructionFailed(_) => "net-construction-failed",
            Error::SingularJacobian(_) => "singular-jacobian",
            Error::Topology(_) => "topology-error",
            Error::DegreeMismatch(_) => "degree-mismatch",
            Error::InvalidGeometry(_) => "invalid-geometry",
            Error::DegenerateCurve(_) => "degenerate-curve",
            Error::NotApplicable(_) => "not-applicable",
            Error::Config(_) => "config-error",
            Error::NoC1Space(_) => "no-c1-space",
            Error::Assembly(_) => "assembly-failure",
            Error::Load(_) => "load-error",
            Error::Solver(_) => "solver-error",
            Error::Spec(_) => "spec-error",
            Error::NotStarShaped(_) => "not-star-shaped",
        }
    }
}
