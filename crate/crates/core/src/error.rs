use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point leaves the chart (|x4| = {0:e} relative to the lift)")]
    ChartOverflow(f64),
    #[error("cone contains a line")]
    DegenerateCone,
    #[error("boundary matrix has rank != 1 (det/norm^2 = {0:e})")]
    RankError(f64),
    #[error("element is not hyperbolic (|tr| = {0})")]
    NotHyperbolic(f64),
    #[error("Fenchel-Nielsen construction failed: {0}")]
    ConstructionError(String),
    #[error("twist curve {0} is not a pants curve of the fixed decomposition")]
    UnsupportedCurve(String),
    #[error("degenerate triangle with sides ({0}, {1}, {2})")]
    DegenerateTriangle(f64, f64, f64),
    #[error("quadrilateral around edge {0} is not strictly convex")]
    NonConvexQuad(usize),
    #[error("edge {0} is glued to the same triangle on both sides")]
    SelfGluedEdge(usize),
    #[error("metrics live on different triangulations")]
    CombinatoricsMismatch,
    #[error("invalid triangulation: {0}")]
    InvalidTriangulation(String),
    #[error("degenerate input for hull: {0}")]
    DegenerateInput(String),
    #[error("hull face is not spacelike: {0}")]
    NonSpacelikeFace(String),
    #[error("hull not stable under truncation: {0}")]
    UnstableHull(String),
    #[error("face labels do not glue to a closed surface: {0}")]
    QuotientError(String),
    #[error("configuration is not in convex position: {0}")]
    NotConvex(String),
    #[error("no flip sequence of length <= {0} aligns the triangulations")]
    AlignmentFailure(usize),
    #[error("solver diverged: {0}")]
    Diverged(String),
    #[error("target violates solver preconditions: {0}")]
    InfeasibleTarget(String),
    #[error("celluation jump could not be resolved at s = {0}")]
    CelluationJump(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ChartOverflow(_) => "ChartOverflow",
            Error::DegenerateCone => "DegenerateCone",
            Error::RankError(_) => "RankError",
            Error::NotHyperbolic(_) => "NotHyperbolic",
            Error::ConstructionError(_) => "ConstructionError",
            Error::UnsupportedCurve(_) => "UnsupportedCurve",
            Error::DegenerateTriangle(..) => "DegenerateTriangle",
            Error::NonConvexQuad(_) => "NonConvexQuad",
            Error::SelfGluedEdge(_) => "SelfGluedEdge",
            Error::CombinatoricsMismatch => "CombinatoricsMismatch",
            Error::InvalidTriangulation(_) => "InvalidTriangulation",
            Error::DegenerateInput(_) => "DegenerateInput",
            Error::NonSpacelikeFace(_) => "NonSpacelikeFace",
            Error::UnstableHull(_) => "UnstableHull",
            Error::QuotientError(_) => "QuotientError",
            Error::NotConvex(_) => "NotConvex",
            Error::AlignmentFailure(_) => "AlignmentFailure",
            Error::Diverged(_) => "Diverged",
            Error::InfeasibleTarget(_) => "InfeasibleTarget",
            Error::CelluationJump(_) => "CelluationJump",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Parse(_) => "Parse",
        }
    }
}
