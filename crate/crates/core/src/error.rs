use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared across the crate. Each variant corresponds to a
/// violated precondition of some operation, never to an internal panic.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("point {0} lies outside the open unit disc")]
    OutsideUnitDisc(Complex64),

    #[error("z = {0} coincides with a retained singular center")]
    AtSingularCenter(Complex64),

    #[error("tail bound undefined: {0} lies on a tail segment")]
    OnTailSegment(Complex64),

    #[error("invalid plateau edge {0}: must satisfy 0 < s < 1/3")]
    InvalidPlateauEdge(f64),

    #[error("fiber over z = {0} is degenerate (point fiber)")]
    DegenerateFiber(Complex64),

    #[error("w = {0} lies inside or on the obstacle")]
    InsideObstacle(Complex64),

    #[error("m = {0} lies outside the chart range")]
    OutsideChartRange(Complex64),

    #[error("empty path")]
    EmptyPath,

    #[error("path is not closed (first and last vertices must coincide)")]
    NonClosedPath,

    #[error("path vertex or segment passes through the branch point")]
    PathThroughBranchPoint,

    #[error("segment subdivision limit exceeded during log continuation")]
    SubdivisionLimit,

    #[error("initial branch {branch} does not exponentiate to the first vertex {vertex}")]
    BranchMismatch { branch: Complex64, vertex: Complex64 },

    #[error("jet has vanishing first derivative at {0}")]
    CriticalJet(Complex64),

    #[error("jet base points do not match: {0}")]
    JetMismatch(String),

    #[error("degenerate Moebius coefficients: ad - bc = 0")]
    SingularMobius,

    #[error("log chart undefined at w = 0")]
    LogChartAtOrigin,

    #[error("finite-difference stencil touched a non-finite field value")]
    SingularStencil,

    #[error("Richardson consistency check failed: {0}")]
    RichardsonFailure(String),

    #[error("degree {0} exceeds the supported maximum {1}")]
    DegreeTooLarge(usize, usize),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid bisection bracket: {0}")]
    InvalidBracket(String),

    #[error("unknown candidate family '{0}'")]
    UnknownFamily(String),

    #[error("{0}")]
    Invalid(String),
}
