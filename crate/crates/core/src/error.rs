use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // complex_fn
    #[error("product of two functions carrying log terms is not representable")]
    UnrepresentableProduct,
    #[error("evaluation at z = 0 of a function with a pole or log term")]
    PoleAtZero,
    #[error("invalid coefficient literal `{0}`")]
    BadCoefficient(String),

    // grassmann
    #[error("plane basis vectors are (nearly) parallel")]
    DegeneratePlane,
    #[error("point is not on the quadric Q2")]
    NotOnQuadric,

    // surface
    #[error("surface is not conformal: f1'f2' + f3'f4' = {0}")]
    NotConformal(String),
    #[error("coordinate {0} is multivalued: its log coefficients do not pair up")]
    MultiValued(usize),
    #[error("puncture list mismatch: {0}")]
    PunctureMismatch(String),
    #[error("surface end is not complete: {0}")]
    NotComplete(String),
    #[error("end profile is ambiguous: {0}")]
    AmbiguousProfile(String),

    // curvature
    #[error("quadrature did not converge (achieved error estimate {0:.3e})")]
    QuadratureNotConverged(f64),
    #[error("end data inconsistent with the degree formula: {0}")]
    InconsistentEnds(String),
    #[error("point {0} is a puncture")]
    PuncturePoint(String),
    #[error("the surface is not immersed at {0}")]
    NonImmersionPoint(String),
    #[error("surface is holomorphic for a parallel complex structure; bound not applicable")]
    HolomorphicSurface,

    // link
    #[error("radial root-finding failed at theta = {0}")]
    RootFindFailed(f64),
    #[error("knot sample is not transverse to the sphere (radial speed {0:.3e}); increase R")]
    NotTransverse(f64),
    #[error("braid did not stabilize: {0}")]
    NoStabilization(String),
    #[error("axis coordinate argument is not monotone along the knot")]
    NonMonotoneAxis,
    #[error("degenerate crossing at braid time {0:.6} (strands meet in R^4)")]
    DegenerateCrossing(f64),
    #[error("crossing count {crossings} disagrees with winding count {winding}")]
    CrossValidationMismatch { crossings: i64, winding: i64 },
    #[error("curves too close for the linking integral (distance {0:.3e})")]
    CurvesTooClose(f64),
    #[error("push-off direction lies in a tangent plane at infinity")]
    XInTangentPlane,

    // knots
    #[error("bad braid token `{0}`")]
    BadBraidToken(String),
    #[error("braid closure is not a knot ({0} components)")]
    ClosureNotAKnot(usize),
    #[error("Alexander normalization failed: {0}")]
    NormalizationFailed(String),

    // double_points
    #[error("beta must be nonzero")]
    BetaZero,
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),
    #[error("tangent planes at the double point are not transverse")]
    TangentPlanesNotTransverse,

    // document
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown gallery fixture `{0}`")]
    UnknownFixture(String),
}

impl Error {
    /// CLI exit code class: 1 mathematical, 2 usage/parse, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            Parse { .. } | UnknownFixture(_) | BadCoefficient(_) | BadBraidToken(_) => 2,
            QuadratureNotConverged(_)
            | RootFindFailed(_)
            | NotTransverse(_)
            | NoStabilization(_)
            | NonMonotoneAxis
            | DegenerateCrossing(_)
            | CrossValidationMismatch { .. }
            | CurvesTooClose(_) => 3,
            _ => 1,
        }
    }
}
