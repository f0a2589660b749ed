use num_complex::Complex64;
use thiserror::Error;

use crate::rational_algebra::SpherePoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a simple pole of the rational function")]
    NotASimplePole(Complex64),

    #[error("duplicate pole location {0}")]
    DuplicatePole(Complex64),

    #[error("pole at {0} has zero residue")]
    ZeroResidue(Complex64),

    #[error("cannot evaluate at the pole {0}")]
    EvalAtPole(Complex64),

    #[error("initial value {0} is outside the open interval (0, 4)")]
    BadInitialValue(f64),

    #[error("base point {0} is a pole of the form")]
    BasePointIsPole(Complex64),

    #[error("form violates the construction hypotheses: {0}")]
    HypothesesFailed(String),

    #[error("path passes within {distance:e} of the pole {pole}")]
    PathTooCloseToPole { pole: Complex64, distance: f64 },

    #[error("integration step fell below {0:e} without meeting the half-step tolerance")]
    StepUnderflow(f64),

    #[error("hyperbolic metric is degenerate at {0} (phi = 2)")]
    DegenerateHyperbolicPoint(Complex64),

    #[error("grid point {point} lies within {radius} of the singular locus ({what})")]
    GridTouchesSingularity {
        point: Complex64,
        radius: f64,
        what: String,
    },

    #[error("fit annulus around {center} contains the singular point {other}")]
    AnnulusContainsSingularity {
        center: SpherePoint,
        other: SpherePoint,
    },

    #[error("area check needs only conical singularities; {0}")]
    NonConicalSingularityPresent(String),

    #[error("invalid standard-form data: {0}")]
    InvalidCaseData(String),

    #[error("t's - ts' is not a single monomial of degree alpha - 1")]
    NotMonomialIdentity,

    #[error("t's - ts' vanishes identically (mu = 0)")]
    ZeroMu,

    #[error("form does not match a standard pattern: {0}")]
    PatternMismatch(String),

    #[error("residues do not match the standard pattern: {0}")]
    ResidueMismatch(String),

    #[error("invalid cone parameter alpha = {0}")]
    InvalidAlpha(f64),

    #[error("parameter a = {0} is degenerate (must avoid 0 and 1)")]
    DegenerateA(Complex64),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
