//! Errors carrying the process exit code.

use csc_forge::Error;

pub const EXIT_PARSE: u8 = 1;
pub const EXIT_HYPOTHESES: u8 = 2;
pub const EXIT_GEOMETRY: u8 = 3;
pub const EXIT_VERIFICATION: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(EXIT_PARSE, message)
    }

    pub fn from_core(e: Error) -> Self {
        Self::new(exit_code(&e), e.to_string())
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_)
        | Error::BadInitialValue(_)
        | Error::BasePointIsPole(_)
        | Error::InvalidCaseData(_)
        | Error::InvalidAlpha(_)
        | Error::DegenerateA(_) => EXIT_PARSE,
        Error::NotASimplePole(_)
        | Error::DuplicatePole(_)
        | Error::ZeroResidue(_)
        | Error::HypothesesFailed(_)
        | Error::NonConicalSingularityPresent(_)
        | Error::NotMonomialIdentity
        | Error::ZeroMu
        | Error::PatternMismatch(_)
        | Error::ResidueMismatch(_) => EXIT_HYPOTHESES,
        Error::EvalAtPole(_)
        | Error::PathTooCloseToPole { .. }
        | Error::StepUnderflow(_)
        | Error::DegenerateHyperbolicPoint(_)
        | Error::GridTouchesSingularity { .. }
        | Error::AnnulusContainsSingularity { .. } => EXIT_GEOMETRY,
    }
}
