//! Crate-wide error type. Variant names match the failure contracts of the
//! individual modules so they can be surfaced verbatim in batch summaries.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("NotHermitian: {0}")]
    NotHermitian(String),

    #[error("DegenerateSpectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("RegimeViolation: {0}")]
    RegimeViolation(String),

    #[error("PropagationFailed: {0}")]
    PropagationFailed(String),

    #[error("InsufficientSamples: {0}")]
    InsufficientSamples(String),

    #[error("ContinuityLost: {0}")]
    ContinuityLost(String),

    #[error("MissingDerivative: {0}")]
    MissingDerivative(String),

    #[error("GapTooSmall: {0}")]
    GapTooSmall(String),

    #[error("GridMismatch: {0}")]
    GridMismatch(String),

    #[error("StepTooCoarse: {0}")]
    StepTooCoarse(String),

    #[error("NonUnitaryDrift: {0}")]
    NonUnitaryDrift(String),

    #[error("GridTooCoarse: {0}")]
    GridTooCoarse(String),

    #[error("DivisionGuard: {0}")]
    DivisionGuard(String),

    #[error("PhaseUnwrapFailed: {0}")]
    PhaseUnwrapFailed(String),

    #[error("TIndependenceViolated: {0}")]
    TIndependenceViolated(String),

    #[error("Io: {0}")]
    Io(#[from] std::io::Error),

    #[error("Parse: {0}")]
    Parse(String),

    #[error("Validation: {0}")]
    Validation(String),
}

impl Error {
    /// Short variant name, used for the `errors[]` field of run summaries.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotHermitian(_) => "NotHermitian",
            Error::DegenerateSpectrum(_) => "DegenerateSpectrum",
            Error::RegimeViolation(_) => "RegimeViolation",
            Error::PropagationFailed(_) => "PropagationFailed",
            Error::InsufficientSamples(_) => "InsufficientSamples",
            Error::ContinuityLost(_) => "ContinuityLost",
            Error::MissingDerivative(_) => "MissingDerivative",
            Error::GapTooSmall(_) => "GapTooSmall",
            Error::GridMismatch(_) => "GridMismatch",
            Error::StepTooCoarse(_) => "StepTooCoarse",
            Error::NonUnitaryDrift(_) => "NonUnitaryDrift",
            Error::GridTooCoarse(_) => "GridTooCoarse",
            Error::DivisionGuard(_) => "DivisionGuard",
            Error::PhaseUnwrapFailed(_) => "PhaseUnwrapFailed",
            Error::TIndependenceViolated(_) => "TIndependenceViolated",
            Error::Io(_) => "Io",
            Error::Parse(_) => "Parse",
            Error::Validation(_) => "Validation",
        }
    }

    /// True for errors that signal a physics-contract violation rather than
    /// an I/O or configuration problem (drives the CLI exit code).
    pub fn is_physics(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Parse(_) | Error::Validation(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
