use thiserror::Error;

use crate::auto::NotAutomorphism;
use crate::field::FieldError;
use crate::gaction::AxiomViolation;
use crate::parse::ParseError;
use crate::rentschler::StuckState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("not an automorphism: {0}")]
    NotAutomorphism(NotAutomorphism),
    #[error("parameter {0} is not invariant under the action")]
    NotInvariantParameter(String),
    #[error("axiom violation: {0}")]
    AxiomViolation(AxiomViolation),
    #[error("the action is trivial")]
    TrivialAction,
    #[error("no nonconstant invariant of degree <= {0}")]
    DegreeCapExceeded(u32),
    #[error("T^{power} is not allowed in characteristic {characteristic}")]
    InvalidExponent { power: u32, characteristic: u64 },
    #[error("reduction stuck: {0}")]
    StuckReduction(Box<StuckState>),
    /// An identity that holds for every valid input failed; always a bug or
    /// a malformed input that slipped past validation.
    #[error("internal check failed: {0}")]
    Falsification(String),
}
