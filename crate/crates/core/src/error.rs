use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::jet::JetError;

/// Errors raised by the geometry pipeline and the checks built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("metric is not symmetric positive definite at {point:?}: {reason}")]
    NotPositiveDefinite { point: Vec<f64>, reason: String },
    #[error("tensor slot {slot} out of range for rank {rank}")]
    Slot { slot: usize, rank: usize },
    #[error("cannot contract slots {0} and {1}: they have the same variance (raise one first)")]
    SameVariance(usize, usize),
    #[error("tensor shape mismatch: {0}")]
    Shape(String),
    #[error("the Weyl tensor is only defined for dimension >= 4; in dimension 3 it is identically zero, use the Cotton tensor")]
    WeylDimension,
    #[error("dimension {0} is too small for this operation (need at least {1})")]
    DimensionTooSmall(usize, usize),
    #[error("no potential given: this check needs f, mu and lambda")]
    MissingPotential,
    #[error("regular point required: |grad f| = {0:e} at {1:?} is below the threshold")]
    CriticalPoint(f64, Vec<f64>),
    #[error("chart is not adapted to f: {0}")]
    NotAdapted(String),
    #[error("points are not on the level set f = {level}: f = {found} at {point:?}")]
    NotOnLevelSet { level: f64, found: f64, point: Vec<f64> },
    #[error("degenerate plane: tangent vectors are parallel after projection onto the level set")]
    DegeneratePlane,
    #[error("mu = 1/(2-n) = {0}: this case is handled by the conformal special-case check")]
    SpecialMu(f64),
    #[error("mu = {mu} differs from 1/(2-n) = {expected}")]
    NotSpecialMu { mu: f64, expected: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("fixture `{name}` failed self-validation: {reason}")]
    FixtureValidation { name: String, reason: String },
    #[error("level-set sampling is unavailable: {0}")]
    NoLevelSets(String),
}

impl Error {
    /// Whether the error reflects bad input (as opposed to a violated
    /// mathematical precondition at a sampled point).
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parse(_) | Error::InvalidParameter(_) | Error::UnknownFixture(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
