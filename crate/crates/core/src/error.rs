use thiserror::Error;

use crate::compose::Direction;
use crate::scope::{Configuration, Scope, VarId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("table entry {index} is negative ({value})")]
    NegativeEntry { index: usize, value: f64 },

    #[error("table entry {index} is not a finite number")]
    NonFinite { index: usize },

    #[error("table sums to {sum}, not 1")]
    NotNormalized { sum: f64 },

    #[error("expected {expected} entries, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("scope {inner} is not contained in {outer}")]
    ScopeNotContained { inner: Scope, outer: Scope },

    #[error("scopes {left} and {right} differ")]
    ScopeMismatch { left: Scope, right: Scope },

    #[error("scope {0:?} is not strictly ascending")]
    UnsortedScope(Vec<VarId>),

    #[error("variable {0} is not declared")]
    UnknownVariable(VarId),

    #[error("variable {0} is declared twice")]
    DuplicateVariable(VarId),

    #[error("variable {var} must have cardinality >= 1")]
    InvalidCardinality { var: VarId },

    #[error("variable {var} has {expected} values but {found} labels")]
    LabelCount {
        var: VarId,
        expected: usize,
        found: usize,
    },

    #[error("variable {var} has cardinality {left} in one table and {right} in another")]
    CardinalityMismatch { var: VarId, left: usize, right: usize },

    #[error("value {value} of variable {var} is out of range (cardinality {cardinality})")]
    ValueOutOfRange {
        var: VarId,
        value: usize,
        cardinality: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompositionError {
    /// The composition is undefined: the divisor marginal vanishes at
    /// `witness` while the other operand's marginal does not.
    #[error(
        "{direction} composition undefined: dominance fails on {intersection} at ({witness}), \
         numerator marginal {numerator}"
    )]
    DominanceViolation {
        direction: Direction,
        intersection: Scope,
        witness: Configuration,
        numerator: f64,
    },

    /// Step `step` (1-based operator position) of a chain is undefined.
    #[error("undefined subexpression at step {step}: {source}")]
    UndefinedSubexpression {
        step: usize,
        source: Box<CompositionError>,
    },

    #[error("a measure sequence needs at least one measure")]
    EmptySequence,

    #[error("{measures} measures need {} operators, got {operators}", measures.saturating_sub(1))]
    OperatorCount { measures: usize, operators: usize },

    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl CompositionError {
    /// The dominance failure at the root of a (possibly nested) error.
    pub fn dominance_witness(&self) -> Option<(&Scope, &Configuration)> {
        match self {
            CompositionError::DominanceViolation {
                intersection,
                witness,
                ..
            } => Some((intersection, witness)),
            CompositionError::UndefinedSubexpression { source, .. } => source.dominance_witness(),
            _ => None,
        }
    }

    /// Whether the error means "this expression is undefined".
    pub fn is_undefined(&self) -> bool {
        matches!(
            self,
            CompositionError::DominanceViolation { .. }
                | CompositionError::UndefinedSubexpression { .. }
        )
    }

    pub fn failing_step(&self) -> Option<usize> {
        match self {
            CompositionError::UndefinedSubexpression { step, .. } => Some(*step),
            _ => None,
        }
    }
}
