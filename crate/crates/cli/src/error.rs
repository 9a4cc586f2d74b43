use std::io;
use std::path::PathBuf;

use perfseq::{CompositionError, LocalError, VarId};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("the evidence has probability zero")]
    ZeroEvidence,

    #[error("variable {0} does not occur in the model")]
    UnknownVariable(VarId),

    #[error("value {value} of variable {var} is out of range (cardinality {cardinality})")]
    ValueOutOfRange {
        var: VarId,
        value: usize,
        cardinality: usize,
    },

    #[error(transparent)]
    Composition(#[from] CompositionError),
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(
        "invalid model{}: {message}",
        measure.map(|i| format!(" (measure {i})")).unwrap_or_default()
    )]
    Validation { measure: Option<usize>, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Composition(#[from] CompositionError),

    #[error(transparent)]
    Local(#[from] LocalError),

    #[error(transparent)]
    Query(#[from] QueryError),
}

pub mod exit {
    pub const OK: u8 = 0;
    pub const IO: u8 = 1;
    pub const UNDEFINED: u8 = 2;
    pub const INVALID: u8 = 3;
    pub const ZERO_EVIDENCE: u8 = 4;
}

fn composition_code(e: &CompositionError) -> u8 {
    if e.is_undefined() {
        exit::UNDEFINED
    } else {
        exit::INVALID
    }
}

impl CliError {
    pub(crate) fn validation(measure: Option<usize>, message: impl ToString) -> Self {
        CliError::Validation {
            measure,
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Write(_) => exit::IO,
            CliError::Parse { .. } | CliError::Validation { .. } | CliError::Usage(_) => exit::INVALID,
            CliError::Composition(e) => composition_code(e),
            CliError::Local(LocalError::Undefined { .. }) => exit::UNDEFINED,
            CliError::Local(LocalError::Composition(e)) => composition_code(e),
            CliError::Local(_) => exit::INVALID,
            CliError::Query(QueryError::ZeroEvidence) => exit::ZERO_EVIDENCE,
            CliError::Query(QueryError::Composition(e)) => composition_code(e),
            CliError::Query(_) => exit::INVALID,
        }
    }
}
