//! Model files, conditional queries and the command implementations behind
//! the `perfseq` binary.

pub mod commands;
pub mod error;
pub mod model;
pub mod number;
pub mod query;

pub use error::{exit, CliError, QueryError};
pub use model::{emit_measure, load_model, parse_model, render_model, Model};
pub use number::format_number;
pub use query::{query_conditional, query_conditional_full, QueryAnswer, QueryRoute};
