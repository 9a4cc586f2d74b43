//! Composition of probability measures on finite spaces.
//!
//! Multidimensional distributions are assembled from low-dimensional
//! [`Measure`]s with the right composition `P ▷ Q` and the left composition
//! `P ◁ Q`. On top of the operators the crate provides
//!
//! * perfectness tests and the perfectizing rewrite of a sequence
//!   ([`sequence`]),
//! * the running intersection property and junction trees ([`junction`]),
//! * conditions under which operands may be reordered ([`rules`]),
//! * local computation into a decomposable covering ([`local`]).
//!
//! All tables are dense and stored in canonical order, first scope variable
//! slowest.

pub mod compose;
pub mod error;
pub mod junction;
pub mod local;
pub mod measure;
pub mod potential;
pub mod rules;
pub mod scope;
pub mod sequence;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use compose::{
    anticipate, compose, compose_all_left, compose_all_right, compose_chain, compose_left, compose_right,
    Direction,
};
pub use error::{CompositionError, MeasureError};
pub use junction::{find_rip_ordering, has_rip, JunctionTree, RipOrdering, Traversal};
pub use local::{
    assign_buckets, final_row, run_procedure, verify_prefix_consistency, BucketAssignment, Covering,
    LocalError, LocalState, ProcedureOptions, TieBreak,
};
pub use measure::{consistent, dominates, is_extension_of, Measure};
pub use potential::Potential;
pub use rules::{applicable_exchange_rules, ExchangeRule};
pub use scope::{Configuration, Scope, VarId, VariableTable};
pub use sequence::{is_perfect, is_perfect_by_definition, kellerer_sufficient, perfectize, MeasureSequence};

/// Max-norm tolerance for equality of measures and for normalization.
pub const EQ_TOL: f64 = 1e-9;

/// Entries at or below this magnitude count as zero in dominance checks.
pub const ZERO_TOL: f64 = 1e-12;
