//! Right and left composition, the anticipating operator, and chains.
//!
//! `P ▷ Q = P·Q / Q^(J∩K)` and `P ◁ Q = P·Q / P^(J∩K)` where `J`, `K` are
//! the scopes of `P`, `Q`. Both live on `J ∪ K`. A composition whose divisor
//! marginal vanishes where the other operand's does not is undefined and is
//! reported as [`CompositionError::DominanceViolation`]; `0·0/0` is 0.

use std::fmt;

use crate::error::CompositionError;
use crate::measure::{is_zero, joint_shape, Measure};
use crate::scope::{projection_map, Scope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `▷`: keeps the marginal of the left operand.
    Right,
    /// `◁`: keeps the marginal of the right operand.
    Left,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Right => write!(f, "right"),
            Direction::Left => write!(f, "left"),
        }
    }
}

pub fn compose_right(p: &Measure, q: &Measure) -> Result<Measure, CompositionError> {
    compose(p, q, Direction::Right)
}

pub fn compose_left(p: &Measure, q: &Measure) -> Result<Measure, CompositionError> {
    compose(p, q, Direction::Left)
}

pub fn compose(p: &Measure, q: &Measure, direction: Direction) -> Result<Measure, CompositionError> {
    let (scope, cards) = joint_shape(p, q)?;
    let shared = p.scope().intersection(q.scope());
    let p_shared = p.marginalize(&shared)?;
    let q_shared = q.marginalize(&shared)?;
    let (divisor, other) = match direction {
        Direction::Right => (&q_shared, &p_shared),
        Direction::Left => (&p_shared, &q_shared),
    };

    if let Some(i) = divisor
        .table()
        .iter()
        .zip(other.table())
        .position(|(&d, &o)| is_zero(d) && !is_zero(o))
    {
        return Err(CompositionError::DominanceViolation {
            direction,
            intersection: shared,
            witness: divisor.configuration(i),
            numerator: other.table()[i],
        });
    }

    let to_p = projection_map(&scope, &cards, p.scope());
    let to_q = projection_map(&scope, &cards, q.scope());
    let to_shared = projection_map(&scope, &cards, &shared);
    let (pt, qt, dt) = (p.table(), q.table(), divisor.table());
    let table = (0..to_p.len())
        .map(|c| {
            let d = dt[to_shared[c]];
            if is_zero(d) {
                0.0
            } else {
                pt[to_p[c]] * qt[to_q[c]] / d
            }
        })
        .collect();
    Ok(Measure::from_raw(scope, cards, table))
}

/// The anticipating operator: `P2 ⊛_K1 P3 = (P3^((K1∖K2)∩K3) · P2) ▷ P3`.
///
/// When `P1 ▷ P2 ▷ P3` is defined, `P1 ▷ P2 ▷ P3 = P1 ▷ (P2 ⊛_K1 P3)`.
pub fn anticipate(p2: &Measure, p3: &Measure, k1: &Scope) -> Result<Measure, CompositionError> {
    let ahead = k1.difference(p2.scope()).intersection(p3.scope());
    // `ahead` is disjoint from the scope of `p2`, so the product is a measure.
    let prefactor = p3.marginalize(&ahead)?;
    let extended = prefactor.independent_product(p2)?;
    compose_right(&extended, p3)
}

/// Left-to-right fold `((P1 op1 P2) op2 P3) …`.
///
/// A failing operator is reported as `UndefinedSubexpression` with its
/// 1-based position in `ops`.
pub fn compose_chain(measures: &[Measure], ops: &[Direction]) -> Result<Measure, CompositionError> {
    let (first, rest) = measures.split_first().ok_or(CompositionError::EmptySequence)?;
    if ops.len() != rest.len() {
        return Err(CompositionError::OperatorCount {
            measures: measures.len(),
            operators: ops.len(),
        });
    }
    let mut acc = first.clone();
    for (step, (next, &op)) in rest.iter().zip(ops).enumerate() {
        acc = compose(&acc, next, op).map_err(|e| wrap_step(step + 1, e))?;
    }
    Ok(acc)
}

/// `P1 ▷ P2 ▷ … ▷ Pn`.
pub fn compose_all_right(measures: &[Measure]) -> Result<Measure, CompositionError> {
    compose_chain(measures, &vec![Direction::Right; measures.len().saturating_sub(1)])
}

/// `P1 ◁ P2 ◁ … ◁ Pn`.
pub fn compose_all_left(measures: &[Measure]) -> Result<Measure, CompositionError> {
    compose_chain(measures, &vec![Direction::Left; measures.len().saturating_sub(1)])
}

pub(crate) fn wrap_step(step: usize, e: CompositionError) -> CompositionError {
    if e.is_undefined() {
        CompositionError::UndefinedSubexpression {
            step,
            source: Box::new(e),
        }
    } else {
        e
    }
}
