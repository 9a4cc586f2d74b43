//! Conditional probabilities `Q(X_r = a | X_s = b)` of a composed model.
//!
//! The marginal of `P1 ▷ … ▷ Pn` on `K1 ∪ … ∪ Kk` is `P1 ▷ … ▷ Pk`, so a
//! query whose variables all occur in a prefix only needs that prefix.

use perfseq::measure::is_zero;
use perfseq::{compose_all_right, Configuration, Measure, MeasureSequence, Scope, VarId};

use crate::error::QueryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QueryRoute {
    /// Answered from the composition of the first `k` measures.
    Prefix(usize),
    FullJoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueryAnswer {
    pub probability: f64,
    pub route: QueryRoute,
}

fn check_query(seq: &MeasureSequence, target: (VarId, usize), evidence: &Configuration) -> Result<Scope, QueryError> {
    let covered = seq.covered();
    let cards: Vec<(VarId, usize)> = seq
        .iter()
        .flat_map(|m| m.scope().iter().zip(m.cards().iter().copied()).collect::<Vec<_>>())
        .collect();
    for (var, value) in evidence.pairs().chain([target]) {
        if !covered.contains(var) {
            return Err(QueryError::UnknownVariable(var));
        }
        let cardinality = cards.iter().find(|(v, _)| *v == var).unwrap().1;
        if value >= cardinality {
            return Err(QueryError::ValueOutOfRange { var, value, cardinality });
        }
    }
    Ok(evidence.scope().union(&Scope::new([target.0])))
}

/// Smallest `k` such that `K1 ∪ … ∪ Kk` contains `needed`.
pub fn shortest_prefix(seq: &MeasureSequence, needed: &Scope) -> Option<usize> {
    let mut seen = Scope::empty();
    for (i, m) in seq.iter().enumerate() {
        seen = seen.union(m.scope());
        if needed.is_subset(&seen) {
            return Some(i + 1);
        }
    }
    None
}

/// The conditional probability from a measure whose scope holds every
/// variable of the query.
pub fn conditional_from(joint: &Measure, target: (VarId, usize), evidence: &Configuration) -> Result<f64, QueryError> {
    let needed = evidence.scope().union(&Scope::new([target.0]));
    let local = joint
        .marginalize(&needed)
        .map_err(|_| QueryError::UnknownVariable(needed.difference(joint.scope()).vars()[0]))?;
    let denominator = local
        .marginalize(evidence.scope())
        .and_then(|m| m.value(evidence))
        .map_err(perfseq::CompositionError::from)?;
    if is_zero(denominator) {
        return Err(QueryError::ZeroEvidence);
    }
    let numerator = match evidence.get(target.0) {
        Some(v) if v == target.1 => denominator,
        Some(_) => 0.0,
        None => {
            let both = Configuration::from_pairs(evidence.pairs().chain([target])).expect("target not in evidence");
            local.value(&both).map_err(perfseq::CompositionError::from)?
        }
    };
    Ok(numerator / denominator)
}

/// Answers the query from the shortest prefix that spans its variables.
/// Measures after that prefix are not composed.
pub fn query_conditional(
    seq: &MeasureSequence,
    target: (VarId, usize),
    evidence: &Configuration,
) -> Result<QueryAnswer, QueryError> {
    let needed = check_query(seq, target, evidence)?;
    let k = shortest_prefix(seq, &needed).expect("checked against the covered variables");
    let prefix = compose_all_right(&seq.items()[..k])?;
    let probability = conditional_from(&prefix, target, evidence)?;
    let route = if k == seq.len() {
        QueryRoute::FullJoint
    } else {
        QueryRoute::Prefix(k)
    };
    Ok(QueryAnswer { probability, route })
}

/// Answers the query from the full composed joint.
pub fn query_conditional_full(
    seq: &MeasureSequence,
    target: (VarId, usize),
    evidence: &Configuration,
) -> Result<f64, QueryError> {
    check_query(seq, target, evidence)?;
    conditional_from(&seq.compose()?, target, evidence)
}
