//! Brute-force reference evaluation of the composition operators.
//!
//! Everything here enumerates full configuration spaces and evaluates the
//! defining formulas cell by cell. Only the plain data accessors of
//! [`perfseq::Measure`] are used; indexing, marginal sums and the dominance
//! test are written out again from scratch so the results can serve as an
//! independent check of the library.

use std::collections::HashMap;

use perfseq::{CompositionError, Configuration, Direction, Measure, MeasureError, Scope, VarId};

/// Same zero threshold as the library's dominance test.
const ZERO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    ZeroEvidence,
    UnknownVariable(VarId),
    Composition(CompositionError),
}

impl From<CompositionError> for OracleError {
    fn from(e: CompositionError) -> Self {
        OracleError::Composition(e)
    }
}

type Assignment = HashMap<VarId, usize>;

/// All assignments of `vars` (with domain sizes `cards`), first variable
/// slowest.
fn enumerate(vars: &[VarId], cards: &[usize]) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for (&v, &c) in vars.iter().zip(cards) {
        let mut next = Vec::with_capacity(out.len() * c);
        for partial in &out {
            for value in 0..c {
                let mut a = partial.clone();
                a.insert(v, value);
                next.push(a);
            }
        }
        out = next;
    }
    out
}

fn key(a: &Assignment, vars: &[VarId]) -> Vec<usize> {
    vars.iter().map(|v| a[v]).collect()
}

/// Entry of `m` at an assignment covering its scope.
fn lookup(m: &Measure, a: &Assignment) -> f64 {
    let mut index = 0;
    for (v, &c) in m.scope().vars().iter().zip(m.cards()) {
        index = index * c + a[v];
    }
    m.table()[index]
}

/// Sum of `m` over every cell agreeing with the key on `onto`.
fn marginal_sums(m: &Measure, onto: &[VarId]) -> HashMap<Vec<usize>, f64> {
    let mut sums = HashMap::new();
    for a in enumerate(m.scope().vars(), m.cards()) {
        *sums.entry(key(&a, onto)).or_insert(0.0) += lookup(m, &a);
    }
    sums
}

fn union_shape(p: &Measure, q: &Measure) -> Result<(Vec<VarId>, Vec<usize>), MeasureError> {
    let mut pairs: Vec<(VarId, usize)> = Vec::new();
    for m in [p, q] {
        for (&v, &c) in m.scope().vars().iter().zip(m.cards()) {
            match pairs.iter().find(|(w, _)| *w == v) {
                Some(&(_, d)) if d != c => {
                    return Err(MeasureError::CardinalityMismatch { var: v, left: d, right: c })
                }
                Some(_) => {}
                None => pairs.push((v, c)),
            }
        }
    }
    pairs.sort_by_key(|&(v, _)| v);
    Ok(pairs.into_iter().unzip())
}

/// `P ▷ Q` or `P ◁ Q` evaluated straight from the formula.
pub fn oracle_compose(p: &Measure, q: &Measure, direction: Direction) -> Result<Measure, CompositionError> {
    let (vars, cards) = union_shape(p, q)?;
    let shared: Vec<VarId> = p
        .scope()
        .vars()
        .iter()
        .copied()
        .filter(|v| q.scope().vars().contains(v))
        .collect();
    let shared_cards: Vec<usize> = shared
        .iter()
        .map(|v| cards[vars.iter().position(|w| w == v).unwrap()])
        .collect();
    let (divisor, other) = match direction {
        Direction::Right => (q, p),
        Direction::Left => (p, q),
    };
    let div_sums = marginal_sums(divisor, &shared);
    let other_sums = marginal_sums(other, &shared);

    for a in enumerate(&shared, &shared_cards) {
        let k = key(&a, &shared);
        let (d, o) = (div_sums[&k], other_sums[&k]);
        if d.abs() <= ZERO && o.abs() > ZERO {
            let scope = Scope::new(shared.iter().copied());
            return Err(CompositionError::DominanceViolation {
                direction,
                intersection: scope.clone(),
                witness: Configuration::new(scope, k).expect("matching length"),
                numerator: o,
            });
        }
    }

    let table: Vec<f64> = enumerate(&vars, &cards)
        .iter()
        .map(|a| {
            let d = div_sums[&key(a, &shared)];
            if d.abs() <= ZERO {
                0.0
            } else {
                lookup(p, a) * lookup(q, a) / d
            }
        })
        .collect();
    Ok(Measure::with_cards(Scope::new(vars), cards, table)?)
}

/// Left-to-right fold of [`oracle_compose`].
pub fn oracle_joint(measures: &[Measure], ops: &[Direction]) -> Result<Measure, CompositionError> {
    let (first, rest) = measures.split_first().ok_or(CompositionError::EmptySequence)?;
    if ops.len() != rest.len() {
        return Err(CompositionError::OperatorCount {
            measures: measures.len(),
            operators: ops.len(),
        });
    }
    let mut acc = first.clone();
    for (i, (m, &op)) in rest.iter().zip(ops).enumerate() {
        acc = match oracle_compose(&acc, m, op) {
            Ok(r) => r,
            Err(e @ CompositionError::DominanceViolation { .. }) => {
                return Err(CompositionError::UndefinedSubexpression {
                    step: i + 1,
                    source: Box::new(e),
                })
            }
            Err(e) => return Err(e),
        };
    }
    Ok(acc)
}

/// `P1 ▷ … ▷ Pn` by brute force.
pub fn oracle_joint_right(measures: &[Measure]) -> Result<Measure, CompositionError> {
    oracle_joint(measures, &vec![Direction::Right; measures.len().saturating_sub(1)])
}

/// `joint(target ∧ evidence) / joint(evidence)` by full enumeration.
pub fn oracle_conditional(
    joint: &Measure,
    target: (VarId, usize),
    evidence: &Configuration,
) -> Result<f64, OracleError> {
    for var in evidence.scope().iter().chain([target.0]) {
        if !joint.scope().contains(var) {
            return Err(OracleError::UnknownVariable(var));
        }
    }
    let mut both = 0.0;
    let mut given = 0.0;
    for a in enumerate(joint.scope().vars(), joint.cards()) {
        if evidence.pairs().all(|(v, x)| a[&v] == x) {
            let value = lookup(joint, &a);
            given += value;
            if a[&target.0] == target.1 {
                both += value;
            }
        }
    }
    if given.abs() <= ZERO {
        return Err(OracleError::ZeroEvidence);
    }
    Ok(both / given)
}

/// Marginal of `m` on `onto` by enumeration.
pub fn oracle_marginal(m: &Measure, onto: &Scope) -> Result<Measure, MeasureError> {
    if !onto.is_subset(m.scope()) {
        return Err(MeasureError::ScopeNotContained {
            inner: onto.clone(),
            outer: m.scope().clone(),
        });
    }
    let cards: Vec<usize> = onto.iter().map(|v| m.cardinality(v).unwrap()).collect();
    let sums = marginal_sums(m, onto.vars());
    let table = enumerate(onto.vars(), &cards)
        .iter()
        .map(|a| sums[&key(a, onto.vars())])
        .collect();
    Measure::with_cards(onto.clone(), cards, table)
}
