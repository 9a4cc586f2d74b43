//! Measure sequences and perfectness.
//!
//! A sequence `P1, …, Pn` is perfect when every prefix composed with `▷`
//! equals the same prefix composed with `◁`. Equivalently, each `Pm` is
//! consistent with `P1 ▷ … ▷ P(m-1)`, which is what [`is_perfect`] checks.

use crate::compose::{compose_all_left, compose_all_right, compose_right, wrap_step};
use crate::error::{CompositionError, MeasureError};
use crate::junction::has_rip;
use crate::measure::{consistent, Measure};
use crate::scope::Scope;
use crate::EQ_TOL;

/// A nonempty ordered list of measures over one universe.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSequence {
    items: Vec<Measure>,
}

impl MeasureSequence {
    /// Rejects empty input and variables whose cardinality differs between
    /// items.
    pub fn new(items: Vec<Measure>) -> Result<Self, CompositionError> {
        if items.is_empty() {
            return Err(CompositionError::EmptySequence);
        }
        for (i, a) in items.iter().enumerate() {
            for b in &items[i + 1..] {
                for var in a.scope().intersection(b.scope()).iter() {
                    let (x, y) = (a.cardinality(var).unwrap(), b.cardinality(var).unwrap());
                    if x != y {
                        return Err(MeasureError::CardinalityMismatch { var, left: x, right: y }.into());
                    }
                }
            }
        }
        Ok(MeasureSequence { items })
    }

    pub fn items(&self) -> &[Measure] {
        &self.items
    }

    pub fn into_items(self) -> Vec<Measure> {
        self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Measure> {
        self.items.iter()
    }

    pub fn scopes(&self) -> Vec<Scope> {
        self.items.iter().map(|m| m.scope().clone()).collect()
    }

    /// Union of all scopes.
    pub fn covered(&self) -> Scope {
        Scope::union_all(self.items.iter().map(Measure::scope))
    }

    /// `P1 ▷ … ▷ Pn`.
    pub fn compose(&self) -> Result<Measure, CompositionError> {
        compose_all_right(&self.items)
    }

    /// The compositions `P1 ▷ … ▷ Pm` for `m = 1..=n`.
    pub fn prefix_joints(&self) -> Result<Vec<Measure>, CompositionError> {
        let mut out = Vec::with_capacity(self.items.len());
        out.push(self.items[0].clone());
        for (step, next) in self.items.iter().enumerate().skip(1) {
            let joint = compose_right(out.last().unwrap(), next).map_err(|e| wrap_step(step, e))?;
            out.push(joint);
        }
        Ok(out)
    }
}

impl<'a> IntoIterator for &'a MeasureSequence {
    type Item = &'a Measure;
    type IntoIter = std::slice::Iter<'a, Measure>;

    fn into_iter(self) -> Self::IntoIter {
        self.items.iter()
    }
}

/// Perfectness through prefix consistency. Errors when some prefix
/// composition is undefined.
pub fn is_perfect(seq: &MeasureSequence) -> Result<bool, CompositionError> {
    let prefixes = seq.prefix_joints()?;
    Ok(prefixes
        .iter()
        .zip(seq.items().iter().skip(1))
        .all(|(prefix, next)| consistent(prefix, next)))
}

/// Perfectness straight from the definition: every `▷`-prefix equals the
/// `◁`-prefix. An undefined `◁`-prefix counts as a mismatch.
pub fn is_perfect_by_definition(seq: &MeasureSequence) -> Result<bool, CompositionError> {
    let prefixes = seq.prefix_joints()?;
    for m in 2..=seq.len() {
        let right = &prefixes[m - 1];
        match compose_all_left(&seq.items()[..m]) {
            Ok(left) if left.approx_eq(right, EQ_TOL) => {}
            Ok(_) => return Ok(false),
            Err(e) if e.is_undefined() => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

/// Rewrites a sequence into a perfect one with the same composition.
///
/// `Q1 = P1` and `Qi = (Q1 ▷ … ▷ Q(i-1))^(Ki ∩ (K1 ∪ … ∪ K(i-1))) ▷ Pi`.
pub fn perfectize(seq: &MeasureSequence) -> Result<MeasureSequence, CompositionError> {
    let mut out = Vec::with_capacity(seq.len());
    let mut prefix = seq.items()[0].clone();
    out.push(prefix.clone());
    for (step, p) in seq.items().iter().enumerate().skip(1) {
        let overlap = p.scope().intersection(prefix.scope());
        let q = prefix
            .marginalize(&overlap)
            .map_err(CompositionError::from)
            .and_then(|head| compose_right(&head, p))
            .map_err(|e| wrap_step(step, e))?;
        prefix = compose_right(&prefix, &q).map_err(|e| wrap_step(step, e))?;
        out.push(q);
    }
    MeasureSequence::new(out)
}

/// Pairwise consistency plus the running intersection property, which
/// together guarantee perfectness.
pub fn kellerer_sufficient(seq: &MeasureSequence) -> bool {
    let items = seq.items();
    let pairwise = items
        .iter()
        .enumerate()
        .all(|(i, a)| items[i + 1..].iter().all(|b| consistent(a, b)));
    pairwise && has_rip(&seq.scopes())
}
