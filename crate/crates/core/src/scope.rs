//! Variables, scopes and configurations.
//!
//! A [`Scope`] is always stored sorted ascending, which fixes the canonical
//! cell order of every table built over it: the first variable of the scope
//! varies slowest.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::MeasureError;

/// Identifier of a variable of the universe.
pub type VarId = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableInfo {
    pub cardinality: usize,
    pub labels: Option<Vec<String>>,
}

/// The finite system of finite sets the measures live on: each variable id
/// maps to the size of its domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariableTable {
    vars: BTreeMap<VarId, VariableInfo>,
}

impl VariableTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from `(id, cardinality)` pairs.
    pub fn from_cardinalities<I>(cards: I) -> Result<Self, MeasureError>
    where
        I: IntoIterator<Item = (VarId, usize)>,
    {
        let mut table = Self::new();
        for (id, card) in cards {
            table.insert(id, card, None)?;
        }
        Ok(table)
    }

    pub fn insert(
        &mut self,
        id: VarId,
        cardinality: usize,
        labels: Option<Vec<String>>,
    ) -> Result<(), MeasureError> {
        if cardinality == 0 {
            return Err(MeasureError::InvalidCardinality { var: id });
        }
        if let Some(labels) = &labels {
            if labels.len() != cardinality {
                return Err(MeasureError::LabelCount {
                    var: id,
                    expected: cardinality,
                    found: labels.len(),
                });
            }
        }
        if self.vars.contains_key(&id) {
            return Err(MeasureError::DuplicateVariable(id));
        }
        self.vars.insert(id, VariableInfo { cardinality, labels });
        Ok(())
    }

    pub fn cardinality(&self, id: VarId) -> Option<usize> {
        self.vars.get(&id).map(|v| v.cardinality)
    }

    pub fn info(&self, id: VarId) -> Option<&VariableInfo> {
        self.vars.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &VariableInfo)> {
        self.vars.iter().map(|(&id, info)| (id, info))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Scope holding every declared variable.
    pub fn all(&self) -> Scope {
        Scope(self.vars.keys().copied().collect())
    }

    /// Cardinalities of the variables of `scope`, in scope order.
    pub fn cards_of(&self, scope: &Scope) -> Result<Vec<usize>, MeasureError> {
        scope
            .iter()
            .map(|v| self.cardinality(v).ok_or(MeasureError::UnknownVariable(v)))
            .collect()
    }
}

/// A set of variables, kept strictly ascending.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scope(Vec<VarId>);

impl Scope {
    /// Set semantics: input order and repetitions are irrelevant.
    pub fn new<I: IntoIterator<Item = VarId>>(vars: I) -> Self {
        let mut v: Vec<VarId> = vars.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Scope(v)
    }

    /// Accepts only a strictly ascending list, the on-disk form.
    pub fn from_ascending(vars: Vec<VarId>) -> Result<Self, MeasureError> {
        if vars.windows(2).any(|w| w[0] >= w[1]) {
            return Err(MeasureError::UnsortedScope(vars));
        }
        Ok(Scope(vars))
    }

    pub fn empty() -> Self {
        Scope(Vec::new())
    }

    pub fn vars(&self) -> &[VarId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.0.binary_search(&var).is_ok()
    }

    pub fn position(&self, var: VarId) -> Option<usize> {
        self.0.binary_search(&var).ok()
    }

    pub fn is_subset(&self, other: &Scope) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    pub fn union(&self, other: &Scope) -> Scope {
        Scope::new(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &Scope) -> Scope {
        Scope(self.iter().filter(|&v| other.contains(v)).collect())
    }

    pub fn difference(&self, other: &Scope) -> Scope {
        Scope(self.iter().filter(|&v| !other.contains(v)).collect())
    }

    pub fn is_disjoint(&self, other: &Scope) -> bool {
        self.iter().all(|v| !other.contains(v))
    }

    pub fn union_all<'a, I: IntoIterator<Item = &'a Scope>>(scopes: I) -> Scope {
        Scope::new(scopes.into_iter().flat_map(|s| s.iter()))
    }
}

impl FromIterator<VarId> for Scope {
    fn from_iter<I: IntoIterator<Item = VarId>>(iter: I) -> Self {
        Scope::new(iter)
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// A value index for every variable of a scope.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    scope: Scope,
    values: Vec<usize>,
}

impl Configuration {
    pub fn new(scope: Scope, values: Vec<usize>) -> Result<Self, MeasureError> {
        if scope.len() != values.len() {
            return Err(MeasureError::ShapeMismatch {
                expected: scope.len(),
                found: values.len(),
            });
        }
        Ok(Configuration { scope, values })
    }

    /// Builds from `(var, value)` pairs in any order.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, MeasureError>
    where
        I: IntoIterator<Item = (VarId, usize)>,
    {
        let mut pairs: Vec<(VarId, usize)> = pairs.into_iter().collect();
        pairs.sort_unstable_by_key(|p| p.0);
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(MeasureError::DuplicateVariable(w[0].0));
        }
        let (vars, values) = pairs.into_iter().unzip();
        Ok(Configuration {
            scope: Scope(vars),
            values,
        })
    }

    pub fn empty() -> Self {
        Configuration {
            scope: Scope::empty(),
            values: Vec::new(),
        }
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.scope.position(var).map(|p| self.values[p])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.scope.iter().zip(self.values.iter().copied())
    }

    /// Restriction of the assignment to `onto`.
    pub fn project(&self, onto: &Scope) -> Result<Configuration, MeasureError> {
        if !onto.is_subset(&self.scope) {
            return Err(MeasureError::ScopeNotContained {
                inner: onto.clone(),
                outer: self.scope.clone(),
            });
        }
        let values = onto
            .iter()
            .map(|v| self.values[self.scope.position(v).expect("checked subset")])
            .collect();
        Ok(Configuration {
            scope: onto.clone(),
            values,
        })
    }

    /// Checks every value against the cardinalities of `universe`.
    pub fn validate(&self, universe: &VariableTable) -> Result<(), MeasureError> {
        for (var, value) in self.pairs() {
            let card = universe
                .cardinality(var)
                .ok_or(MeasureError::UnknownVariable(var))?;
            if value >= card {
                return Err(MeasureError::ValueOutOfRange {
                    var,
                    value,
                    cardinality: card,
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scope.is_empty() {
            return write!(f, "()");
        }
        for (i, (var, value)) in self.pairs().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "x{var}={value}")?;
        }
        Ok(())
    }
}

/// Row-major strides with the first variable slowest.
pub(crate) fn strides(cards: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * cards[i + 1];
    }
    strides
}

/// For every cell of the table over `(scope, cards)`, the index of its
/// projection in the table over `sub` (which must be a subset of `scope`).
pub(crate) fn projection_map(scope: &Scope, cards: &[usize], sub: &Scope) -> Vec<usize> {
    let total: usize = cards.iter().product();
    let sub_cards: Vec<usize> = sub
        .iter()
        .map(|v| cards[scope.position(v).expect("sub-scope")])
        .collect();
    let sub_strides = strides(&sub_cards);
    // Stride contributed by each variable of `scope`; 0 when absent from `sub`.
    let weight: Vec<usize> = scope
        .iter()
        .map(|v| sub.position(v).map_or(0, |p| sub_strides[p]))
        .collect();

    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; cards.len()];
    let mut idx = 0usize;
    for _ in 0..total {
        out.push(idx);
        // odometer increment, last variable fastest
        for d in (0..digits.len()).rev() {
            digits[d] += 1;
            idx += weight[d];
            if digits[d] < cards[d] {
                break;
            }
            idx -= weight[d] * digits[d];
            digits[d] = 0;
        }
    }
    out
}

/// Decodes a canonical cell index into per-variable values.
pub(crate) fn decode(mut index: usize, cards: &[usize]) -> Vec<usize> {
    let mut values = vec![0; cards.len()];
    for d in (0..cards.len()).rev() {
        values[d] = index % cards[d];
        index /= cards[d];
    }
    values
}

pub(crate) fn encode(values: &[usize], cards: &[usize]) -> usize {
    values
        .iter()
        .zip(cards)
        .fold(0, |acc, (&v, &c)| acc * c + v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scope_set_ops() {
        let a = Scope::new([3, 1, 2]);
        let b = Scope::new([2, 3, 4]);
        assert_eq!(a.vars(), &[1, 2, 3]);
        assert_eq!(a.union(&b).vars(), &[1, 2, 3, 4]);
        assert_eq!(a.intersection(&b).vars(), &[2, 3]);
        assert_eq!(a.difference(&b).vars(), &[1]);
        assert!(Scope::empty().is_subset(&a));
        assert!(!a.is_subset(&b));
        assert!(Scope::from_ascending(vec![2, 1]).is_err());
        assert!(Scope::from_ascending(vec![1, 1]).is_err());
        assert_eq!(a.to_string(), "{1,2,3}");
    }

    #[test]
    fn project_restricts_coordinates() {
        let x = Configuration::from_pairs([(1, 0), (2, 1), (3, 1)]).unwrap();
        let y = x.project(&Scope::new([2, 3])).unwrap();
        assert_eq!(y.pairs().collect::<Vec<_>>(), vec![(2, 1), (3, 1)]);
        assert_eq!(x.project(x.scope()).unwrap(), x);
        assert_eq!(x.project(&Scope::empty()).unwrap(), Configuration::empty());
        assert!(matches!(
            x.project(&Scope::new([4])),
            Err(MeasureError::ScopeNotContained { .. })
        ));
    }

    #[test]
    fn projection_map_matches_decode() {
        let scope = Scope::new([1, 2, 5]);
        let cards = [2, 3, 2];
        let sub = Scope::new([1, 5]);
        let map = projection_map(&scope, &cards, &sub);
        for (i, &j) in map.iter().enumerate() {
            let v = decode(i, &cards);
            assert_eq!(j, encode(&[v[0], v[2]], &[2, 2]));
        }
        assert_eq!(projection_map(&scope, &cards, &Scope::empty()), vec![0; 12]);
    }

    #[test]
    fn variable_table_rejects_bad_input() {
        let mut t = VariableTable::new();
        t.insert(1, 2, None).unwrap();
        assert!(matches!(t.insert(1, 3, None), Err(MeasureError::DuplicateVariable(1))));
        assert!(matches!(t.insert(2, 0, None), Err(MeasureError::InvalidCardinality { var: 2 })));
        assert!(t.insert(3, 2, Some(vec!["a".into()])).is_err());
    }
}
