//! Dense probability tables over finite configuration spaces.

use crate::error::MeasureError;
use crate::scope::{decode, encode, projection_map, Configuration, Scope, VarId, VariableTable};
use crate::{EQ_TOL, ZERO_TOL};

/// Whether a table entry counts as zero for dominance purposes.
#[inline]
pub fn is_zero(v: f64) -> bool {
    v.abs() <= ZERO_TOL
}

/// A probability measure on the configuration space of its scope.
///
/// Entries are nonnegative, sum to one (within [`EQ_TOL`]) and are stored in
/// canonical order: the first scope variable varies slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    scope: Scope,
    cards: Vec<usize>,
    table: Vec<f64>,
}

impl Measure {
    /// Validating constructor. Entries are kept exactly as given.
    pub fn new(scope: Scope, table: Vec<f64>, universe: &VariableTable) -> Result<Self, MeasureError> {
        let cards = universe.cards_of(&scope)?;
        Self::with_cards(scope, cards, table)
    }

    pub fn with_cards(scope: Scope, cards: Vec<usize>, table: Vec<f64>) -> Result<Self, MeasureError> {
        check_shape(&scope, &cards, &table)?;
        let mut sum = 0.0;
        for (index, &value) in table.iter().enumerate() {
            if !value.is_finite() {
                return Err(MeasureError::NonFinite { index });
            }
            if value < 0.0 {
                return Err(MeasureError::NegativeEntry { index, value });
            }
            sum += value;
        }
        if (sum - 1.0).abs() > EQ_TOL {
            return Err(MeasureError::NotNormalized { sum });
        }
        Ok(Measure { scope, cards, table })
    }

    /// Rescales a nonnegative table to unit mass when it is within `tol` of it.
    pub fn normalized(
        scope: Scope,
        cards: Vec<usize>,
        mut table: Vec<f64>,
        tol: f64,
    ) -> Result<Self, MeasureError> {
        check_shape(&scope, &cards, &table)?;
        let sum: f64 = table.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > tol || sum <= 0.0 {
            return Err(MeasureError::NotNormalized { sum });
        }
        table.iter_mut().for_each(|v| *v /= sum);
        Self::with_cards(scope, cards, table)
    }

    /// Constructor for tables that are normalized by construction.
    pub(crate) fn from_raw(scope: Scope, cards: Vec<usize>, table: Vec<f64>) -> Self {
        debug_assert_eq!(cards.len(), scope.len());
        debug_assert_eq!(table.len(), cards.iter().product::<usize>());
        Measure { scope, cards, table }
    }

    /// The scalar measure on the empty scope, the identity for products.
    pub fn unit() -> Self {
        Measure {
            scope: Scope::empty(),
            cards: Vec::new(),
            table: vec![1.0],
        }
    }

    pub fn uniform(scope: Scope, universe: &VariableTable) -> Result<Self, MeasureError> {
        let cards = universe.cards_of(&scope)?;
        let n: usize = cards.iter().product();
        Ok(Measure::from_raw(scope, cards, vec![1.0 / n as f64; n]))
    }

    /// Unit mass on a single configuration.
    pub fn point_mass(at: &Configuration, universe: &VariableTable) -> Result<Self, MeasureError> {
        at.validate(universe)?;
        let cards = universe.cards_of(at.scope())?;
        let mut table = vec![0.0; cards.iter().product()];
        table[encode(at.values(), &cards)] = 1.0;
        Ok(Measure::from_raw(at.scope().clone(), cards, table))
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn into_table(self) -> Vec<f64> {
        self.table
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn cardinality(&self, var: VarId) -> Option<usize> {
        self.scope.position(var).map(|p| self.cards[p])
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    /// Value at a configuration whose scope contains this measure's scope.
    pub fn value(&self, x: &Configuration) -> Result<f64, MeasureError> {
        let x = x.project(&self.scope)?;
        for (&v, (&c, var)) in x.values().iter().zip(self.cards.iter().zip(self.scope.iter())) {
            if v >= c {
                return Err(MeasureError::ValueOutOfRange {
                    var,
                    value: v,
                    cardinality: c,
                });
            }
        }
        Ok(self.table[encode(x.values(), &self.cards)])
    }

    /// Configuration of the cell at canonical position `index`.
    pub fn configuration(&self, index: usize) -> Configuration {
        Configuration::new(self.scope.clone(), decode(index, &self.cards)).expect("matching length")
    }

    pub fn configurations(&self) -> impl Iterator<Item = Configuration> + '_ {
        (0..self.table.len()).map(move |i| self.configuration(i))
    }

    /// Marginal measure on `onto`, summing cells in table order.
    pub fn marginalize(&self, onto: &Scope) -> Result<Measure, MeasureError> {
        if !onto.is_subset(&self.scope) {
            return Err(MeasureError::ScopeNotContained {
                inner: onto.clone(),
                outer: self.scope.clone(),
            });
        }
        if onto == &self.scope {
            return Ok(self.clone());
        }
        let cards = sub_cards(&self.scope, &self.cards, onto);
        let mut table = vec![0.0; cards.iter().product()];
        let map = projection_map(&self.scope, &self.cards, onto);
        for (&j, &v) in map.iter().zip(&self.table) {
            table[j] += v;
        }
        Ok(Measure::from_raw(onto.clone(), cards, table))
    }

    /// Max-norm distance, `None` when the scopes differ.
    pub fn max_abs_diff(&self, other: &Measure) -> Option<f64> {
        if self.scope != other.scope || self.cards != other.cards {
            return None;
        }
        Some(
            self.table
                .iter()
                .zip(&other.table)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    pub fn approx_eq(&self, other: &Measure, tol: f64) -> bool {
        self.max_abs_diff(other).is_some_and(|d| d <= tol)
    }

    /// Product of two measures on disjoint scopes; the result is again a
    /// probability measure.
    pub fn independent_product(&self, other: &Measure) -> Result<Measure, MeasureError> {
        if !self.scope.is_disjoint(&other.scope) {
            return Err(MeasureError::ScopeMismatch {
                left: self.scope.clone(),
                right: other.scope.clone(),
            });
        }
        let (scope, cards) = joint_shape(self, other)?;
        let pa = projection_map(&scope, &cards, &self.scope);
        let pb = projection_map(&scope, &cards, &other.scope);
        let table = pa
            .iter()
            .zip(&pb)
            .map(|(&a, &b)| self.table[a] * other.table[b])
            .collect();
        Ok(Measure::from_raw(scope, cards, table))
    }
}

fn check_shape(scope: &Scope, cards: &[usize], table: &[f64]) -> Result<(), MeasureError> {
    if cards.len() != scope.len() {
        return Err(MeasureError::ShapeMismatch {
            expected: scope.len(),
            found: cards.len(),
        });
    }
    if let Some(p) = cards.iter().position(|&c| c == 0) {
        return Err(MeasureError::InvalidCardinality { var: scope.vars()[p] });
    }
    let expected: usize = cards.iter().product();
    if table.len() != expected {
        return Err(MeasureError::ShapeMismatch {
            expected,
            found: table.len(),
        });
    }
    Ok(())
}

pub(crate) fn sub_cards(scope: &Scope, cards: &[usize], sub: &Scope) -> Vec<usize> {
    sub.iter()
        .map(|v| cards[scope.position(v).expect("sub-scope")])
        .collect()
}

/// Union scope of two measures with its cardinalities, checking that shared
/// variables agree.
pub(crate) fn joint_shape(a: &Measure, b: &Measure) -> Result<(Scope, Vec<usize>), MeasureError> {
    let scope = a.scope.union(&b.scope);
    let mut cards = Vec::with_capacity(scope.len());
    for var in scope.iter() {
        let card = match (a.cardinality(var), b.cardinality(var)) {
            (Some(x), Some(y)) if x != y => {
                return Err(MeasureError::CardinalityMismatch { var, left: x, right: y })
            }
            (Some(x), _) | (None, Some(x)) => x,
            (None, None) => unreachable!("variable of the union"),
        };
        cards.push(card);
    }
    Ok((scope, cards))
}

/// `true` iff `p` is dominated by `q` (`p ≪ q`): every zero cell of `q` is a
/// zero cell of `p`.
pub fn dominates(q: &Measure, p: &Measure) -> Result<bool, MeasureError> {
    if q.scope != p.scope || q.cards != p.cards {
        return Err(MeasureError::ScopeMismatch {
            left: q.scope.clone(),
            right: p.scope.clone(),
        });
    }
    Ok(q
        .table
        .iter()
        .zip(&p.table)
        .all(|(&qv, &pv)| !is_zero(qv) || is_zero(pv)))
}

/// Whether two measures agree on the marginal of their shared variables.
pub fn consistent(p1: &Measure, p2: &Measure) -> bool {
    let shared = p1.scope.intersection(&p2.scope);
    if shared.iter().any(|v| p1.cardinality(v) != p2.cardinality(v)) {
        return false;
    }
    let m1 = p1.marginalize(&shared).expect("intersection is a subset");
    let m2 = p2.marginalize(&shared).expect("intersection is a subset");
    m1.approx_eq(&m2, EQ_TOL)
}

/// Whether `q` extends `p`, i.e. `q` marginalized to the scope of `p` is `p`.
pub fn is_extension_of(q: &Measure, p: &Measure) -> Result<bool, MeasureError> {
    let m = q.marginalize(&p.scope)?;
    Ok(m.approx_eq(p, EQ_TOL))
}
