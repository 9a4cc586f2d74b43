//! Unnormalized nonnegative tables, for products of marginals whose scopes
//! overlap and for building conditional tables.

use crate::error::MeasureError;
use crate::measure::{joint_shape, sub_cards, Measure};
use crate::scope::{projection_map, Scope};

#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    scope: Scope,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Potential {
    pub fn new(scope: Scope, cards: Vec<usize>, values: Vec<f64>) -> Result<Self, MeasureError> {
        let expected: usize = cards.iter().product();
        if cards.len() != scope.len() || values.len() != expected {
            return Err(MeasureError::ShapeMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(MeasureError::NonFinite { index });
        }
        if let Some(index) = values.iter().position(|&v| v < 0.0) {
            return Err(MeasureError::NegativeEntry {
                index,
                value: values[index],
            });
        }
        Ok(Potential { scope, cards, values })
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Pointwise product on the union of the scopes.
    pub fn product(&self, other: &Potential) -> Result<Potential, MeasureError> {
        let a = self.shape_measure();
        let b = other.shape_measure();
        let (scope, cards) = joint_shape(&a, &b)?;
        let pa = projection_map(&scope, &cards, &self.scope);
        let pb = projection_map(&scope, &cards, &other.scope);
        let values = pa
            .iter()
            .zip(&pb)
            .map(|(&i, &j)| self.values[i] * other.values[j])
            .collect();
        Ok(Potential { scope, cards, values })
    }

    pub fn marginalize(&self, onto: &Scope) -> Result<Potential, MeasureError> {
        if !onto.is_subset(&self.scope) {
            return Err(MeasureError::ScopeNotContained {
                inner: onto.clone(),
                outer: self.scope.clone(),
            });
        }
        let cards = sub_cards(&self.scope, &self.cards, onto);
        let mut values = vec![0.0; cards.iter().product()];
        for (&j, &v) in projection_map(&self.scope, &self.cards, onto).iter().zip(&self.values) {
            values[j] += v;
        }
        Ok(Potential {
            scope: onto.clone(),
            cards,
            values,
        })
    }

    /// Divides every cell by the sum over its `given` group, turning the
    /// table into a conditional distribution of the remaining variables.
    /// Groups with zero mass stay zero.
    pub fn condition_on(&self, given: &Scope) -> Result<Potential, MeasureError> {
        let totals = self.marginalize(given)?;
        let map = projection_map(&self.scope, &self.cards, given);
        let values = self
            .values
            .iter()
            .zip(&map)
            .map(|(&v, &g)| if totals.values[g] == 0.0 { 0.0 } else { v / totals.values[g] })
            .collect();
        Ok(Potential {
            scope: self.scope.clone(),
            cards: self.cards.clone(),
            values,
        })
    }

    /// Max-norm distance between tables on the same scope.
    pub fn max_abs_diff(&self, other: &Potential) -> Option<f64> {
        if self.scope != other.scope || self.cards != other.cards {
            return None;
        }
        Some(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Validates unit mass (within `EQ_TOL`).
    pub fn into_measure(self) -> Result<Measure, MeasureError> {
        Measure::with_cards(self.scope, self.cards, self.values)
    }

    // Shape-only stand-in so the union logic of `joint_shape` can be reused.
    fn shape_measure(&self) -> Measure {
        Measure::from_raw(self.scope.clone(), self.cards.clone(), vec![0.0; self.values.len()])
    }
}

impl From<&Measure> for Potential {
    fn from(m: &Measure) -> Self {
        Potential {
            scope: m.scope().clone(),
            cards: m.cards().to_vec(),
            values: m.table().to_vec(),
        }
    }
}

impl From<Measure> for Potential {
    fn from(m: Measure) -> Self {
        Potential::from(&m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conditional_rows_sum_to_one() {
        let p = Potential::new(Scope::new([1, 2]), vec![2, 3], vec![1.0, 2.0, 3.0, 0.0, 0.0, 0.0])
            .unwrap();
        let c = p.condition_on(&Scope::new([1])).unwrap();
        assert_eq!(c.values(), &[1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn product_over_overlap() {
        let a = Potential::new(Scope::new([1, 2]), vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Potential::new(Scope::new([2, 3]), vec![2, 2], vec![1.0, 10.0, 100.0, 1000.0]).unwrap();
        let c = a.product(&b).unwrap();
        assert_eq!(c.scope(), &Scope::new([1, 2, 3]));
        assert_eq!(c.values(), &[1.0, 10.0, 200.0, 2000.0, 3.0, 30.0, 400.0, 4000.0]);
    }
}
