//! Conditions under which the operands of a three-term composition may be
//! reordered or regrouped without changing the result.
//!
//! Every rule pairs a hypothesis on `(P1, P2, P3)` (with scopes `K1, K2, K3`)
//! with an identity that holds whenever both sides are defined.

use std::collections::BTreeSet;
use std::fmt;

use crate::compose::{compose_chain, Direction};
use crate::error::CompositionError;
use crate::measure::{consistent, is_zero, Measure};
use crate::potential::Potential;
use crate::scope::{projection_map, Scope};
use crate::EQ_TOL;

use Direction::{Left, Right};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExchangeRule {
    /// `K1 ⊇ K2 ∩ K3` ⟹ `P1 ▷ P2 ▷ P3 = P1 ▷ P3 ▷ P2`.
    SwapCoveredByFirst,
    /// `P1, P2` consistent and `K2 ⊇ K1 ∩ K3` ⟹ `P1 ▷ P2 ▷ P3 = P1 ▷ P3 ◁ P2`.
    MoveSecondLast,
    /// `P1, P3` consistent and `K1 ⊇ K2 ∩ K3` ⟹ `P1 ▷ P2 ▷ P3 = P1 ▷ P2 ◁ P3`.
    LeftComposeThird,
    /// `P2` and `P3` both split their overlap with the rest conditionally on
    /// `K1 ∩ K2 ∩ K3`, with matching conditionals of `K2 ∩ K3` ⟹
    /// `P1 ▷ P2 ▷ P3 = P1 ▷ P3 ▷ P2`.
    SwapConditionallyIndependent,
    /// `K2 ⊇ K1 ∩ K3` ⟹ `P1 ▷ P2 ▷ P3 = P2 ▷ P3 ◁ P1` (the anticipating
    /// operator reduces to `▷`).
    RegroupCoveredBySecond,
    /// `P2, P3` consistent and each factorizes as
    /// `Pi^(Ki ∩ (K1 ∪ Kj)) = Pi^((Ki ∩ K1) ∖ Kj) · Pi^(K2 ∩ K3)` ⟹
    /// `P1 ▷ P2 ▷ P3 = P1 ▷ P3 ▷ P2`.
    SwapFactorized,
}

impl ExchangeRule {
    pub const ALL: [ExchangeRule; 6] = [
        ExchangeRule::SwapCoveredByFirst,
        ExchangeRule::MoveSecondLast,
        ExchangeRule::LeftComposeThird,
        ExchangeRule::SwapConditionallyIndependent,
        ExchangeRule::RegroupCoveredBySecond,
        ExchangeRule::SwapFactorized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExchangeRule::SwapCoveredByFirst => "swap-covered-by-first",
            ExchangeRule::MoveSecondLast => "move-second-last",
            ExchangeRule::LeftComposeThird => "left-compose-third",
            ExchangeRule::SwapConditionallyIndependent => "swap-conditionally-independent",
            ExchangeRule::RegroupCoveredBySecond => "regroup-covered-by-second",
            ExchangeRule::SwapFactorized => "swap-factorized",
        }
    }

    /// The identity licensed by the rule.
    pub fn identity(self) -> &'static str {
        match self {
            ExchangeRule::SwapCoveredByFirst
            | ExchangeRule::SwapConditionallyIndependent
            | ExchangeRule::SwapFactorized => "P1 ▷ P2 ▷ P3 = P1 ▷ P3 ▷ P2",
            ExchangeRule::MoveSecondLast => "P1 ▷ P2 ▷ P3 = P1 ▷ P3 ◁ P2",
            ExchangeRule::LeftComposeThird => "P1 ▷ P2 ▷ P3 = P1 ▷ P2 ◁ P3",
            ExchangeRule::RegroupCoveredBySecond => "P1 ▷ P2 ▷ P3 = P2 ▷ P3 ◁ P1",
        }
    }

    /// Whether the hypothesis of the rule holds for the triple.
    pub fn applies(self, p1: &Measure, p2: &Measure, p3: &Measure) -> bool {
        let (k1, k2, k3) = (p1.scope(), p2.scope(), p3.scope());
        match self {
            ExchangeRule::SwapCoveredByFirst => k2.intersection(k3).is_subset(k1),
            ExchangeRule::MoveSecondLast => {
                k1.intersection(k3).is_subset(k2) && consistent(p1, p2)
            }
            ExchangeRule::LeftComposeThird => k2.intersection(k3).is_subset(k1) && consistent(p1, p3),
            ExchangeRule::SwapConditionallyIndependent => conditional_swap_hypothesis(p1, p2, p3),
            ExchangeRule::RegroupCoveredBySecond => k1.intersection(k3).is_subset(k2),
            ExchangeRule::SwapFactorized => {
                consistent(p2, p3) && factorizes(p2, k1, k3) && factorizes(p3, k1, k2)
            }
        }
    }

    /// Evaluates both sides of the licensed identity.
    pub fn sides(
        self,
        p1: &Measure,
        p2: &Measure,
        p3: &Measure,
    ) -> Result<(Measure, Measure), CompositionError> {
        let lhs = compose_chain(&[p1.clone(), p2.clone(), p3.clone()], &[Right, Right])?;
        let (order, ops): ([&Measure; 3], [Direction; 2]) = match self {
            ExchangeRule::SwapCoveredByFirst
            | ExchangeRule::SwapConditionallyIndependent
            | ExchangeRule::SwapFactorized => ([p1, p3, p2], [Right, Right]),
            ExchangeRule::MoveSecondLast => ([p1, p3, p2], [Right, Left]),
            ExchangeRule::LeftComposeThird => ([p1, p2, p3], [Right, Left]),
            ExchangeRule::RegroupCoveredBySecond => ([p2, p3, p1], [Right, Left]),
        };
        let rhs = compose_chain(&order.map(Measure::clone), &ops)?;
        Ok((lhs, rhs))
    }
}

impl fmt::Display for ExchangeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Every rule whose hypothesis holds for the triple.
pub fn applicable_exchange_rules(p1: &Measure, p2: &Measure, p3: &Measure) -> BTreeSet<ExchangeRule> {
    ExchangeRule::ALL
        .into_iter()
        .filter(|r| r.applies(p1, p2, p3))
        .collect()
}

fn marginal(p: &Measure, onto: &Scope) -> Potential {
    Potential::from(p.marginalize(onto).expect("sub-scope of the measure"))
}

fn products_agree(a: &Potential, b: &Potential, c: &Potential, d: &Potential) -> bool {
    let left = a.product(b).expect("shared universe");
    let right = c.product(d).expect("shared universe");
    left.max_abs_diff(&right).is_some_and(|e| e <= EQ_TOL)
}

/// `P^(K ∩ A) · P^(K ∩ B) = P^(K ∩ (A ∪ B)) · P^(K ∩ A ∩ B)`.
fn splits(p: &Measure, a: &Scope, b: &Scope) -> bool {
    let k = p.scope();
    products_agree(
        &marginal(p, &k.intersection(a)),
        &marginal(p, &k.intersection(b)),
        &marginal(p, &k.intersection(&a.union(b))),
        &marginal(p, &k.intersection(a).intersection(b)),
    )
}

fn conditional_swap_hypothesis(p1: &Measure, p2: &Measure, p3: &Measure) -> bool {
    let (k1, k2, k3) = (p1.scope(), p2.scope(), p3.scope());
    if !splits(p2, k3, k1) || !splits(p3, k2, k1) {
        return false;
    }
    // P2^(K2∩K3) / P2^(K123) = P3^(K2∩K3) / P3^(K123), cross-multiplied and
    // skipping cells where both denominators vanish.
    let k23 = k2.intersection(k3);
    let k123 = k23.intersection(k1);
    let (a, b) = (p2.marginalize(&k23).unwrap(), p3.marginalize(&k23).unwrap());
    if a.cards() != b.cards() {
        return false;
    }
    let (da, db) = (p2.marginalize(&k123).unwrap(), p3.marginalize(&k123).unwrap());
    let map = projection_map(&k23, a.cards(), &k123);
    a.table()
        .iter()
        .zip(b.table())
        .zip(&map)
        .all(|((&na, &nb), &j)| {
            let (dna, dnb) = (da.table()[j], db.table()[j]);
            (is_zero(dna) && is_zero(dnb)) || (na * dnb - nb * dna).abs() <= EQ_TOL
        })
}

/// `Pi^(Ki ∩ (K1 ∪ Kj)) = Pi^((Ki ∩ K1) ∖ Kj) · Pi^(Ki ∩ Kj)`.
fn factorizes(p: &Measure, k1: &Scope, kj: &Scope) -> bool {
    let k = p.scope();
    let whole = marginal(p, &k.intersection(&k1.union(kj)));
    let own = marginal(p, &k.intersection(k1).difference(kj));
    let shared = marginal(p, &k.intersection(kj));
    own.product(&shared)
        .expect("shared universe")
        .max_abs_diff(&whole)
        .is_some_and(|e| e <= EQ_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scope::VariableTable;

    fn universe() -> VariableTable {
        VariableTable::from_cardinalities((1..=5).map(|v| (v, 2))).unwrap()
    }

    fn seeded(vars: &[u32], seed: u64) -> Measure {
        let scope = Scope::new(vars.iter().copied());
        let n = 1 << scope.len();
        // deterministic, strictly positive and irregular
        let raw: Vec<f64> = (0..n)
            .map(|i| 1.0 + ((i as u64 * 7919 + seed * 104729) % 97) as f64)
            .collect();
        let s: f64 = raw.iter().sum();
        Measure::new(scope, raw.iter().map(|v| v / s).collect(), &universe()).unwrap()
    }

    #[test]
    fn disjoint_overlap_licenses_swap() {
        let p1 = seeded(&[1, 2, 3], 1);
        let p2 = seeded(&[2, 4], 2);
        let p3 = seeded(&[3, 5], 3);
        let rules = applicable_exchange_rules(&p1, &p2, &p3);
        assert!(rules.contains(&ExchangeRule::SwapCoveredByFirst));
        for r in &rules {
            let (a, b) = r.sides(&p1, &p2, &p3).unwrap();
            assert!(a.approx_eq(&b, 1e-12), "{r}");
        }
    }

    #[test]
    fn generic_cyclic_triple_licenses_nothing() {
        let p1 = seeded(&[1, 2], 11);
        let p2 = seeded(&[2, 3], 12);
        let p3 = seeded(&[1, 3], 13);
        assert!(applicable_exchange_rules(&p1, &p2, &p3).is_empty());
    }

    #[test]
    fn shared_factor_licenses_factorized_swap() {
        // K1 = {1,2,3}, K2 = {1,2,4}, K3 = {2,3,5}; K2 ∩ K3 = {2}.
        let shared = seeded(&[2], 5);
        let own2 = seeded(&[1], 6);
        let own3 = seeded(&[3], 7);
        let tail2 = Potential::from(seeded(&[1, 2, 4], 8)).condition_on(&Scope::new([1, 2])).unwrap();
        let tail3 = Potential::from(seeded(&[2, 3, 5], 9)).condition_on(&Scope::new([2, 3])).unwrap();
        let build = |own: &Measure, tail: &Potential| {
            Potential::from(shared.independent_product(own).unwrap())
                .product(tail)
                .unwrap()
                .into_measure()
                .unwrap()
        };
        let p1 = seeded(&[1, 2, 3], 10);
        let p2 = build(&own2, &tail2);
        let p3 = build(&own3, &tail3);
        assert_eq!(p2.scope(), &Scope::new([1, 2, 4]));
        let rules = applicable_exchange_rules(&p1, &p2, &p3);
        assert!(rules.contains(&ExchangeRule::SwapFactorized), "{rules:?}");
        assert!(rules.contains(&ExchangeRule::SwapConditionallyIndependent), "{rules:?}");
        let (a, b) = ExchangeRule::SwapFactorized.sides(&p1, &p2, &p3).unwrap();
        assert!(a.approx_eq(&b, 1e-12));
    }
}
