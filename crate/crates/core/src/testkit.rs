//! Random fixtures for property suites.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::junction::has_rip;
use crate::measure::Measure;
use crate::potential::Potential;
use crate::rules::ExchangeRule;
use crate::scope::{Scope, VarId, VariableTable};
use crate::sequence::{perfectize, MeasureSequence};

/// Variables `1..=cards.len()` with the given cardinalities.
pub fn universe(cards: &[usize]) -> VariableTable {
    VariableTable::from_cardinalities(cards.iter().enumerate().map(|(i, &c)| (i as VarId + 1, c)))
        .expect("valid cardinalities")
}

pub fn random_universe<R: Rng>(rng: &mut R, vars: usize, max_card: usize) -> VariableTable {
    let cards: Vec<usize> = (0..vars).map(|_| rng.gen_range(2..=max_card.max(2))).collect();
    universe(&cards)
}

fn cards(scope: &Scope, universe: &VariableTable) -> Vec<usize> {
    universe.cards_of(scope).expect("scope within universe")
}

/// Nonnegative table with entries in `[0.05, 1)` before normalization.
pub fn random_potential<R: Rng>(rng: &mut R, scope: &Scope, universe: &VariableTable) -> Potential {
    let cards = cards(scope, universe);
    let n = cards.iter().product();
    let values = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    Potential::new(scope.clone(), cards, values).expect("valid shape")
}

pub fn random_positive<R: Rng>(rng: &mut R, scope: &Scope, universe: &VariableTable) -> Measure {
    normalize(random_potential(rng, scope, universe))
}

/// Like [`random_positive`] but each cell is zero with probability
/// `zero_prob` (at least one cell stays positive).
pub fn random_sparse<R: Rng>(rng: &mut R, scope: &Scope, universe: &VariableTable, zero_prob: f64) -> Measure {
    let p = random_potential(rng, scope, universe);
    let mut values = p.values().to_vec();
    let keep = rng.gen_range(0..values.len());
    for (i, v) in values.iter_mut().enumerate() {
        if i != keep && rng.gen_bool(zero_prob) {
            *v = 0.0;
        }
    }
    normalize(Potential::new(scope.clone(), p.cards().to_vec(), values).unwrap())
}

/// Rescales a potential with positive mass to a measure.
pub fn normalize(p: Potential) -> Measure {
    let total = p.total();
    let values = p.values().iter().map(|v| v / total).collect();
    Measure::with_cards(p.scope().clone(), p.cards().to_vec(), values).expect("positive mass")
}

/// Random conditional table of `scope ∖ given` given `given`.
pub fn random_conditional<R: Rng>(
    rng: &mut R,
    scope: &Scope,
    given: &Scope,
    universe: &VariableTable,
) -> Potential {
    random_potential(rng, scope, universe)
        .condition_on(given)
        .expect("given is a subset")
}

/// Each variable of `from` independently with probability `p`.
pub fn random_subset<R: Rng>(rng: &mut R, from: &Scope, p: f64) -> Scope {
    from.iter().filter(|_| rng.gen_bool(p)).collect()
}

pub fn random_nonempty_subset<R: Rng>(rng: &mut R, from: &Scope, p: f64) -> Scope {
    loop {
        let s = random_subset(rng, from, p);
        if !s.is_empty() || from.is_empty() {
            return s;
        }
    }
}

/// A family of `m` scopes in RIP order whose union is `vars`. Every set
/// after the first shares a random part of one earlier set and adds new
/// variables.
pub fn random_rip_family<R: Rng>(rng: &mut R, vars: &Scope, m: usize) -> Vec<Scope> {
    let mut pool: Vec<VarId> = vars.vars().to_vec();
    pool.shuffle(rng);
    let m = m.clamp(1, pool.len().max(1));
    // split the shuffled pool into m nonempty chunks of fresh variables
    let mut cuts: Vec<usize> = (1..pool.len()).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(m - 1).collect();
    cuts.sort_unstable();
    let mut fresh = Vec::with_capacity(m);
    let mut start = 0;
    for c in cuts.into_iter().chain([pool.len()]) {
        fresh.push(Scope::new(pool[start..c].iter().copied()));
        start = c;
    }
    let mut family: Vec<Scope> = Vec::with_capacity(m);
    for new_vars in fresh {
        let set = if family.is_empty() {
            new_vars
        } else {
            let parent = &family[rng.gen_range(0..family.len())];
            random_subset(rng, parent, 0.6).union(&new_vars)
        };
        family.push(set);
    }
    debug_assert!(has_rip(&family));
    family
}

/// Scopes that each fit inside some set of `covering` and together span
/// its union, in random order.
pub fn scopes_within<R: Rng>(rng: &mut R, covering: &[Scope], extra: usize) -> Vec<Scope> {
    let mut scopes: Vec<Scope> = covering
        .iter()
        .map(|l| random_nonempty_subset(rng, l, 0.7))
        .collect();
    for _ in 0..extra {
        let l = &covering[rng.gen_range(0..covering.len())];
        scopes.push(random_nonempty_subset(rng, l, 0.5));
    }
    let span = Scope::union_all(&scopes);
    for l in covering {
        let missing = l.difference(&span);
        if !missing.is_empty() {
            scopes.push(random_subset(rng, l, 0.5).union(&missing));
        }
    }
    scopes.shuffle(rng);
    scopes
}

/// A perfect sequence over `scopes`, obtained by perfectizing random
/// strictly positive measures.
pub fn random_perfect_sequence<R: Rng>(rng: &mut R, scopes: &[Scope], universe: &VariableTable) -> MeasureSequence {
    let raw = scopes.iter().map(|k| random_positive(rng, k, universe)).collect();
    perfectize(&MeasureSequence::new(raw).unwrap()).expect("positive measures compose")
}

/// Marginals of one joint measure on the given scopes.
pub fn marginals_of(joint: &Measure, scopes: &[Scope]) -> MeasureSequence {
    MeasureSequence::new(
        scopes
            .iter()
            .map(|k| joint.marginalize(k).expect("scope within the joint"))
            .collect(),
    )
    .unwrap()
}

/// Same marginal on `shared`, new conditional for the rest of `scope`:
/// the result is consistent with `m` but generally differs from it.
pub fn reconditioned<R: Rng>(rng: &mut R, m: &Measure, shared: &Scope, universe: &VariableTable) -> Measure {
    let head = Potential::from(m.marginalize(shared).unwrap());
    let tail = random_conditional(rng, m.scope(), shared, universe);
    normalize(head.product(&tail).unwrap())
}

/// A measure on the scope of `m` whose marginal on `shared` is replaced by a
/// fresh random one; the conditional of the rest is kept.
pub fn with_marginal<R: Rng>(rng: &mut R, m: &Measure, shared: &Scope, universe: &VariableTable) -> Measure {
    let head = random_positive(rng, shared, universe);
    let tail = Potential::from(m).condition_on(shared).unwrap();
    normalize(Potential::from(head).product(&tail).unwrap())
}

/// A random measure on `scope` consistent with `p`: its marginal on the
/// shared variables is taken from `p`, the rest is a fresh conditional.
pub fn consistent_with<R: Rng>(rng: &mut R, p: &Measure, scope: &Scope, universe: &VariableTable) -> Measure {
    let shared = scope.intersection(p.scope());
    let head = Potential::from(p.marginalize(&shared).unwrap());
    let tail = random_conditional(rng, scope, &shared, universe);
    normalize(head.product(&tail).unwrap())
}

/// Random strictly positive triple meeting the hypothesis of `rule` by
/// construction, over nonempty scopes drawn from `vars`.
pub fn rule_fixture<R: Rng>(
    rng: &mut R,
    rule: ExchangeRule,
    vars: &Scope,
    universe: &VariableTable,
) -> [Measure; 3] {
    let mut k = [0; 3].map(|_| random_nonempty_subset(rng, vars, 0.5));
    let positive = |rng: &mut R, s: &Scope| random_positive(rng, s, universe);
    match rule {
        ExchangeRule::SwapCoveredByFirst => {
            k[0] = k[0].union(&k[1].intersection(&k[2]));
            let [a, b, c] = &k;
            [positive(rng, a), positive(rng, b), positive(rng, c)]
        }
        ExchangeRule::RegroupCoveredBySecond => {
            k[1] = k[1].union(&k[0].intersection(&k[2]));
            let [a, b, c] = &k;
            [positive(rng, a), positive(rng, b), positive(rng, c)]
        }
        ExchangeRule::MoveSecondLast => {
            k[1] = k[1].union(&k[0].intersection(&k[2]));
            let p1 = positive(rng, &k[0]);
            let p2 = consistent_with(rng, &p1, &k[1], universe);
            [p1, p2, positive(rng, &k[2])]
        }
        ExchangeRule::LeftComposeThird => {
            k[0] = k[0].union(&k[1].intersection(&k[2]));
            let p1 = positive(rng, &k[0]);
            let p3 = consistent_with(rng, &p1, &k[2], universe);
            [p1, positive(rng, &k[1]), p3]
        }
        ExchangeRule::SwapConditionallyIndependent => {
            // Pi = Gi(T) · C(K23 | T) · Di(own part of K1 | T) · Ei(rest | Ki ∩ (K1 ∪ Kj))
            let t = k[0].intersection(&k[1]).intersection(&k[2]);
            let k23 = k[1].intersection(&k[2]);
            let shared = random_conditional(rng, &k23, &t, universe);
            let build = |rng: &mut R, ki: &Scope, kj: &Scope| {
                let own = ki.intersection(&k[0]).difference(kj).union(&t);
                let g = random_potential(rng, &t, universe);
                let d = random_conditional(rng, &own, &t, universe);
                let known = ki.intersection(&k[0].union(kj));
                let e = random_conditional(rng, ki, &known, universe);
                normalize(g.product(&shared).unwrap().product(&d).unwrap().product(&e).unwrap())
            };
            let p2 = build(rng, &k[1], &k[2]);
            let p3 = build(rng, &k[2], &k[1]);
            [positive(rng, &k[0]), p2, p3]
        }
        ExchangeRule::SwapFactorized => {
            // Pi = F(K23) · Ai((Ki ∩ K1) ∖ Kj) · Ei(rest | Ki ∩ (K1 ∪ Kj))
            let k23 = k[1].intersection(&k[2]);
            let f = random_potential(rng, &k23, universe);
            let build = |rng: &mut R, ki: &Scope, kj: &Scope| {
                let a = random_potential(rng, &ki.intersection(&k[0]).difference(kj), universe);
                let known = ki.intersection(&k[0].union(kj));
                let e = random_conditional(rng, ki, &known, universe);
                normalize(f.product(&a).unwrap().product(&e).unwrap())
            };
            let p2 = build(rng, &k[1], &k[2]);
            let p3 = build(rng, &k[2], &k[1]);
            [positive(rng, &k[0]), p2, p3]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::is_perfect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rip_family_covers_and_meets_rip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vars = Scope::new(1..=7);
        for m in 1..=4 {
            for _ in 0..50 {
                let f = random_rip_family(&mut rng, &vars, m);
                assert_eq!(f.len(), m);
                assert!(has_rip(&f));
                assert_eq!(Scope::union_all(&f), vars);
            }
        }
    }

    #[test]
    fn rule_fixtures_meet_their_hypotheses() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = universe(&[2, 3, 2, 2, 3]);
        for rule in ExchangeRule::ALL {
            for _ in 0..40 {
                let [p1, p2, p3] = rule_fixture(&mut rng, rule, &u.all(), &u);
                assert!(rule.applies(&p1, &p2, &p3), "{rule}");
            }
        }
    }

    #[test]
    fn generated_sequences_are_perfect() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = universe(&[2, 3, 2, 2, 3]);
        let cov = random_rip_family(&mut rng, &u.all(), 3);
        let scopes = scopes_within(&mut rng, &cov, 2);
        assert_eq!(Scope::union_all(&scopes), u.all());
        let seq = random_perfect_sequence(&mut rng, &scopes, &u);
        assert!(is_perfect(&seq).unwrap());
    }
}
