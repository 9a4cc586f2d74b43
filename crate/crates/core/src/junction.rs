//! Running intersection property and junction trees over scope families.

use std::collections::VecDeque;

use petgraph::algo::min_spanning_tree;
use petgraph::data::Element;
use petgraph::graph::UnGraph;

use crate::scope::Scope;

/// `true` iff every scope's intersection with the union of the earlier ones
/// is contained in a single earlier scope.
pub fn has_rip(scopes: &[Scope]) -> bool {
    let mut seen = Scope::empty();
    for (i, k) in scopes.iter().enumerate() {
        if i >= 2 {
            let overlap = k.intersection(&seen);
            if !scopes[..i].iter().any(|earlier| overlap.is_subset(earlier)) {
                return false;
            }
        }
        seen = seen.union(k);
    }
    true
}

/// A permutation of a scope family that satisfies the running intersection
/// property, with the witness of every step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RipOrdering {
    /// Indices into the original family, `order[0]` being the root.
    pub order: Vec<usize>,
    /// `witnesses[k]` is a position `l < k` in `order` whose set contains the
    /// overlap of set `order[k]` with everything placed before it.
    /// `None` for the root.
    pub witnesses: Vec<Option<usize>>,
}

impl RipOrdering {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The family permuted into this ordering.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.order.iter().map(|&i| items[i].clone()).collect()
    }

    /// Witness given as an index into the original family.
    pub fn witness_index(&self, position: usize) -> Option<usize> {
        self.witnesses[position].map(|l| self.order[l])
    }

    /// Checks the ordering against `sets`: it is a permutation, satisfies the
    /// running intersection property and every recorded witness is valid.
    pub fn is_valid_for(&self, sets: &[Scope]) -> bool {
        let mut seen_idx = vec![false; sets.len()];
        if self.order.len() != sets.len() || self.witnesses.len() != sets.len() {
            return false;
        }
        for &i in &self.order {
            if i >= sets.len() || std::mem::replace(&mut seen_idx[i], true) {
                return false;
            }
        }
        let mut seen = Scope::empty();
        for (k, &i) in self.order.iter().enumerate() {
            let overlap = sets[i].intersection(&seen);
            match self.witnesses[k] {
                None if k == 0 => {}
                Some(l) if l < k && overlap.is_subset(&sets[self.order[l]]) => {}
                _ => return false,
            }
            seen = seen.union(&sets[i]);
        }
        true
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Traversal {
    #[default]
    BreadthFirst,
    DepthFirst,
}

/// A tree over the sets of a family such that the sets containing any given
/// variable form a connected subtree.
#[derive(Clone, Debug)]
pub struct JunctionTree {
    sets: Vec<Scope>,
    adjacency: Vec<Vec<usize>>,
}

impl JunctionTree {
    /// Builds a maximum-weight spanning tree of the intersection graph
    /// (weights `|Li ∩ Lj|`) and accepts it only if it is a junction tree.
    /// Returns `None` for families that are not decomposable.
    pub fn build(sets: &[Scope]) -> Option<JunctionTree> {
        let n = sets.len();
        let mut graph = UnGraph::<usize, i64>::with_capacity(n, n * n.saturating_sub(1) / 2);
        let nodes: Vec<_> = (0..n).map(|i| graph.add_node(i)).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = sets[i].intersection(&sets[j]).len() as i64;
                graph.add_edge(nodes[i], nodes[j], -w);
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for element in min_spanning_tree(&graph) {
            if let Element::Edge { source, target, .. } = element {
                adjacency[source].push(target);
                adjacency[target].push(source);
            }
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        let tree = JunctionTree {
            sets: sets.to_vec(),
            adjacency,
        };
        tree.is_junction_tree().then_some(tree)
    }

    pub fn sets(&self) -> &[Scope] {
        &self.sets
    }

    pub fn neighbours(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, a)| a.iter().filter(move |&&j| i < j).map(move |&j| (i, j)))
    }

    fn is_junction_tree(&self) -> bool {
        let n = self.sets.len();
        if n == 0 {
            return true;
        }
        let edge_count: usize = self.adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        if edge_count != n - 1 {
            return false;
        }
        let all = Scope::union_all(&self.sets);
        let connected = all.iter().all(|var| {
            let holders: Vec<usize> = (0..n).filter(|&i| self.sets[i].contains(var)).collect();
            let mut reached = vec![false; n];
            let mut queue = VecDeque::from([holders[0]]);
            reached[holders[0]] = true;
            let mut count = 1;
            while let Some(u) = queue.pop_front() {
                for &w in &self.adjacency[u] {
                    if !reached[w] && self.sets[w].contains(var) {
                        reached[w] = true;
                        count += 1;
                        queue.push_back(w);
                    }
                }
            }
            count == holders.len()
        });
        connected
    }

    /// Parent-before-child ordering rooted at `root`; each node's witness is
    /// its tree parent.
    pub fn ordering(&self, root: usize, traversal: Traversal) -> RipOrdering {
        let n = self.sets.len();
        let mut position = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut witnesses = Vec::with_capacity(n);
        // (node, parent position)
        let mut frontier: VecDeque<(usize, Option<usize>)> = VecDeque::from([(root, None)]);
        while let Some((u, parent)) = match traversal {
            Traversal::BreadthFirst => frontier.pop_front(),
            Traversal::DepthFirst => frontier.pop_back(),
        } {
            if position[u] != usize::MAX {
                continue;
            }
            position[u] = order.len();
            order.push(u);
            witnesses.push(parent);
            let children = self.adjacency[u].iter().filter(|&&w| position[w] == usize::MAX);
            match traversal {
                Traversal::BreadthFirst => frontier.extend(children.map(|&w| (w, Some(position[u])))),
                Traversal::DepthFirst => {
                    let children: Vec<_> = children.collect();
                    frontier.extend(children.into_iter().rev().map(|&w| (w, Some(position[u]))));
                }
            }
        }
        RipOrdering { order, witnesses }
    }
}

/// Reorders a decomposable covering so that it starts at `root` and meets the
/// running intersection property. `None` if no such ordering exists.
pub fn find_rip_ordering(covering: &[Scope], root: usize) -> Option<RipOrdering> {
    if root >= covering.len() {
        return None;
    }
    let ordering = JunctionTree::build(covering)?.ordering(root, Traversal::BreadthFirst);
    debug_assert!(ordering.is_valid_for(covering));
    Some(ordering)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(v: &[u32]) -> Scope {
        Scope::new(v.iter().copied())
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    /// Exhaustive search over all orderings starting at `root`.
    fn exhaustive(sets: &[Scope], root: usize) -> bool {
        permutations(sets.len())
            .into_iter()
            .filter(|p| p[0] == root)
            .any(|p| has_rip(&p.iter().map(|&i| sets[i].clone()).collect::<Vec<_>>()))
    }

    #[test]
    fn rip_examples() {
        assert!(has_rip(&[s(&[1, 2]), s(&[2, 3]), s(&[3, 4])]));
        assert!(!has_rip(&[s(&[1, 2]), s(&[3, 4]), s(&[1, 3])]));
        assert!(has_rip(&[s(&[1, 2])]));
        assert!(has_rip(&[]));
    }

    #[test]
    fn chain_rooted_in_the_middle() {
        let sets = [s(&[1, 2]), s(&[2, 3]), s(&[3, 4])];
        let o = find_rip_ordering(&sets, 1).unwrap();
        assert_eq!(o.order, vec![1, 0, 2]);
        assert_eq!(o.witnesses, vec![None, Some(0), Some(0)]);
        assert!(o.is_valid_for(&sets));
    }

    #[test]
    fn cyclic_covering_has_no_ordering() {
        let sets = [s(&[1, 2]), s(&[2, 3]), s(&[1, 3])];
        for root in 0..3 {
            assert!(find_rip_ordering(&sets, root).is_none());
            assert!(!exhaustive(&sets, root));
        }
    }

    #[test]
    fn single_set_and_bad_root() {
        let sets = [s(&[1, 2])];
        let o = find_rip_ordering(&sets, 0).unwrap();
        assert_eq!(o.order, vec![0]);
        assert!(find_rip_ordering(&sets, 1).is_none());
    }

    #[test]
    fn depth_first_ordering_is_also_valid() {
        let sets = [s(&[1, 2]), s(&[2, 3]), s(&[2, 4]), s(&[4, 5]), s(&[3, 6])];
        let tree = JunctionTree::build(&sets).unwrap();
        for root in 0..sets.len() {
            for t in [Traversal::BreadthFirst, Traversal::DepthFirst] {
                assert!(tree.ordering(root, t).is_valid_for(&sets));
            }
        }
    }

    fn arb_family() -> impl Strategy<Value = Vec<Scope>> {
        proptest::collection::vec(proptest::collection::btree_set(1u32..=6, 0..=3), 1..=6)
            .prop_map(|sets| sets.into_iter().map(Scope::new).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn spanning_tree_agrees_with_exhaustive_search(sets in arb_family(), root in 0usize..6) {
            let root = root % sets.len();
            let found = find_rip_ordering(&sets, root);
            prop_assert_eq!(found.is_some(), exhaustive(&sets, root));
            if let Some(o) = found {
                prop_assert!(o.is_valid_for(&sets));
                prop_assert!(has_rip(&o.apply(&sets)));
                prop_assert_eq!(o.order[0], root);
            }
        }
    }
}
