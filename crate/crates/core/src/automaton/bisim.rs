use std::collections::{BTreeMap, BTreeSet};

use super::HybridAutomaton;

/// Whether the initial modes of `a` and `b` are related by the greatest
/// discrete bisimulation over the labels both automata use. Flows, guards,
/// and edges with non-shared labels are ignored.
pub fn discretely_bisimilar(a: &HybridAutomaton, b: &HybridAutomaton) -> bool {
    let shared: BTreeSet<&str> = a
        .labels()
        .intersection(b.labels())
        .map(String::as_str)
        .collect();

    // States of the disjoint union: a's modes first, then b's.
    let index_a: BTreeMap<_, usize> = a.mode_ids().enumerate().map(|(i, m)| (m, i)).collect();
    let offset = index_a.len();
    let index_b: BTreeMap<_, usize> = b
        .mode_ids()
        .enumerate()
        .map(|(i, m)| (m, offset + i))
        .collect();
    let n = offset + index_b.len();

    let label_ids: BTreeMap<&str, usize> = shared.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let mut succ: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (aut, index) in [(a, &index_a), (b, &index_b)] {
        for (e, _) in aut.edges() {
            if let Some(&l) = label_ids.get(e.label.as_str()) {
                succ[index[&e.src]].push((l, index[&e.dst]));
            }
        }
    }

    let mut color = vec![0usize; n];
    let mut count = 1;
    loop {
        let mut sigs: BTreeMap<(usize, Vec<(usize, usize)>), usize> = BTreeMap::new();
        let mut next = vec![0usize; n];
        for s in 0..n {
            let mut moves: Vec<(usize, usize)> = succ[s].iter().map(|&(l, t)| (l, color[t])).collect();
            moves.sort_unstable();
            moves.dedup();
            let fresh = sigs.len();
            next[s] = *sigs.entry((color[s], moves)).or_insert(fresh);
        }
        color = next;
        if sigs.len() == count {
            break;
        }
        count = sigs.len();
    }
    color[index_a[&a.init_mode()]] == color[index_b[&b.init_mode()]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{Edge, ModeId};
    use crate::geometry::Rect;

    fn single() -> HybridAutomaton {
        HybridAutomaton::new(ModeId(0), Rect::full(1).unwrap(), vec![0.0]).unwrap()
    }

    fn with_edges(n: usize, edges: &[(usize, &str, usize)]) -> HybridAutomaton {
        let mut h = single();
        for i in 1..n {
            h.set_mode(ModeId(i), Rect::full(1).unwrap(), None).unwrap();
        }
        for &(s, l, d) in edges {
            h.set_edge(Edge::new(ModeId(s), l, ModeId(d)), Rect::full(1).unwrap()).unwrap();
        }
        h
    }

    #[test]
    fn reflexive() {
        let h = with_edges(3, &[(0, "a", 1), (1, "b", 2), (2, "a", 0)]);
        assert!(discretely_bisimilar(&h, &h));
    }

    #[test]
    fn non_shared_labels_are_ignored() {
        let chain = with_edges(2, &[(0, "fresh", 1)]);
        assert!(discretely_bisimilar(&single(), &chain));
    }

    #[test]
    fn unrolled_loop_is_bisimilar() {
        let looped = with_edges(1, &[(0, "a", 0)]);
        let two = with_edges(2, &[(0, "a", 1), (1, "a", 0)]);
        assert!(discretely_bisimilar(&looped, &two));
    }

    #[test]
    fn branching_difference_is_detected() {
        // a.(b + c) versus a.b + a.c
        let left = with_edges(4, &[(0, "a", 1), (1, "b", 2), (1, "c", 3)]);
        let right = with_edges(5, &[(0, "a", 1), (0, "a", 2), (1, "b", 3), (2, "c", 4)]);
        assert!(!discretely_bisimilar(&left, &right));
    }
}
