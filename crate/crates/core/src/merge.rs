//! Merging of constructed modes on discrete evidence.
//!
//! Two modes in the same abstract state are action-similar when they share
//! an incoming or an outgoing label, and terminal-similar when neither has
//! outgoing edges. The merge automaton is the quotient by the transitive
//! closure of both relations.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automaton::{HybridAutomaton, ModeId, Partition};
use crate::construct::ConstructionState;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", content = "label", rename_all = "kebab-case")]
pub enum Justification {
    SharedIn(String),
    SharedOut(String),
    Terminal,
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Justification::SharedIn(l) => write!(f, "shared incoming label {l}"),
            Justification::SharedOut(l) => write!(f, "shared outgoing label {l}"),
            Justification::Terminal => f.write_str("terminal"),
        }
    }
}

/// Modes that are pairwise related for one reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarityGroup {
    pub state: Option<String>,
    pub reason: Justification,
    /// Sorted, at least two members.
    pub members: Vec<ModeId>,
}

/// A symmetric relation stored as groups of pairwise related modes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimilarityRelation {
    pub groups: Vec<SimilarityGroup>,
}

impl SimilarityRelation {
    pub fn related(&self, a: ModeId, b: ModeId) -> bool {
        self.groups
            .iter()
            .any(|g| g.members.binary_search(&a).is_ok() && g.members.binary_search(&b).is_ok())
    }

    /// All related unordered pairs `(a, b)` with `a < b`, deduplicated.
    pub fn pairs(&self) -> Vec<(ModeId, ModeId)> {
        let mut out: Vec<_> = self
            .groups
            .iter()
            .flat_map(|g| {
                g.members
                    .iter()
                    .enumerate()
                    .flat_map(move |(i, a)| g.members[i + 1..].iter().map(move |b| (*a, *b)))
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    fn extend(&mut self, other: SimilarityRelation) {
        self.groups.extend(other.groups);
    }
}

fn grouped<K: Ord>(
    buckets: BTreeMap<(Option<String>, K), Vec<ModeId>>,
    reason: impl Fn(K) -> Justification,
) -> SimilarityRelation {
    let groups = buckets
        .into_iter()
        .filter(|(_, m)| m.len() > 1)
        .map(|((state, key), mut members)| {
            members.sort_unstable();
            SimilarityGroup {
                state,
                reason: reason(key),
                members,
            }
        })
        .collect();
    SimilarityRelation { groups }
}

/// Modes with equal abstract state sharing an incoming or outgoing label.
pub fn action_similarity(a: &HybridAutomaton) -> SimilarityRelation {
    let mut buckets: BTreeMap<(Option<String>, (bool, String)), Vec<ModeId>> = BTreeMap::new();
    for (m, (ins, outs)) in a.label_profile() {
        let state = a.tag(m).map(str::to_owned);
        for (incoming, labels) in [(true, ins), (false, outs)] {
            for l in labels {
                buckets
                    .entry((state.clone(), (incoming, l.to_owned())))
                    .or_default()
                    .push(m);
            }
        }
    }
    grouped(buckets, |(incoming, l)| {
        if incoming {
            Justification::SharedIn(l)
        } else {
            Justification::SharedOut(l)
        }
    })
}

/// Modes with equal abstract state and no outgoing edges.
pub fn terminal_similarity(a: &HybridAutomaton) -> SimilarityRelation {
    let mut buckets: BTreeMap<(Option<String>, ()), Vec<ModeId>> = BTreeMap::new();
    for (m, d) in a.outdegrees() {
        if d == 0 {
            buckets.entry((a.tag(m).map(str::to_owned), ())).or_default().push(m);
        }
    }
    grouped(buckets, |()| Justification::Terminal)
}

/// One union of two previously distinct classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub round: usize,
    pub a: ModeId,
    pub b: ModeId,
    pub reason: Justification,
}

fn partition_of(a: &HybridAutomaton, round: usize, events: &mut Vec<MergeEvent>) -> Partition {
    let mut rel = action_similarity(a);
    rel.extend(terminal_similarity(a));
    let mut p = Partition::covering(a.mode_ids());
    for g in &rel.groups {
        let first = g.members[0];
        for &m in &g.members[1..] {
            if p.union(first, m) {
                events.push(MergeEvent {
                    round,
                    a: first,
                    b: m,
                    reason: g.reason.clone(),
                });
            }
        }
    }
    p.flatten();
    p
}

/// The finest equivalence containing action and terminal similarity.
pub fn merge_partition(a: &HybridAutomaton) -> Partition {
    partition_of(a, 0, &mut Vec::new())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeOptions {
    /// Repeat merging on the quotient until nothing changes.
    pub fixpoint: bool,
}

#[derive(Debug, Clone)]
pub struct MergeOutcome {
    pub automaton: HybridAutomaton,
    pub events: Vec<MergeEvent>,
    pub rounds: usize,
}

/// Quotients `a` by its merge partition and canonicalizes the result.
pub fn merge_automaton(a: &HybridAutomaton, opts: MergeOptions) -> Result<MergeOutcome> {
    let mut current = a.clone();
    let mut events = Vec::new();
    let mut rounds = 0;
    loop {
        let before = events.len();
        let p = partition_of(&current, rounds, &mut events);
        rounds += 1;
        let changed = events.len() > before;
        if changed {
            current = current.quotient(&p)?;
        }
        if !opts.fixpoint || !changed {
            break;
        }
    }
    Ok(MergeOutcome {
        automaton: current.canonicalize(),
        events,
        rounds,
    })
}

/// One merge round over a construction state.
pub fn merge(st: &ConstructionState) -> Result<HybridAutomaton> {
    Ok(merge_automaton(&st.aut, MergeOptions::default())?.automaton)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::Edge;
    use crate::geometry::Rect;

    fn aut(tags: &[&str], edges: &[(usize, &str, usize)]) -> HybridAutomaton {
        let r = |v: f64| Rect::singular(&[v]).unwrap();
        let mut h = HybridAutomaton::new(ModeId(0), r(0.0), vec![0.0]).unwrap();
        for (i, t) in tags.iter().enumerate() {
            h.set_mode(ModeId(i), r(i as f64), Some((*t).to_owned())).unwrap();
        }
        for &(s, l, d) in edges {
            h.set_edge(Edge::new(ModeId(s), l, ModeId(d)), Rect::full(1).unwrap()).unwrap();
        }
        h
    }

    #[test]
    fn action_similarity_respects_states() {
        let h = aut(&["a", "b", "b", "c"], &[(0, "x", 1), (0, "x", 2), (0, "x", 3)]);
        let rel = action_similarity(&h);
        assert!(rel.related(ModeId(1), ModeId(2)));
        assert!(!rel.related(ModeId(1), ModeId(3)));
        assert_eq!(rel.pairs(), vec![(ModeId(1), ModeId(2))]);
    }

    #[test]
    fn terminal_similarity_only_relates_leaves() {
        let h = aut(&["a", "a", "a", "b"], &[(0, "x", 1), (0, "y", 2), (0, "z", 3)]);
        let rel = terminal_similarity(&h);
        assert_eq!(rel.pairs(), vec![(ModeId(1), ModeId(2))]);
        assert!(!rel.related(ModeId(0), ModeId(1)));
    }

    #[test]
    fn closure_is_transitive() {
        // 1 ~ 2 via incoming x, 2 ~ 3 via outgoing y
        let h = aut(
            &["s", "t", "t", "t", "u", "u"],
            &[(0, "x", 1), (0, "x", 2), (2, "y", 4), (3, "y", 5), (0, "z", 3)],
        );
        let p = merge_partition(&h);
        assert!(p.same(ModeId(1), ModeId(3)));
        assert!(!p.same(ModeId(0), ModeId(1)));
    }

    #[test]
    fn empty_similarity_gives_identity() {
        let h = aut(&["a", "b"], &[(0, "x", 1)]);
        let out = merge_automaton(&h, MergeOptions::default()).unwrap();
        assert!(out.events.is_empty());
        assert_eq!(out.automaton, h.canonicalize());
    }

    #[test]
    fn merged_flows_are_hulls() {
        let h = aut(&["a", "b", "b"], &[(0, "x", 1), (0, "x", 2)]);
        let out = merge_automaton(&h, MergeOptions::default()).unwrap();
        let m = out.automaton;
        assert_eq!(m.mode_count(), 2);
        assert_eq!(m.flow(ModeId(1)).unwrap(), &Rect::from_bounds(&[(1.0, 2.0)]).unwrap());
        assert_eq!(out.events.len(), 1);
    }

    #[test]
    fn one_round_is_already_a_fixpoint() {
        // labels of a class are the union of its members' labels, so any
        // label shared between two classes was shared by two members
        let h = aut(
            &["s", "t", "t", "u", "u", "u"],
            &[(0, "x", 1), (0, "x", 2), (1, "y", 3), (2, "z", 4), (3, "w", 5)],
        );
        let once = merge_automaton(&h, MergeOptions::default()).unwrap();
        let fix = merge_automaton(&h, MergeOptions { fixpoint: true }).unwrap();
        assert_eq!(fix.automaton, once.automaton);
        assert_eq!((once.rounds, fix.rounds), (1, 2));
        assert_eq!(fix.events, once.events);
    }
}
