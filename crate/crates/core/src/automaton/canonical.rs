//! Canonical renumbering of modes.
//!
//! Modes are first colored by iterated refinement over their own content
//! (flow, tag) and the colors of their successors. Colors are ranks of sorted
//! signatures, so they do not depend on the original numbering. Modes are
//! then numbered breadth-first from the initial mode, visiting successors in
//! `(label, guard, color, old id)` order; unreachable modes come last.

use std::cmp::Ordering;
use std::collections::{BTreeMap, VecDeque};

use super::{HybridAutomaton, ModeId};
use crate::geometry::Rect;

#[derive(Clone, PartialEq)]
struct Key<'a> {
    color: usize,
    succ: Vec<(&'a str, &'a Rect, usize)>,
}

impl Eq for Key<'_> {}

impl PartialOrd for Key<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.color.cmp(&other.color).then_with(|| {
            for (a, b) in self.succ.iter().zip(&other.succ) {
                let ord = a
                    .0
                    .cmp(b.0)
                    .then_with(|| a.1.total_cmp(b.1))
                    .then_with(|| a.2.cmp(&b.2));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            self.succ.len().cmp(&other.succ.len())
        })
    }
}

fn initial_colors(a: &HybridAutomaton) -> BTreeMap<ModeId, usize> {
    let mut keys: Vec<(&Rect, Option<&str>)> =
        a.modes.values().map(|m| (&m.flow, m.tag.as_deref())).collect();
    let cmp = |x: &(&Rect, Option<&str>), y: &(&Rect, Option<&str>)| {
        x.0.total_cmp(y.0).then_with(|| x.1.cmp(&y.1))
    };
    keys.sort_by(cmp);
    keys.dedup_by(|x, y| cmp(x, y) == Ordering::Equal);
    a.modes
        .iter()
        .map(|(id, m)| {
            let k = (&m.flow, m.tag.as_deref());
            let rank = keys.binary_search_by(|probe| cmp(probe, &k)).expect("key present");
            (*id, rank)
        })
        .collect()
}

fn refine(a: &HybridAutomaton) -> BTreeMap<ModeId, usize> {
    let mut colors = initial_colors(a);
    let mut count = colors.values().max().map_or(0, |c| c + 1);
    loop {
        let sigs: BTreeMap<ModeId, Key> = a
            .modes
            .keys()
            .map(|&m| {
                let mut succ: Vec<_> = a
                    .outgoing(m)
                    .map(|(e, g)| (e.label.as_str(), g, colors[&e.dst]))
                    .collect();
                succ.sort_by(|x, y| {
                    x.0.cmp(y.0)
                        .then_with(|| x.1.total_cmp(y.1))
                        .then_with(|| x.2.cmp(&y.2))
                });
                succ.dedup_by(|x, y| x.0 == y.0 && x.1 == y.1 && x.2 == y.2);
                (m, Key { color: colors[&m], succ })
            })
            .collect();
        let mut sorted: Vec<&Key> = sigs.values().collect();
        sorted.sort();
        sorted.dedup();
        let next: BTreeMap<ModeId, usize> = sigs
            .iter()
            .map(|(m, k)| (*m, sorted.binary_search(&k).expect("key present")))
            .collect();
        let next_count = sorted.len();
        colors = next;
        if next_count == count {
            return colors;
        }
        count = next_count;
    }
}

pub(super) fn canonicalize(a: &HybridAutomaton) -> HybridAutomaton {
    let colors = refine(a);
    let mut map: BTreeMap<ModeId, ModeId> = BTreeMap::new();
    let mut queue = VecDeque::from([a.init_mode]);
    map.insert(a.init_mode, ModeId(0));
    while let Some(m) = queue.pop_front() {
        let mut succ: Vec<_> = a.outgoing(m).collect();
        succ.sort_by(|(e1, g1), (e2, g2)| {
            e1.label
                .cmp(&e2.label)
                .then_with(|| g1.total_cmp(g2))
                .then_with(|| colors[&e1.dst].cmp(&colors[&e2.dst]))
                .then_with(|| e1.dst.cmp(&e2.dst))
        });
        for (e, _) in succ {
            if !map.contains_key(&e.dst) {
                map.insert(e.dst, ModeId(map.len()));
                queue.push_back(e.dst);
            }
        }
    }
    let mut rest: Vec<ModeId> = a.modes.keys().filter(|m| !map.contains_key(m)).copied().collect();
    rest.sort_by_key(|m| (colors[m], *m));
    for m in rest {
        map.insert(m, ModeId(map.len()));
    }
    a.renumbered(&map)
}
