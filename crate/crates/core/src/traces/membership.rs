use std::collections::HashSet;

use super::{ObservableTrace, OmniscientTrace};
use crate::automaton::{Edge, HybridAutomaton, ModeId};

/// An omniscient trace certifying that an observable trace is accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub trace: OmniscientTrace,
}

pub fn accepts(a: &HybridAutomaton, t: &ObservableTrace) -> Option<Witness> {
    accepts_eps(a, t, 0.0)
}

/// Membership query. Searches depth-first over `(step, mode)` pairs, trying
/// outgoing edges in `(label, dst)` order and remembering pairs from which
/// the rest of the trace was already shown unreachable.
pub fn accepts_eps(a: &HybridAutomaton, t: &ObservableTrace, eps: f64) -> Option<Witness> {
    if t.check_shape().is_err() || t.dim() != a.dim() {
        return None;
    }
    if !t.x0.iter().zip(a.init_x()).all(|(x, y)| (x - y).abs() <= eps) {
        return None;
    }
    let admits = |m: ModeId, j: usize| {
        let s = &t.steps[j];
        a.flow(m)
            .and_then(|f| f.admits_delay(t.point(j), &s.x, s.delay, eps))
            .unwrap_or(false)
    };
    if !admits(a.init_mode(), 0) {
        return None;
    }

    // Each frame holds the candidate edges for step `j` taken from `mode`.
    struct Frame {
        j: usize,
        mode: ModeId,
        candidates: Vec<Edge>,
        next: usize,
    }
    let candidates = |m: ModeId, j: usize| -> Vec<Edge> {
        let Some(label) = t.steps.get(j).and_then(|s| s.label.as_deref()) else {
            return Vec::new();
        };
        let x = t.point(j);
        a.outgoing_with(m, label)
            .filter(|(_, g)| g.contains_point_eps(x, eps).unwrap_or(false))
            .map(|(e, _)| e.clone())
            .filter(|e| admits(e.dst, j))
            .collect()
    };

    let n = t.steps.len();
    let mut failed: HashSet<(usize, ModeId)> = HashSet::new();
    let mut path: Vec<Edge> = Vec::with_capacity(n.saturating_sub(1));
    if n == 1 {
        return Some(witness(t, path));
    }
    let mut stack = vec![Frame {
        j: 1,
        mode: a.init_mode(),
        candidates: candidates(a.init_mode(), 1),
        next: 0,
    }];
    while let Some(top) = stack.last_mut() {
        if top.next == top.candidates.len() {
            failed.insert((top.j, top.mode));
            stack.pop();
            path.pop();
            continue;
        }
        let e = top.candidates[top.next].clone();
        top.next += 1;
        let j = top.j + 1;
        if j == n {
            path.push(e);
            return Some(witness(t, path));
        }
        if failed.contains(&(j, e.dst)) {
            continue;
        }
        let dst = e.dst;
        path.push(e);
        stack.push(Frame {
            j,
            mode: dst,
            candidates: candidates(dst, j),
            next: 0,
        });
    }
    None
}

fn witness(t: &ObservableTrace, edges: Vec<Edge>) -> Witness {
    Witness {
        trace: OmniscientTrace {
            trace: t.clone(),
            edges,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::traces::{validate_omniscient, Step};

    /// Two `go` branches from the root; only the second admits rate 2 later.
    fn branching() -> HybridAutomaton {
        let full = Rect::full(1).unwrap();
        let mut h = HybridAutomaton::new(ModeId(0), Rect::singular(&[1.0]).unwrap(), vec![0.0]).unwrap();
        h.set_mode(ModeId(1), Rect::singular(&[1.0]).unwrap(), None).unwrap();
        h.set_mode(ModeId(2), Rect::from_bounds(&[(1.0, 3.0)]).unwrap(), None).unwrap();
        h.set_mode(ModeId(3), Rect::singular(&[2.0]).unwrap(), None).unwrap();
        h.set_edge(Edge::new(ModeId(0), "go", ModeId(1)), full.clone()).unwrap();
        h.set_edge(Edge::new(ModeId(0), "go", ModeId(2)), full.clone()).unwrap();
        h.set_edge(Edge::new(ModeId(1), "up", ModeId(1)), full.clone()).unwrap();
        h.set_edge(Edge::new(ModeId(2), "up", ModeId(3)), full).unwrap();
        h
    }

    fn tr(steps: &[(Option<&str>, f64, f64)]) -> ObservableTrace {
        ObservableTrace {
            x0: vec![0.0],
            steps: steps
                .iter()
                .map(|(l, d, x)| Step {
                    label: l.map(str::to_owned),
                    delay: *d,
                    x: vec![*x],
                })
                .collect(),
        }
    }

    #[test]
    fn backtracks_to_find_witness() {
        let a = branching();
        let t = tr(&[(None, 1.0, 1.0), (Some("go"), 1.0, 2.0), (Some("up"), 1.0, 4.0)]);
        let w = accepts(&a, &t).expect("accepted");
        assert_eq!(w.trace.edges[0].dst, ModeId(2));
        assert_eq!(validate_omniscient(&a, &w.trace), Ok(()));
    }

    #[test]
    fn witness_prefers_smallest_destination() {
        let a = branching();
        let t = tr(&[(None, 1.0, 1.0), (Some("go"), 1.0, 2.0)]);
        assert_eq!(accepts(&a, &t).unwrap().trace.edges[0].dst, ModeId(1));
    }

    #[test]
    fn rejections() {
        let a = branching();
        assert!(accepts(&a, &tr(&[(None, 1.0, 1.0), (Some("fly"), 1.0, 2.0)])).is_none());
        assert!(accepts(&a, &tr(&[(None, 1.0, 1.0), (Some("go"), 1.0, 9.0)])).is_none());
        assert!(accepts(&a, &tr(&[(None, 1.0, 2.0)])).is_none());
    }

    #[test]
    fn zero_step_trace_from_init() {
        let a = branching();
        assert!(accepts(&a, &tr(&[(None, 0.0, 0.0)])).is_some());
    }

    #[test]
    fn long_loop_does_not_recurse() {
        let full = Rect::full(1).unwrap();
        let mut h = HybridAutomaton::new(ModeId(0), Rect::singular(&[1.0]).unwrap(), vec![0.0]).unwrap();
        h.set_edge(Edge::new(ModeId(0), "a", ModeId(0)), full).unwrap();
        let mut steps = vec![(None, 1.0, 1.0)];
        for i in 2..20_000 {
            steps.push((Some("a"), 1.0, i as f64));
        }
        assert!(accepts(&h, &tr(&steps)).is_some());
    }
}
