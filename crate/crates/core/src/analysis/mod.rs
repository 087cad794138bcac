//! Projection automata, adequacy of inputs, perfect trace sets, and
//! sampled language checks.

mod adequacy;
mod conservative;
mod perfect;

use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{Edge, HybridAutomaton, ModeId};
use crate::error::{Error, Result};
use crate::geometry::{solve, Rect};
use crate::traces::{validate_omniscient, OmniscientTrace};

pub use adequacy::{adequacy_check, AdequacyReport, GuardViolation, ModeAdequacy, ViolationKind};
pub use conservative::{conservative_check, membership_discrepancies, ConservativeReport, Counterexample};
pub use perfect::{perfect_trace_set, perfect_trace_set_size, PerfectTraceKind};

/// Restricts `a` to the modes and edges the traces use, with every flow
/// tightened to the observed rates and every guard to the observed
/// pre-transition points. Tags and the initial state are kept.
///
/// A mode entered only through zero delays gets the zero flow.
pub fn project(a: &HybridAutomaton, ts: &[OmniscientTrace]) -> Result<HybridAutomaton> {
    if ts.is_empty() {
        return Err(Error::Config("projection onto an empty trace set".into()));
    }
    let mut flows: BTreeMap<ModeId, Option<Rect>> = BTreeMap::new();
    let mut guards: BTreeMap<Edge, Rect> = BTreeMap::new();
    for (index, t) in ts.iter().enumerate() {
        validate_omniscient(a, t).map_err(|inv| Error::MalformedTrace {
            index,
            reason: format!("invalid for the automaton ({:?} at step {})", inv.reason, inv.step),
        })?;
        let tr = &t.trace;
        for (j, m) in t.resident_modes(a.init_mode()).into_iter().enumerate() {
            let step = &tr.steps[j];
            let slot = flows.entry(m).or_insert(None);
            if step.delay > 0.0 {
                let rate = solve(tr.point(j), &step.x, step.delay)?;
                match slot {
                    Some(f) => f.hull_with(&rate)?,
                    None => *slot = Some(rate),
                }
            }
        }
        for (j, e) in t.edges.iter().enumerate() {
            let x = Rect::singular(tr.point(j + 1))?;
            match guards.get_mut(e) {
                Some(g) => g.hull_with(&x)?,
                None => {
                    guards.insert(e.clone(), x);
                }
            }
        }
    }
    let zero = Rect::singular(&vec![0.0; a.dim()])?;
    let flow_of = |m: ModeId| flows[&m].clone().unwrap_or_else(|| zero.clone());
    let mut p = HybridAutomaton::new(a.init_mode(), flow_of(a.init_mode()), a.init_x().to_vec())?;
    for &m in flows.keys() {
        p.set_mode(m, flow_of(m), a.tag(m).map(str::to_owned))?;
    }
    for (e, g) in guards {
        p.set_edge(e, g)?;
    }
    Ok(p)
}

/// Whether every pair of incoming and outgoing labels of every truth mode
/// reappears on a single built mode with the same abstract state.
pub fn connectivity_holds(built: &HybridAutomaton, truth: &HybridAutomaton) -> bool {
    let built_pairs: BTreeSet<(Option<&str>, &str, &str)> = built
        .label_profile()
        .into_iter()
        .flat_map(|(m, (ins, outs))| {
            let tag = built.tag(m);
            ins.into_iter()
                .flat_map(move |i| outs.clone().into_iter().map(move |o| (tag, i, o)))
                .collect::<Vec<_>>()
        })
        .collect();
    truth.label_profile().into_iter().all(|(m, (ins, outs))| {
        ins.iter()
            .all(|i| outs.iter().all(|o| built_pairs.contains(&(truth.tag(m), *i, *o))))
    })
}

/// Mutation for refutation tests: the first edge of `built` (in edge
/// order) whose guard, clipped to the hull of `reference`'s guards with the
/// same label, has a non-degenerate bounded interval, gets that clipped
/// guard shrunk by `fraction`. Returns the mutated edge.
pub fn shrink_one_guard(built: &mut HybridAutomaton, reference: &HybridAutomaton, fraction: f64) -> Result<Option<Edge>> {
    let mut by_label: BTreeMap<&str, Rect> = BTreeMap::new();
    for (e, g) in reference.edges() {
        match by_label.get_mut(e.label.as_str()) {
            Some(h) => h.hull_with(g)?,
            None => {
                by_label.insert(e.label.as_str(), g.clone());
            }
        }
    }
    let mut target = None;
    for (e, g) in built.edges() {
        let Some(h) = by_label.get(e.label.as_str()) else { continue };
        let Some(clipped) = g.intersect(h)? else { continue };
        if clipped.intervals().iter().any(|i| i.is_bounded() && !i.is_singular()) {
            target = Some((e.clone(), clipped.shrunk(fraction)));
            break;
        }
    }
    let Some((e, g)) = target else { return Ok(None) };
    built.set_edge(e.clone(), g)?;
    Ok(Some(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traces::{ObservableTrace, Step};

    fn chain() -> HybridAutomaton {
        let mut h = HybridAutomaton::new(ModeId(0), Rect::from_bounds(&[(0.0, 4.0)]).unwrap(), vec![0.0]).unwrap();
        h.set_mode(ModeId(1), Rect::from_bounds(&[(-1.0, 1.0)]).unwrap(), Some("b".into())).unwrap();
        h.set_mode(ModeId(2), Rect::singular(&[3.0]).unwrap(), None).unwrap();
        h.set_edge(Edge::new(ModeId(0), "go", ModeId(1)), Rect::full(1).unwrap()).unwrap();
        h.set_edge(Edge::new(ModeId(0), "skip", ModeId(2)), Rect::full(1).unwrap()).unwrap();
        h
    }

    fn walk(rates: (f64, f64)) -> OmniscientTrace {
        OmniscientTrace {
            trace: ObservableTrace {
                x0: vec![0.0],
                steps: vec![
                    Step { label: None, delay: 2.0, x: vec![2.0 * rates.0] },
                    Step { label: Some("go".into()), delay: 1.0, x: vec![2.0 * rates.0 + rates.1] },
                ],
            },
            edges: vec![Edge::new(ModeId(0), "go", ModeId(1))],
        }
    }

    #[test]
    fn projection_tightens_to_observations() {
        let p = project(&chain(), &[walk((1.0, 0.5)), walk((2.0, -0.5))]).unwrap();
        assert_eq!(p.mode_count(), 2);
        assert_eq!(p.flow(ModeId(0)).unwrap(), &Rect::from_bounds(&[(1.0, 2.0)]).unwrap());
        assert_eq!(p.flow(ModeId(1)).unwrap(), &Rect::from_bounds(&[(-0.5, 0.5)]).unwrap());
        let g = p.guard(&Edge::new(ModeId(0), "go", ModeId(1))).unwrap();
        assert_eq!(g, &Rect::from_bounds(&[(2.0, 4.0)]).unwrap());
        assert_eq!(p.tag(ModeId(1)), Some("b"));
        assert!(!p.contains_mode(ModeId(2)));
    }

    #[test]
    fn projection_rejects_invalid_traces() {
        assert!(project(&chain(), &[walk((9.0, 0.0))]).is_err());
        assert!(project(&chain(), &[]).is_err());
    }

    #[test]
    fn connectivity() {
        let truth = chain();
        assert!(connectivity_holds(&truth, &truth));
        let single = HybridAutomaton::new(ModeId(0), Rect::full(1).unwrap(), vec![0.0]).unwrap();
        assert!(connectivity_holds(&single, &single));
        let mut looped = chain();
        looped.set_edge(Edge::new(ModeId(1), "back", ModeId(0)), Rect::full(1).unwrap()).unwrap();
        assert!(!connectivity_holds(&truth, &looped));
    }

    #[test]
    fn mutation_shrinks_a_clipped_guard() {
        let truth = chain();
        let reference = project(&truth, &[walk((1.0, 0.5)), walk((2.0, -0.5))]).unwrap();
        let mut built = truth.clone();
        let e = shrink_one_guard(&mut built, &reference, 0.1).unwrap().unwrap();
        assert_eq!(e.label, "go");
        assert_eq!(built.guard(&e).unwrap(), &Rect::from_bounds(&[(2.1, 3.9)]).unwrap());
    }
}
