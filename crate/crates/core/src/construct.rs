//! Tree construction: every trace step becomes a fresh mode.
//!
//! The initial mode's flow is the hull of all first-delay rates. Step `k`
//! adds, for every trace with a `k`-th labeled step, a fresh mode whose flow
//! is that step's rate and an edge from the trace's current mode. The
//! specification monitor decides the fresh mode's abstract state and the
//! edge guard.

use crate::automaton::{Abstraction, Edge, HybridAutomaton, ModeId};
use crate::error::{Error, Result};
use crate::geometry::{solve, Rect};
use crate::spec::SpecModel;
use crate::traces::ObservableTrace;

#[derive(Debug, Clone)]
pub struct ConstructionState {
    /// The automaton built so far; every mode is tagged with its abstract
    /// state.
    pub aut: HybridAutomaton,
    /// Current mode of every trace.
    pub mode_map: Vec<ModeId>,
    /// Index of the next labeled step to fold in.
    pub k: usize,
}

impl ConstructionState {
    pub fn alpha(&self) -> Abstraction {
        self.aut.abstraction()
    }

    /// Whether some trace still has a step at index `k`.
    pub fn pending(&self, traces: &[ObservableTrace]) -> bool {
        traces.iter().any(|t| t.len() > self.k)
    }
}

/// Checks that `traces` can be folded: non-empty, well-formed, a common
/// initial point, positive delays, and the dimension of `s`.
pub fn check_traces(traces: &[ObservableTrace], s: &SpecModel) -> Result<()> {
    let first = traces.first().ok_or_else(|| Error::Config("empty trace set".into()))?;
    for (index, t) in traces.iter().enumerate() {
        let malformed = |reason: String| Error::MalformedTrace { index, reason };
        t.check_shape().map_err(malformed)?;
        if t.dim() != s.dim() {
            return Err(malformed(format!(
                "dimension {} differs from the monitoring model's {}",
                t.dim(),
                s.dim()
            )));
        }
        if t.x0 != first.x0 {
            return Err(malformed("initial point differs from trace 0".into()));
        }
        if let Some(j) = t.steps.iter().position(|s| s.delay == 0.0) {
            return Err(malformed(format!("step {j} has zero delay")));
        }
    }
    Ok(())
}

pub fn init(traces: &[ObservableTrace], s: &SpecModel) -> Result<ConstructionState> {
    check_traces(traces, s)?;
    let rates = traces
        .iter()
        .map(|t| solve(&t.x0, &t.steps[0].x, t.steps[0].delay))
        .collect::<Result<Vec<_>>>()?;
    let flow = Rect::box_hull(&rates)?;
    let mut aut = HybridAutomaton::new(ModeId(0), flow, traces[0].x0.clone())?;
    aut.set_tag(ModeId(0), Some(s.init().to_owned()))?;
    Ok(ConstructionState {
        aut,
        mode_map: vec![ModeId(0); traces.len()],
        k: 1,
    })
}

/// Folds labeled step `st.k` of every trace into the automaton. Fresh modes
/// are numbered in trace order. Returns the number of modes added.
pub fn step(st: &mut ConstructionState, traces: &[ObservableTrace], s: &SpecModel) -> Result<usize> {
    let k = st.k;
    let mut next = st.aut.mode_count();
    let mut added = 0;
    for (i, t) in traces.iter().enumerate() {
        let Some(stp) = t.steps.get(k) else { continue };
        let label = stp.label.as_deref().ok_or_else(|| Error::MalformedTrace {
            index: i,
            reason: format!("step {k} has no label"),
        })?;
        let src = st.mode_map[i];
        let x = t.point(k);
        let src_state = st
            .aut
            .tag(src)
            .ok_or_else(|| Error::InvariantViolation(format!("{src} has no abstract state")))?
            .to_owned();
        let (state, guard) = match s.monitor_fires(&src_state, label, x) {
            Some(e) => (e.dst.clone(), s.guard_lookup(&e.src, &e.label, &e.dst)),
            None => (src_state, Rect::full(s.dim())?),
        };
        let fresh = ModeId(next);
        next += 1;
        st.aut.set_mode(fresh, solve(x, &stp.x, stp.delay)?, Some(state))?;
        st.aut.set_edge(Edge::new(src, label, fresh), guard)?;
        st.mode_map[i] = fresh;
        added += 1;
    }
    st.k += 1;
    Ok(added)
}

/// Runs `init` and then `step` until every trace is exhausted.
pub fn run_construction(traces: &[ObservableTrace], s: &SpecModel) -> Result<ConstructionState> {
    let mut st = init(traces, s)?;
    while st.pending(traces) {
        step(&mut st, traces, s)?;
    }
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_spec;
    use crate::traces::{accepts, Step};

    fn spec() -> SpecModel {
        parse_spec(
            "dim 1\nstates low high\ninit low\ntrigger low -> high on up when x0 >= 10\n",
            None,
        )
        .unwrap()
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
    fn init_hulls_first_rates() {
        let ts = [tr(&[(None, 2.0, 2.0)]), tr(&[(None, 1.0, 3.0)])];
        let st = init(&ts, &spec()).unwrap();
        assert_eq!(st.aut.flow(ModeId(0)).unwrap(), &Rect::from_bounds(&[(1.0, 3.0)]).unwrap());
        assert_eq!(st.aut.tag(ModeId(0)), Some("low"));
        assert_eq!(st.k, 1);
        let twice = init(&[ts[0].clone(), ts[0].clone()], &spec()).unwrap();
        assert_eq!(twice.aut, init(&ts[..1], &spec()).unwrap().aut);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(init(&[], &spec()).is_err());
        assert!(init(&[tr(&[(None, 0.0, 0.0)])], &spec()).is_err());
        let mut other = tr(&[(None, 1.0, 1.0)]);
        other.x0 = vec![5.0];
        assert!(init(&[tr(&[(None, 1.0, 1.0)]), other], &spec()).is_err());
    }

    #[test]
    fn monitor_sets_state_and_guard() {
        let ts = [
            tr(&[(None, 1.0, 10.0), (Some("up"), 1.0, 12.0)]),
            tr(&[(None, 1.0, 5.0), (Some("up"), 1.0, 6.0), (Some("up"), 2.0, 10.0)]),
        ];
        let st = run_construction(&ts, &spec()).unwrap();
        assert_eq!(st.aut.mode_count(), 4);
        assert_eq!(st.aut.tag(ModeId(1)), Some("high"));
        assert_eq!(st.aut.tag(ModeId(2)), Some("low"));
        assert_eq!(st.aut.tag(ModeId(3)), Some("low"));
        let g = st.aut.guard(&Edge::new(ModeId(0), "up", ModeId(1))).unwrap();
        assert_eq!(g.interval(0).lo(), 10.0);
        assert!(st.aut.guard(&Edge::new(ModeId(0), "up", ModeId(2))).unwrap().is_full());
        assert_eq!(st.aut.flow(ModeId(3)).unwrap(), &Rect::singular(&[2.0]).unwrap());
        for t in &ts {
            assert!(accepts(&st.aut, t).is_some());
        }
    }

    #[test]
    fn same_label_gives_separate_paths() {
        let ts: Vec<_> = (0..3).map(|_| tr(&[(None, 1.0, 1.0), (Some("up"), 1.0, 2.0)])).collect();
        let st = run_construction(&ts, &spec()).unwrap();
        assert_eq!(st.aut.mode_count(), 4);
        assert_eq!(st.aut.edge_count(), 3);
    }

    #[test]
    fn delay_only_trace_gives_single_mode() {
        let st = run_construction(&[tr(&[(None, 1.0, 1.0)])], &spec()).unwrap();
        assert_eq!((st.aut.mode_count(), st.aut.edge_count()), (1, 0));
    }
}
