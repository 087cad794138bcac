//! Finite trace sets whose projection reproduces an acyclic automaton.
//!
//! Walks delay for a time in `[delay_min, delay_max]` in every mode, so the
//! set of points at which a mode can be left is bounded per dimension. The
//! set built here contains, per mode and dimension, traces with the extreme
//! rates, and per edge and dimension, traces that take the edge at the
//! extreme reachable values. Projecting onto it restores every flow and
//! tightens every guard exactly to the reachable points, which walks
//! cannot distinguish from the original.

use serde::{Deserialize, Serialize};

use crate::automaton::{Edge, HybridAutomaton, ModeId};
use crate::error::{Error, Result};
use crate::traces::{validate_omniscient, ObservableTrace, OmniscientTrace, Step, WalkConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PerfectTraceKind {
    FlowMin { mode: ModeId, dim: usize },
    FlowMax { mode: ModeId, dim: usize },
    EdgeMin { edge: (ModeId, String, ModeId), dim: usize },
    EdgeMax { edge: (ModeId, String, ModeId), dim: usize },
    Cover { edge: (ModeId, String, ModeId) },
    ValueMin { mode: ModeId, dim: usize },
    ValueMax { mode: ModeId, dim: usize },
    Midpoint { mode: ModeId, dim: usize },
}

/// `|E| + n (5 |M| + sum of outdegrees)`.
pub fn perfect_trace_set_size(a: &HybridAutomaton) -> usize {
    let e = a.edge_count();
    e + a.dim() * (5 * a.mode_count() + e)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Min,
    Max,
}

/// How a trace delays in one mode.
#[derive(Clone, Copy)]
enum Policy {
    Mid,
    /// Extreme of dimension `d`; other dimensions take their midpoint.
    Extreme(usize, Side),
    /// Midpoint delay, extreme rate in dimension `d`.
    Rate(usize, Side),
}

struct Ctx<'a> {
    a: &'a HybridAutomaton,
    lo: f64,
    hi: f64,
    /// Per mode index and dimension: the edge into the mode on the path
    /// minimizing (resp. maximizing) that dimension at the mode's exit.
    pred: Vec<Vec<[Option<Edge>; 2]>>,
    index: std::collections::BTreeMap<ModeId, usize>,
}

fn mid(lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) / 2.0
}

impl Ctx<'_> {
    fn choose(&self, m: ModeId, p: Policy) -> (f64, Vec<f64>) {
        let flow = self.a.flow(m).expect("mode exists");
        let iv = flow.intervals();
        let mut rates: Vec<f64> = iv.iter().map(|i| mid(i.lo(), i.hi())).collect();
        let mut delay = mid(self.lo, self.hi);
        match p {
            Policy::Mid => {}
            Policy::Rate(d, side) => {
                rates[d] = if side == Side::Min { iv[d].lo() } else { iv[d].hi() };
            }
            Policy::Extreme(d, side) => {
                let (r, nonneg) = match side {
                    Side::Min => (iv[d].lo(), iv[d].lo() >= 0.0),
                    Side::Max => (iv[d].hi(), iv[d].hi() >= 0.0),
                };
                rates[d] = r;
                // small delays minimize with non-negative rates and
                // maximize with negative ones
                delay = match (side, nonneg) {
                    (Side::Min, true) | (Side::Max, false) => self.lo,
                    _ => self.hi,
                };
            }
        }
        (delay, rates)
    }

    /// Edges from the initial mode to `m` along the path extreme in `d`.
    fn path(&self, m: ModeId, d: usize, side: Side) -> Vec<Edge> {
        let k = side as usize;
        let mut out = Vec::new();
        let mut cur = m;
        while let Some(e) = &self.pred[self.index[&cur]][d][k] {
            out.push(e.clone());
            cur = e.src;
        }
        out.reverse();
        out
    }

    /// Follows `edges`, delaying in every resident mode by `policy`.
    fn trace(&self, edges: Vec<Edge>, policy: impl Fn(usize, ModeId) -> Policy) -> OmniscientTrace {
        let mut x = self.a.init_x().to_vec();
        let x0 = x.clone();
        let mut steps = Vec::with_capacity(edges.len() + 1);
        let modes = std::iter::once(self.a.init_mode()).chain(edges.iter().map(|e| e.dst));
        for (j, m) in modes.enumerate() {
            let (delay, rates) = self.choose(m, policy(j, m));
            x = x.iter().zip(&rates).map(|(v, r)| v + delay * r).collect();
            steps.push(Step {
                label: (j > 0).then(|| edges[j - 1].label.clone()),
                delay,
                x: x.clone(),
            });
        }
        OmniscientTrace {
            trace: ObservableTrace { x0, steps },
            edges,
        }
    }
}

fn key(e: &Edge) -> (ModeId, String, ModeId) {
    (e.src, e.label.clone(), e.dst)
}

/// A trace set of exactly [`perfect_trace_set_size`] traces whose projection
/// reproduces `a` for walks with delays in the configured range.
///
/// Supported are acyclic automata whose modes are all reachable, whose flows
/// are bounded, and whose guards contain every point from which their source
/// mode can be left. Traces beyond the required extremes pad the set to the
/// stated size and may repeat each other.
pub fn perfect_trace_set(a: &HybridAutomaton, walk: &WalkConfig) -> Result<Vec<(PerfectTraceKind, OmniscientTrace)>> {
    let order = a
        .topological_order()
        .ok_or_else(|| Error::Unsupported("perfect trace sets need an acyclic automaton".into()))?;
    if a.reachable().len() != a.mode_count() {
        return Err(Error::Unsupported("perfect trace sets need every mode reachable".into()));
    }
    for (m, mode) in a.modes() {
        if let Some(d) = mode.flow.intervals().iter().position(|i| !i.is_bounded()) {
            return Err(Error::UnboundedFlow { mode: m.0, dim: d });
        }
    }
    if !(walk.delay_min > 0.0 && walk.delay_min <= walk.delay_max && walk.delay_max.is_finite()) {
        return Err(Error::Config("invalid delay range".into()));
    }
    let n = a.dim();
    let index: std::collections::BTreeMap<ModeId, usize> = a.mode_ids().enumerate().map(|(i, m)| (m, i)).collect();
    let mut ctx = Ctx {
        a,
        lo: walk.delay_min,
        hi: walk.delay_max,
        pred: vec![vec![[None, None]; n]; index.len()],
        index,
    };

    // Extreme exit values per mode and dimension, computed exactly as the
    // traces compute them.
    let mut entry: Vec<Vec<[f64; 2]>> = vec![vec![[f64::INFINITY, f64::NEG_INFINITY]; n]; ctx.index.len()];
    let mut exit = entry.clone();
    let i0 = ctx.index[&a.init_mode()];
    for d in 0..n {
        entry[i0][d] = [a.init_x()[d]; 2];
    }
    for &m in &order {
        let i = ctx.index[&m];
        for d in 0..n {
            for side in [Side::Min, Side::Max] {
                let (delay, rates) = ctx.choose(m, Policy::Extreme(d, side));
                exit[i][d][side as usize] = entry[i][d][side as usize] + delay * rates[d];
            }
        }
        for (e, g) in a.outgoing(m) {
            for d in 0..n {
                let iv = g.interval(d);
                if !(iv.contains(exit[i][d][0]) && iv.contains(exit[i][d][1])) {
                    return Err(Error::Unsupported(format!(
                        "guard of {e} cuts the points reachable in dimension {d}"
                    )));
                }
            }
            let j = ctx.index[&e.dst];
            for d in 0..n {
                if exit[i][d][0] < entry[j][d][0] {
                    entry[j][d][0] = exit[i][d][0];
                    ctx.pred[j][d][0] = Some(e.clone());
                }
                if exit[i][d][1] > entry[j][d][1] {
                    entry[j][d][1] = exit[i][d][1];
                    ctx.pred[j][d][1] = Some(e.clone());
                }
            }
        }
    }

    let modes: Vec<ModeId> = a.mode_ids().collect();
    let edges: Vec<Edge> = a.edges().map(|(e, _)| e.clone()).collect();
    let ctx = &ctx;
    let along = |d: usize, side: Side| move |_: usize, _: ModeId| Policy::Extreme(d, side);
    let mut out: Vec<(PerfectTraceKind, OmniscientTrace)> = Vec::new();

    for &m in &modes {
        for d in 0..n {
            for side in [Side::Min, Side::Max] {
                let path = ctx.path(m, 0, Side::Min);
                let last = path.len();
                let t = ctx.trace(path, |j, _| if j == last { Policy::Rate(d, side) } else { Policy::Mid });
                let kind = match side {
                    Side::Min => PerfectTraceKind::FlowMin { mode: m, dim: d },
                    Side::Max => PerfectTraceKind::FlowMax { mode: m, dim: d },
                };
                out.push((kind, t));
            }
        }
    }
    for e in &edges {
        for d in 0..n {
            for side in [Side::Min, Side::Max] {
                let mut path = ctx.path(e.src, d, side);
                let last = path.len() + 1;
                path.push(e.clone());
                let ext = along(d, side);
                let t = ctx.trace(path, move |j, m| if j == last { Policy::Mid } else { ext(j, m) });
                let kind = match side {
                    Side::Min => PerfectTraceKind::EdgeMin { edge: key(e), dim: d },
                    Side::Max => PerfectTraceKind::EdgeMax { edge: key(e), dim: d },
                };
                out.push((kind, t));
            }
        }
    }

    let target = perfect_trace_set_size(a);
    if out.len() > target {
        return Err(Error::Unsupported(format!(
            "{} extreme traces exceed the size bound {target}; the automaton branches too much",
            out.len()
        )));
    }
    let mut fillers: Vec<(PerfectTraceKind, Box<dyn Fn() -> OmniscientTrace + '_>)> = Vec::new();
    for e in &edges {
        fillers.push((
            PerfectTraceKind::Cover { edge: key(e) },
            Box::new(move || {
                let mut path = ctx.path(e.src, 0, Side::Min);
                path.push(e.clone());
                ctx.trace(path, |_, _| Policy::Mid)
            }),
        ));
    }
    for &m in &modes {
        for d in 0..n {
            fillers.push((
                PerfectTraceKind::ValueMin { mode: m, dim: d },
                Box::new(move || ctx.trace(ctx.path(m, d, Side::Min), along(d, Side::Min))),
            ));
            fillers.push((
                PerfectTraceKind::ValueMax { mode: m, dim: d },
                Box::new(move || ctx.trace(ctx.path(m, d, Side::Max), along(d, Side::Max))),
            ));
            fillers.push((
                PerfectTraceKind::Midpoint { mode: m, dim: d },
                Box::new(move || ctx.trace(ctx.path(m, d, Side::Min), |_, _| Policy::Mid)),
            ));
        }
    }
    let missing = target - out.len();
    for (kind, make) in fillers.into_iter().take(missing) {
        out.push((kind, make()));
    }
    if out.len() != target {
        return Err(Error::Unsupported(format!(
            "only {} traces available for the size bound {target}",
            out.len()
        )));
    }
    for (kind, t) in &out {
        if let Err(inv) = validate_omniscient(a, t) {
            return Err(Error::InvariantViolation(format!(
                "generated trace {kind:?} is invalid: {:?} at step {}",
                inv.reason, inv.step
            )));
        }
    }
    Ok(out)
}
