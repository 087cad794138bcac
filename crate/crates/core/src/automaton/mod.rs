//! The multi-rectangular hybrid automaton data model.
//!
//! An automaton has a fixed continuous dimension, a set of modes with a flow
//! rectangle each, labeled edges with a guard rectangle each, and an initial
//! state `(init_mode, init_x)`. Modes may carry an optional abstract-state
//! tag; the construction uses it to record which specification state a
//! mode refines.

mod bisim;
mod canonical;
mod dot;
mod io;
mod partition;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Bound::{Excluded, Included};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;

pub use bisim::discretely_bisimilar;
pub use io::AutomatonFile;
pub use partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeId(pub usize);

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

/// A labeled discrete transition. Edges order by `(src, label, dst)`, so the
/// outgoing edges of a mode form a contiguous range sorted by label.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: ModeId,
    pub label: String,
    pub dst: ModeId,
}

impl Edge {
    pub fn new(src: ModeId, label: impl Into<String>, dst: ModeId) -> Self {
        Edge {
            src,
            label: label.into(),
            dst,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.src, self.label, self.dst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub flow: Rect,
    pub tag: Option<String>,
}

/// Assignment of modes to abstract (specification) states.
pub type Abstraction = BTreeMap<ModeId, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct HybridAutomaton {
    dim: usize,
    modes: BTreeMap<ModeId, Mode>,
    labels: BTreeSet<String>,
    edges: BTreeMap<Edge, Rect>,
    init_mode: ModeId,
    init_x: Vec<f64>,
}

impl HybridAutomaton {
    /// Creates an automaton holding only its initial mode.
    pub fn new(init_mode: ModeId, init_flow: Rect, init_x: Vec<f64>) -> Result<Self> {
        let dim = init_flow.dim();
        if init_x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: init_x.len(),
            });
        }
        let mut modes = BTreeMap::new();
        modes.insert(
            init_mode,
            Mode {
                flow: init_flow,
                tag: None,
            },
        );
        Ok(HybridAutomaton {
            dim,
            modes,
            labels: BTreeSet::new(),
            edges: BTreeMap::new(),
            init_mode,
            init_x,
        })
    }

    /// Inserts or replaces a mode.
    pub fn set_mode(&mut self, id: ModeId, flow: Rect, tag: Option<String>) -> Result<()> {
        self.check_rect(&flow)?;
        self.modes.insert(id, Mode { flow, tag });
        Ok(())
    }

    pub fn set_tag(&mut self, id: ModeId, tag: Option<String>) -> Result<()> {
        self.modes
            .get_mut(&id)
            .ok_or(Error::UnknownMode(id.0))?
            .tag = tag;
        Ok(())
    }

    /// Inserts an edge. Re-inserting an existing edge replaces its guard.
    pub fn set_edge(&mut self, edge: Edge, guard: Rect) -> Result<()> {
        self.check_rect(&guard)?;
        for m in [edge.src, edge.dst] {
            if !self.modes.contains_key(&m) {
                return Err(Error::UnknownMode(m.0));
            }
        }
        self.labels.insert(edge.label.clone());
        self.edges.insert(edge, guard);
        Ok(())
    }

    fn check_rect(&self, r: &Rect) -> Result<()> {
        if r.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: r.dim(),
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn init_mode(&self) -> ModeId {
        self.init_mode
    }

    pub fn init_x(&self) -> &[f64] {
        &self.init_x
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn mode_ids(&self) -> impl Iterator<Item = ModeId> + '_ {
        self.modes.keys().copied()
    }

    pub fn modes(&self) -> impl Iterator<Item = (ModeId, &Mode)> + '_ {
        self.modes.iter().map(|(id, m)| (*id, m))
    }

    pub fn contains_mode(&self, id: ModeId) -> bool {
        self.modes.contains_key(&id)
    }

    pub fn mode(&self, id: ModeId) -> Result<&Mode> {
        self.modes.get(&id).ok_or(Error::UnknownMode(id.0))
    }

    pub fn flow(&self, id: ModeId) -> Result<&Rect> {
        Ok(&self.mode(id)?.flow)
    }

    pub fn tag(&self, id: ModeId) -> Option<&str> {
        self.modes.get(&id).and_then(|m| m.tag.as_deref())
    }

    pub fn labels(&self) -> &BTreeSet<String> {
        &self.labels
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Edge, &Rect)> + '_ {
        self.edges.iter()
    }

    pub fn guard(&self, edge: &Edge) -> Option<&Rect> {
        self.edges.get(edge)
    }

    pub fn guard_mut(&mut self, edge: &Edge) -> Option<&mut Rect> {
        self.edges.get_mut(edge)
    }

    pub fn has_edge(&self, edge: &Edge) -> bool {
        self.edges.contains_key(edge)
    }

    /// Outgoing edges of `m`, sorted by `(label, dst)`.
    pub fn outgoing(&self, m: ModeId) -> impl Iterator<Item = (&Edge, &Rect)> + '_ {
        let lo = Edge::new(m, "", ModeId(0));
        let hi = Edge::new(ModeId(m.0 + 1), "", ModeId(0));
        self.edges.range((Included(lo), Excluded(hi)))
    }

    /// Outgoing edges of `m` carrying `label`, sorted by `dst`.
    pub fn outgoing_with(&self, m: ModeId, label: &str) -> impl Iterator<Item = (&Edge, &Rect)> + '_ {
        let lo = Edge::new(m, label, ModeId(0));
        let hi = Edge::new(m, label, ModeId(usize::MAX));
        self.edges.range((Included(lo), Included(hi)))
    }

    /// `(indegree, outdegree)` of `m`, counting edges.
    pub fn degrees(&self, m: ModeId) -> Result<(usize, usize)> {
        if !self.modes.contains_key(&m) {
            return Err(Error::UnknownMode(m.0));
        }
        let indeg = self.edges.keys().filter(|e| e.dst == m).count();
        let outdeg = self.outgoing(m).count();
        Ok((indeg, outdeg))
    }

    /// Distinct incoming and outgoing labels of every mode.
    pub fn label_profile(&self) -> BTreeMap<ModeId, (BTreeSet<&str>, BTreeSet<&str>)> {
        let mut out: BTreeMap<ModeId, (BTreeSet<&str>, BTreeSet<&str>)> = self
            .modes
            .keys()
            .map(|&m| (m, Default::default()))
            .collect();
        for e in self.edges.keys() {
            if let Some(p) = out.get_mut(&e.dst) {
                p.0.insert(e.label.as_str());
            }
            if let Some(p) = out.get_mut(&e.src) {
                p.1.insert(e.label.as_str());
            }
        }
        out
    }

    pub fn outdegrees(&self) -> BTreeMap<ModeId, usize> {
        let mut out: BTreeMap<ModeId, usize> = self.modes.keys().map(|&m| (m, 0)).collect();
        for e in self.edges.keys() {
            *out.entry(e.src).or_default() += 1;
        }
        out
    }

    /// Modes reachable from the initial mode through edges.
    pub fn reachable(&self) -> BTreeSet<ModeId> {
        let mut seen = BTreeSet::from([self.init_mode]);
        let mut stack = vec![self.init_mode];
        while let Some(m) = stack.pop() {
            for (e, _) in self.outgoing(m) {
                if seen.insert(e.dst) {
                    stack.push(e.dst);
                }
            }
        }
        seen
    }

    /// Whether the edge graph has no cycles (self-loops count as cycles).
    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Modes in a topological order of the edge graph, or `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<ModeId>> {
        let mut indeg: BTreeMap<ModeId, usize> = self.modes.keys().map(|&m| (m, 0)).collect();
        for e in self.edges.keys() {
            *indeg.get_mut(&e.dst).expect("edge endpoint") += 1;
        }
        let mut ready: Vec<ModeId> = indeg.iter().filter(|(_, d)| **d == 0).map(|(m, _)| *m).collect();
        ready.reverse();
        let mut order = Vec::with_capacity(self.modes.len());
        while let Some(m) = ready.pop() {
            order.push(m);
            for (e, _) in self.outgoing(m) {
                let d = indeg.get_mut(&e.dst).expect("edge endpoint");
                *d -= 1;
                if *d == 0 {
                    ready.push(e.dst);
                }
            }
        }
        (order.len() == self.modes.len()).then_some(order)
    }

    /// The abstract-state tags of all tagged modes.
    pub fn abstraction(&self) -> Abstraction {
        self.modes
            .iter()
            .filter_map(|(id, m)| m.tag.clone().map(|t| (*id, t)))
            .collect()
    }

    /// Replaces every mode's tag with its entry in `alpha` (or none).
    pub fn with_abstraction(mut self, alpha: &Abstraction) -> Self {
        for (id, m) in self.modes.iter_mut() {
            m.tag = alpha.get(id).cloned();
        }
        self
    }

    /// Merges every class of `p` into its representative.
    ///
    /// The merged flow is the hull of the member flows; an edge between two
    /// classes exists iff some member edge does, and its guard is the hull of
    /// those member guards. Tags must agree within a class.
    pub fn quotient(&self, p: &Partition) -> Result<HybridAutomaton> {
        let rep = |m: ModeId| -> Result<ModeId> {
            if m.0 >= p.len() {
                return Err(Error::InvariantViolation(format!(
                    "partition does not cover {m}"
                )));
            }
            Ok(p.find(m))
        };
        let mut modes: BTreeMap<ModeId, Mode> = BTreeMap::new();
        for (&id, mode) in &self.modes {
            let r = rep(id)?;
            match modes.get_mut(&r) {
                None => {
                    modes.insert(r, mode.clone());
                }
                Some(acc) => {
                    if acc.tag != mode.tag {
                        return Err(Error::InvariantViolation(format!(
                            "class of {r} mixes abstract states {:?} and {:?}",
                            acc.tag, mode.tag
                        )));
                    }
                    acc.flow.hull_with(&mode.flow)?;
                }
            }
        }
        let mut edges: BTreeMap<Edge, Rect> = BTreeMap::new();
        for (e, g) in &self.edges {
            let merged = Edge::new(rep(e.src)?, e.label.clone(), rep(e.dst)?);
            match edges.get_mut(&merged) {
                None => {
                    edges.insert(merged, g.clone());
                }
                Some(acc) => acc.hull_with(g)?,
            }
        }
        let labels = edges.keys().map(|e| e.label.clone()).collect();
        Ok(HybridAutomaton {
            dim: self.dim,
            modes,
            labels,
            edges,
            init_mode: rep(self.init_mode)?,
            init_x: self.init_x.clone(),
        })
    }

    /// Renumbers modes breadth-first from the initial mode; see
    /// [`canonical`](self::canonical) for the ordering rules.
    pub fn canonicalize(&self) -> HybridAutomaton {
        canonical::canonicalize(self)
    }

    /// Renders the automaton in Graphviz DOT syntax.
    pub fn to_dot(&self) -> String {
        dot::to_dot(self)
    }

    /// Rebuilds the automaton under an injective renaming of its modes.
    pub fn renumbered(&self, map: &BTreeMap<ModeId, ModeId>) -> HybridAutomaton {
        let modes = self.modes.iter().map(|(id, m)| (map[id], m.clone())).collect();
        let edges = self
            .edges
            .iter()
            .map(|(e, g)| (Edge::new(map[&e.src], e.label.clone(), map[&e.dst]), g.clone()))
            .collect();
        HybridAutomaton {
            dim: self.dim,
            modes,
            labels: self.labels.clone(),
            edges,
            init_mode: map[&self.init_mode],
            init_x: self.init_x.clone(),
        }
    }
}
