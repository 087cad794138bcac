//! Observable and omniscient traces and their semantics.
//!
//! A trace is an initial point `x0` followed by steps. Step 0 is a pure
//! delay in the initial mode; every later step first takes a labeled discrete
//! transition at the current point and then delays in the target mode:
//!
//! ```text
//! x0 --d0--> x1 --l1--> . --d1--> x2 --l2--> . --d2--> x3 ...
//! ```
//!
//! An omniscient trace additionally records the edge taken by every labeled
//! step.

mod io;
mod membership;
mod walk;

use serde::{Deserialize, Serialize};

use crate::automaton::{Edge, HybridAutomaton, ModeId};

pub use io::{EdgeRef, StepRecord, TraceFile, TraceRecord};
pub use membership::{accepts, accepts_eps, Witness};
pub use walk::{random_walk, WalkConfig};
pub(crate) use walk::Walker;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub label: Option<String>,
    pub delay: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableTrace {
    pub x0: Vec<f64>,
    pub steps: Vec<Step>,
}

impl ObservableTrace {
    /// Builds a trace from rows written as `(x) --label, delay--> (x')`,
    /// read as: delay in the current mode until `x'`, then take `label`.
    /// The last row normally has no label.
    pub fn from_arrow_rows(x0: Vec<f64>, rows: &[(Option<&str>, f64, Vec<f64>)]) -> Self {
        let mut steps = Vec::with_capacity(rows.len());
        let mut pending: Option<String> = None;
        for (label, delay, x) in rows {
            steps.push(Step {
                label: pending.take(),
                delay: *delay,
                x: x.clone(),
            });
            pending = label.map(str::to_owned);
        }
        ObservableTrace { x0, steps }
    }

    /// Number of timed transitions.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    /// `x_i`: the point before step `i`'s transition (`x_0` is the start).
    pub fn point(&self, i: usize) -> &[f64] {
        if i == 0 {
            &self.x0
        } else {
            &self.steps[i - 1].x
        }
    }

    /// Number of labeled steps.
    pub fn transitions(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }

    /// Checks the structural shape: at least one step, only the first one
    /// unlabeled, finite non-negative delays, consistent dimensions.
    pub fn check_shape(&self) -> Result<(), String> {
        let n = self.x0.len();
        if n == 0 {
            return Err("empty initial point".into());
        }
        if self.steps.is_empty() {
            return Err("trace has no steps".into());
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err("non-finite initial point".into());
        }
        for (i, s) in self.steps.iter().enumerate() {
            match (i, &s.label) {
                (0, Some(l)) => return Err(format!("first step carries label {l:?}")),
                (i, None) if i > 0 => return Err(format!("step {i} has no label")),
                _ => {}
            }
            if !(s.delay >= 0.0) || !s.delay.is_finite() {
                return Err(format!("step {i} has invalid delay {}", s.delay));
            }
            if s.x.len() != n {
                return Err(format!("step {i} has dimension {}, expected {n}", s.x.len()));
            }
            if s.x.iter().any(|v| !v.is_finite()) {
                return Err(format!("step {i} has a non-finite point"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmniscientTrace {
    pub trace: ObservableTrace,
    /// `edges[j - 1]` is the edge taken by step `j`.
    pub edges: Vec<Edge>,
}

impl OmniscientTrace {
    pub fn observe(&self) -> ObservableTrace {
        self.trace.clone()
    }

    pub fn len(&self) -> usize {
        self.trace.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trace.is_empty()
    }

    /// The mode resided in during each step's delay.
    pub fn resident_modes(&self, init: ModeId) -> Vec<ModeId> {
        std::iter::once(init)
            .chain(self.edges.iter().map(|e| e.dst))
            .collect()
    }

    /// Number of positions where the trace enters `m` and then leaves it.
    pub fn traverses(&self, m: ModeId) -> usize {
        self.edges
            .windows(2)
            .filter(|w| w[0].dst == m && w[1].src == m)
            .count()
    }
}

/// Why an omniscient trace is not valid for an automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    Shape,
    BadInit,
    BadChain,
    UnknownEdge,
    Guard,
    Flow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Invalid {
    pub reason: Reason,
    pub step: usize,
}

pub fn validate_omniscient(a: &HybridAutomaton, t: &OmniscientTrace) -> Result<(), Invalid> {
    validate_omniscient_eps(a, t, 0.0)
}

/// Checks the validity conditions of an omniscient trace: it starts at the
/// initial state, its edges chain and exist, every guard holds at the point
/// where its edge is taken, and every delay is admitted by the flow of the
/// mode it is spent in.
pub fn validate_omniscient_eps(a: &HybridAutomaton, t: &OmniscientTrace, eps: f64) -> Result<(), Invalid> {
    let tr = &t.trace;
    let fail = |reason, step| Err(Invalid { reason, step });
    if tr.check_shape().is_err() || tr.dim() != a.dim() || t.edges.len() != tr.transitions() {
        return fail(Reason::Shape, 0);
    }
    if !tr.x0.iter().zip(a.init_x()).all(|(x, y)| (x - y).abs() <= eps) {
        return fail(Reason::BadInit, 0);
    }
    let mut mode = a.init_mode();
    for (j, step) in tr.steps.iter().enumerate() {
        if j > 0 {
            let e = &t.edges[j - 1];
            if e.src != mode {
                let reason = if j == 1 { Reason::BadInit } else { Reason::BadChain };
                return fail(reason, j);
            }
            if Some(&e.label) != step.label.as_ref() {
                return fail(Reason::BadChain, j);
            }
            let Some(guard) = a.guard(e) else {
                return fail(Reason::UnknownEdge, j);
            };
            if !guard.contains_point_eps(tr.point(j), eps).unwrap_or(false) {
                return fail(Reason::Guard, j);
            }
            mode = e.dst;
        }
        let admitted = a
            .flow(mode)
            .and_then(|f| f.admits_delay(tr.point(j), &step.x, step.delay, eps))
            .unwrap_or(false);
        if !admitted {
            return fail(Reason::Flow, j);
        }
    }
    Ok(())
}
