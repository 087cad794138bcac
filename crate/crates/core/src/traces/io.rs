use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ObservableTrace, OmniscientTrace, Step};
use crate::automaton::{Edge, ModeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRef {
    pub src: ModeId,
    pub dst: ModeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub label: Option<String>,
    pub delay: f64,
    pub x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<EdgeRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub x0: Vec<f64>,
    pub steps: Vec<StepRecord>,
}

/// On-disk JSON form of a set of traces. Edge annotations are present only
/// in omniscient files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub dim: usize,
    pub traces: Vec<TraceRecord>,
}

impl TraceRecord {
    fn observable(&self) -> ObservableTrace {
        ObservableTrace {
            x0: self.x0.clone(),
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    label: s.label.clone(),
                    delay: s.delay,
                    x: s.x.clone(),
                })
                .collect(),
        }
    }
}

impl TraceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces serialize")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn from_observable(dim: usize, traces: &[ObservableTrace]) -> Self {
        let traces = traces
            .iter()
            .map(|t| TraceRecord {
                x0: t.x0.clone(),
                steps: t
                    .steps
                    .iter()
                    .map(|s| StepRecord {
                        label: s.label.clone(),
                        delay: s.delay,
                        x: s.x.clone(),
                        edge: None,
                    })
                    .collect(),
            })
            .collect();
        TraceFile { dim, traces }
    }

    pub fn from_omniscient(dim: usize, traces: &[OmniscientTrace]) -> Self {
        let mut file = Self::from_observable(dim, &traces.iter().map(|t| t.trace.clone()).collect::<Vec<_>>());
        for (rec, t) in file.traces.iter_mut().zip(traces) {
            for (s, e) in rec.steps.iter_mut().skip(1).zip(&t.edges) {
                s.edge = Some(EdgeRef { src: e.src, dst: e.dst });
            }
        }
        file
    }

    fn checked(&self, index: usize, t: ObservableTrace) -> Result<ObservableTrace> {
        let malformed = |reason: String| Error::MalformedTrace { index, reason };
        t.check_shape().map_err(malformed)?;
        if t.dim() != self.dim {
            return Err(malformed(format!("dimension {} but file declares {}", t.dim(), self.dim)));
        }
        Ok(t)
    }

    /// The traces without edge annotations.
    pub fn observable(&self) -> Result<Vec<ObservableTrace>> {
        self.traces
            .iter()
            .enumerate()
            .map(|(i, r)| self.checked(i, r.observable()))
            .collect()
    }

    /// The traces with edge annotations, which must be present on every
    /// labeled step and chain.
    pub fn omniscient(&self) -> Result<Vec<OmniscientTrace>> {
        self.traces
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let trace = self.checked(i, r.observable())?;
                let mut edges = Vec::with_capacity(trace.transitions());
                for (j, s) in r.steps.iter().enumerate().skip(1) {
                    let e = s.edge.ok_or_else(|| Error::MalformedTrace {
                        index: i,
                        reason: format!("step {j} lacks an edge annotation"),
                    })?;
                    if let Some(prev) = edges.last().map(|p: &Edge| p.dst) {
                        if prev != e.src {
                            return Err(Error::MalformedTrace {
                                index: i,
                                reason: format!("edge of step {j} does not chain"),
                            });
                        }
                    }
                    edges.push(Edge::new(e.src, s.label.clone().unwrap_or_default(), e.dst));
                }
                Ok(OmniscientTrace { trace, edges })
            })
            .collect()
    }
}
