use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Edge, HybridAutomaton, ModeId};
use crate::error::{Error, Result};
use crate::geometry::Rect;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeRecord {
    pub id: ModeId,
    pub flow: Rect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abstract_state: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub src: ModeId,
    pub label: String,
    pub dst: ModeId,
    pub guard: Rect,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitRecord {
    pub mode: ModeId,
    pub x: Vec<f64>,
}

/// On-disk JSON form of a [`HybridAutomaton`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonFile {
    pub dim: usize,
    pub modes: Vec<ModeRecord>,
    pub edges: Vec<EdgeRecord>,
    pub init: InitRecord,
}

impl From<&HybridAutomaton> for AutomatonFile {
    fn from(a: &HybridAutomaton) -> Self {
        AutomatonFile {
            dim: a.dim,
            modes: a
                .modes
                .iter()
                .map(|(id, m)| ModeRecord {
                    id: *id,
                    flow: m.flow.clone(),
                    abstract_state: m.tag.clone(),
                })
                .collect(),
            edges: a
                .edges
                .iter()
                .map(|(e, g)| EdgeRecord {
                    src: e.src,
                    label: e.label.clone(),
                    dst: e.dst,
                    guard: g.clone(),
                })
                .collect(),
            init: InitRecord {
                mode: a.init_mode,
                x: a.init_x.clone(),
            },
        }
    }
}

impl TryFrom<AutomatonFile> for HybridAutomaton {
    type Error = Error;

    fn try_from(f: AutomatonFile) -> Result<Self> {
        let mut flows: BTreeMap<ModeId, ModeRecord> = BTreeMap::new();
        for m in f.modes {
            if m.flow.dim() != f.dim {
                return Err(Error::DimensionMismatch {
                    expected: f.dim,
                    found: m.flow.dim(),
                });
            }
            let id = m.id;
            if flows.insert(id, m).is_some() {
                return Err(Error::MalformedAutomaton(format!("duplicate mode {id}")));
            }
        }
        let init = flows
            .get(&f.init.mode)
            .ok_or_else(|| Error::MalformedAutomaton(format!("initial mode {} undeclared", f.init.mode)))?;
        let mut a = HybridAutomaton::new(f.init.mode, init.flow.clone(), f.init.x)?;
        for (id, m) in flows {
            a.set_mode(id, m.flow, m.abstract_state)?;
        }
        for e in f.edges {
            let edge = Edge::new(e.src, e.label, e.dst);
            if a.has_edge(&edge) {
                return Err(Error::MalformedAutomaton(format!("duplicate edge {edge}")));
            }
            a.set_edge(edge, e.guard)?;
        }
        Ok(a)
    }
}

impl HybridAutomaton {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&AutomatonFile::from(self)).expect("automaton serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: AutomatonFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_keeps_infinities_and_tags() {
        let mut h = HybridAutomaton::new(ModeId(0), Rect::singular(&[0.1, -2.5]).unwrap(), vec![0.0, 1.0])
            .unwrap();
        h.set_mode(ModeId(3), Rect::from_bounds(&[(1.0, 2.0), (0.0, 0.0)]).unwrap(), Some("b".into()))
            .unwrap();
        h.set_edge(
            Edge::new(ModeId(0), "go", ModeId(3)),
            Rect::from_bounds(&[(f64::NEG_INFINITY, 1e-300), (300.0, f64::INFINITY)]).unwrap(),
        )
        .unwrap();
        let back = HybridAutomaton::from_json(&h.to_json()).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn rejects_dangling_edges_and_bad_dims() {
        let text = r#"{"dim":1,"modes":[{"id":0,"flow":[[0,1]]}],
            "edges":[{"src":0,"label":"a","dst":4,"guard":[["-inf","inf"]]}],
            "init":{"mode":0,"x":[0]}}"#;
        assert!(matches!(HybridAutomaton::from_json(text), Err(Error::UnknownMode(4))));
        let text = r#"{"dim":2,"modes":[{"id":0,"flow":[[0,1]]}],"edges":[],"init":{"mode":0,"x":[0,0]}}"#;
        assert!(HybridAutomaton::from_json(text).is_err());
        let text = r#"{"dim":1,"modes":[{"id":0,"flow":[[0,1]]}],"edges":[],"init":{"mode":2,"x":[0]}}"#;
        assert!(HybridAutomaton::from_json(text).is_err());
    }
}
