#![allow(dead_code)]

use std::path::PathBuf;

use conservative_ha::spec::SpecModel;
use conservative_ha::traces::{accepts, ObservableTrace, OmniscientTrace, TraceFile};
use conservative_ha::HybridAutomaton;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/aircraft").join(name)
}

pub fn spec() -> SpecModel {
    SpecModel::load(fixture("aircraft.hspec"), None).unwrap()
}

pub fn traces(name: &str) -> Vec<ObservableTrace> {
    TraceFile::load(fixture(name)).unwrap().observable().unwrap()
}

pub fn automaton(name: &str) -> HybridAutomaton {
    HybridAutomaton::load(fixture(name)).unwrap()
}

/// Annotates every trace with the edges of an accepting run of `a`.
pub fn annotate(a: &HybridAutomaton, ts: &[ObservableTrace]) -> Vec<OmniscientTrace> {
    ts.iter()
        .map(|t| accepts(a, t).expect("trace accepted by its ground truth").trace)
        .collect()
}
