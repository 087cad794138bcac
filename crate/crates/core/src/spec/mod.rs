//! Abstract specification automata extracted from monitoring triggers.
//!
//! A specification lists abstract states and triggers. A trigger names a
//! labeled change between two abstract states and a rectangular condition
//! on the continuous state at the moment of the change.

mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Bound::{Included, Unbounded};
use std::path::Path;

use crate::automaton::{Edge, HybridAutomaton, ModeId};
use crate::error::Result;
use crate::geometry::Rect;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpecEdge {
    pub src: String,
    pub label: String,
    pub dst: String,
}

impl fmt::Display for SpecEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -{}-> {}", self.src, self.label, self.dst)
    }
}

/// Abstract states, labeled edges with their guard table, and the initial
/// state. Every state is reachable from `init`, and at most one edge leaves
/// a state per label.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecModel {
    dim: usize,
    states: Vec<String>,
    init: String,
    edges: BTreeMap<SpecEdge, Rect>,
}

/// Parses a specification. The dimension comes from the file's `dim` line
/// or from `dim`; if both are given they must agree.
pub fn parse_spec(text: &str, dim: Option<usize>) -> Result<SpecModel> {
    parse::parse(text, dim)
}

impl SpecModel {
    /// Builds a model directly. Used by generators; unreachable states are
    /// kept as given.
    pub fn from_parts(
        dim: usize,
        states: Vec<String>,
        init: String,
        edges: BTreeMap<SpecEdge, Rect>,
    ) -> Result<Self> {
        let text = SpecModel {
            dim,
            states,
            init,
            edges,
        }
        .to_string();
        parse_spec(&text, Some(dim))
    }

    pub fn load(path: impl AsRef<Path>, dim: Option<usize>) -> Result<Self> {
        parse_spec(&std::fs::read_to_string(path)?, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn init(&self) -> &str {
        &self.init
    }

    pub fn edges(&self) -> impl Iterator<Item = (&SpecEdge, &Rect)> + '_ {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    fn edge_from(&self, src: &str, label: &str) -> Option<(&SpecEdge, &Rect)> {
        let lo = SpecEdge {
            src: src.to_owned(),
            label: label.to_owned(),
            dst: String::new(),
        };
        self.edges
            .range((Included(lo), Unbounded))
            .next()
            .filter(|(e, _)| e.src == src && e.label == label)
    }

    /// The edge leaving `v` with `label` whose condition holds at `x`.
    pub fn monitor_fires(&self, v: &str, label: &str, x: &[f64]) -> Option<&SpecEdge> {
        self.edge_from(v, label)
            .filter(|(_, g)| g.contains_point(x).unwrap_or(false))
            .map(|(e, _)| e)
    }

    /// The guard of an abstract edge; the full rectangle for transitions
    /// within one state or between states with no declared trigger.
    pub fn guard_lookup(&self, src: &str, label: &str, dst: &str) -> Rect {
        match self.edge_from(src, label) {
            Some((e, g)) if src != dst && e.dst == dst => g.clone(),
            _ => Rect::full(self.dim).expect("dimension is positive"),
        }
    }

    /// This model as a hybrid automaton with zero flows, full
    /// guards, and modes numbered in declaration order, tagged with their
    /// state names.
    pub fn to_automaton(&self) -> HybridAutomaton {
        let ids: BTreeMap<&str, ModeId> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), ModeId(i)))
            .collect();
        let zero = Rect::singular(&vec![0.0; self.dim]).expect("dimension is positive");
        let full = Rect::full(self.dim).expect("dimension is positive");
        let mut h = HybridAutomaton::new(ids[self.init.as_str()], zero.clone(), vec![0.0; self.dim])
            .expect("consistent dimension");
        for (s, id) in &ids {
            h.set_mode(*id, zero.clone(), Some((*s).to_owned())).expect("consistent dimension");
        }
        for e in self.edges.keys() {
            h.set_edge(Edge::new(ids[e.src.as_str()], e.label.clone(), ids[e.dst.as_str()]), full.clone())
                .expect("declared states");
        }
        h
    }
}

fn write_atoms(f: &mut fmt::Formatter<'_>, g: &Rect) -> fmt::Result {
    let mut atoms = Vec::new();
    for (d, i) in g.intervals().iter().enumerate() {
        if i.lo() == i.hi() {
            atoms.push(format!("x{d} = {}", i.lo()));
            continue;
        }
        if i.lo().is_finite() {
            atoms.push(format!("x{d} >= {}", i.lo()));
        }
        if i.hi().is_finite() {
            atoms.push(format!("x{d} <= {}", i.hi()));
        }
    }
    if atoms.is_empty() {
        f.write_str("true")
    } else {
        f.write_str(&atoms.join(" and "))
    }
}

/// Prints the model in the input syntax; reparsing yields an equal model.
impl fmt::Display for SpecModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dim {}", self.dim)?;
        writeln!(f, "states {}", self.states.join(" "))?;
        writeln!(f, "init {}", self.init)?;
        for (e, g) in &self.edges {
            write!(f, "trigger {} -> {} on {} when ", e.src, e.dst, e.label)?;
            write_atoms(f, g)?;
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const AIRCRAFT: &str = "\
# flight phases
dim 3
states takeoff travel landing
init takeoff
trigger takeoff -> travel on cruise when x2 >= 300
trigger travel -> landing on descend when true
";

    fn line_of(e: Error) -> usize {
        match e {
            Error::Spec { line, .. } => line,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn aircraft_model() {
        let s = parse_spec(AIRCRAFT, None).unwrap();
        assert_eq!(s.states(), ["takeoff", "travel", "landing"]);
        assert_eq!(s.edge_count(), 2);
        let g = s.guard_lookup("takeoff", "cruise", "travel");
        assert_eq!(g.interval(2).lo(), 300.0);
        assert!(g.interval(0).lo().is_infinite());
    }

    #[test]
    fn monitor() {
        let s = parse_spec(AIRCRAFT, Some(3)).unwrap();
        let e = s.monitor_fires("takeoff", "cruise", &[1000.0, 0.0, 300.0]).unwrap();
        assert_eq!(e.dst, "travel");
        assert!(s.monitor_fires("takeoff", "turnLeft", &[1000.0, 0.0, 300.0]).is_none());
        assert!(s.monitor_fires("takeoff", "cruise", &[10.0, 0.0, 5.0]).is_none());
    }

    #[test]
    fn guard_lookup_defaults_to_full() {
        let s = parse_spec(AIRCRAFT, None).unwrap();
        assert!(s.guard_lookup("travel", "cruise", "travel").is_full());
        assert!(s.guard_lookup("takeoff", "descend", "landing").is_full());
        assert!(s.guard_lookup("takeoff", "cruise", "landing").is_full());
    }

    #[test]
    fn prunes_unreachable_states() {
        let text = "dim 1\nstates a b c\ninit a\ntrigger a -> b on go when true\ntrigger c -> a on back when true\n";
        let s = parse_spec(text, None).unwrap();
        assert_eq!(s.states(), ["a", "b"]);
        assert_eq!(s.edge_count(), 1);
    }

    #[test]
    fn no_triggers_gives_single_state() {
        let s = parse_spec("dim 2\nstates a b\ninit a\n", None).unwrap();
        assert_eq!(s.states(), ["a"]);
        assert_eq!(s.edge_count(), 0);
    }

    #[test]
    fn round_trip_through_display() {
        let text = "dim 2\nstates a b\ninit a\ntrigger a -> b on go when x0 >= -1.5 and x0 <= 2e3 and x1 = 0.1\n";
        let s = parse_spec(text, None).unwrap();
        assert_eq!(parse_spec(&s.to_string(), None).unwrap(), s);
    }

    #[test]
    fn diagnostics_carry_line_numbers() {
        let bad = |t: &str| line_of(parse_spec(t, None).unwrap_err());
        assert_eq!(bad("dim 1\nstates a b\ninit a\ntrigger a -> b on go when x1 >= 0\n"), 4);
        assert_eq!(bad("dim 1\nstates a b\ninit c\n"), 3);
        assert_eq!(bad("dim 1\nstates a\ninit a\ntrigger a -> z on go when true\n"), 4);
        assert_eq!(bad("dim 1\nstates a b\ninit a\ntrigger a -> a on go when true\n"), 4);
        assert_eq!(bad("dim 1\nstates a b\ninit a\ntrigger a b\n"), 4);
        assert_eq!(bad("dim 1\nstates a b\ninit a\ntrigger a -> b on go when x0 >= 2 and x0 <= 1\n"), 4);
        assert_eq!(bad("dim 1\nstates a b\ninit a\nfoo\n"), 4);
        let conflicting = "dim 1\nstates a b c\ninit a\ntrigger a -> b on go when true\ntrigger a -> c on go when true\n";
        assert_eq!(bad(conflicting), 5);
        assert!(parse_spec("states a\ninit a\n", None).is_err());
        assert!(parse_spec("dim 2\nstates a\ninit a\n", Some(3)).is_err());
    }

    #[test]
    fn spec_as_automaton() {
        let h = parse_spec(AIRCRAFT, None).unwrap().to_automaton();
        assert_eq!(h.mode_count(), 3);
        assert_eq!(h.edge_count(), 2);
        assert_eq!(h.tag(h.init_mode()), Some("takeoff"));
    }
}
