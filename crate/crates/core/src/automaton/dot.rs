use std::collections::BTreeMap;
use std::fmt::Write;

use super::HybridAutomaton;

const PALETTE: [&str; 8] = [
    "#a6cee3", "#b2df8a", "#fb9a99", "#fdbf6f", "#cab2d6", "#ffff99", "#8dd3c7", "#d9d9d9",
];

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub(super) fn to_dot(a: &HybridAutomaton) -> String {
    let mut fills: BTreeMap<&str, &str> = BTreeMap::new();
    for m in a.modes.values() {
        if let Some(t) = m.tag.as_deref() {
            let next = PALETTE[fills.len() % PALETTE.len()];
            fills.entry(t).or_insert(next);
        }
    }

    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  node [shape=box];\n");
    let _ = writeln!(out, "  init [shape=point];");
    let _ = writeln!(out, "  init -> m{};", a.init_mode.0);
    for (id, m) in &a.modes {
        let mut label = format!("m{}\\n flow={}", id.0, m.flow);
        let mut attrs = String::new();
        if let Some(t) = m.tag.as_deref() {
            label.push_str(&format!("\\n [{}]", escape(t)));
            let _ = write!(attrs, ", style=filled, fillcolor=\"{}\"", fills[t]);
        }
        let _ = writeln!(out, "  m{} [label=\"{}\"{}];", id.0, label, attrs);
    }
    for (e, g) in &a.edges {
        let label = format!("{}\\n g={}", escape(&e.label), g);
        let _ = writeln!(out, "  m{} -> m{} [label=\"{}\"];", e.src.0, e.dst.0, label);
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use crate::automaton::{Edge, HybridAutomaton, ModeId};
    use crate::geometry::Rect;

    #[test]
    fn renders_nodes_edges_and_fills() {
        let mut h = HybridAutomaton::new(ModeId(0), Rect::singular(&[1.0]).unwrap(), vec![0.0]).unwrap();
        h.set_mode(ModeId(1), Rect::from_bounds(&[(1.0, 2.0)]).unwrap(), Some("air".into()))
            .unwrap();
        h.set_tag(ModeId(0), Some("ground".into())).unwrap();
        h.set_edge(
            Edge::new(ModeId(0), "lift", ModeId(1)),
            Rect::from_bounds(&[(300.0, f64::INFINITY)]).unwrap(),
        )
        .unwrap();
        let dot = h.to_dot();
        assert!(dot.starts_with("digraph automaton {"));
        assert!(dot.contains("m1 [label=\"m1\\n flow=[1, 2]\\n [air]\""));
        assert!(dot.contains("m0 -> m1 [label=\"lift\\n g=[300, inf]\"]"));
        assert_eq!(dot.matches("fillcolor").count(), 2);
        assert!(dot.trim_end().ends_with('}'));
    }
}
