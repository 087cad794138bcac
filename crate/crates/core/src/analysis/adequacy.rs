use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::automaton::{discretely_bisimilar, Abstraction, HybridAutomaton, ModeId, Partition};
use crate::spec::SpecModel;
use crate::traces::OmniscientTrace;

/// Traversal bookkeeping for one mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeAdequacy {
    pub mode: ModeId,
    pub state: Option<String>,
    /// Distinct incoming labels plus distinct outgoing labels.
    pub actions: usize,
    pub traversals: usize,
    /// Entries into the mode, counting every trace start for the initial
    /// mode.
    pub visits: usize,
    /// `actions * (actions - 1) / 2`; adequacy needs strictly more.
    pub threshold: usize,
    /// `traversals > threshold`.
    pub pass: bool,
    /// As `pass`, except that modes without incoming or without outgoing
    /// labels, which no trace can traverse, count visits instead.
    pub pass_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// The edge crosses abstract states along no specification edge.
    Missing,
    /// The edge guard is not contained in the guard of the matching abstract edge.
    NotPermissive,
    /// An endpoint has no abstract state.
    Untagged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardViolation {
    pub src: ModeId,
    pub label: String,
    pub dst: ModeId,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdequacyReport {
    pub modes: Vec<ModeAdequacy>,
    pub guard_violations: Vec<GuardViolation>,
    /// Whether the quotient by the abstraction is discretely bisimilar to
    /// the abstract automaton of `s`; `None` when the abstraction is not total.
    pub coarser: Option<bool>,
}

impl AdequacyReport {
    pub fn traversals_pass(&self) -> bool {
        self.modes.iter().all(|m| m.pass)
    }

    pub fn traversals_pass_boundary(&self) -> bool {
        self.modes.iter().all(|m| m.pass_boundary)
    }

    pub fn failing_modes(&self) -> Vec<ModeId> {
        self.modes.iter().filter(|m| !m.pass).map(|m| m.mode).collect()
    }

    /// All three conditions, with the boundary-aware traversal rule.
    pub fn adequate(&self) -> bool {
        self.traversals_pass_boundary() && self.guard_violations.is_empty() && self.coarser == Some(true)
    }
}

/// Checks the adequacy conditions of a trace set for `a` under the
/// abstraction `alpha` and specification `s`.
pub fn adequacy_check(
    a: &HybridAutomaton,
    ts: &[OmniscientTrace],
    s: &SpecModel,
    alpha: &Abstraction,
) -> AdequacyReport {
    let tagged = a.clone().with_abstraction(alpha);

    let mut traversals: BTreeMap<ModeId, usize> = BTreeMap::new();
    let mut visits: BTreeMap<ModeId, usize> = BTreeMap::new();
    for t in ts {
        *visits.entry(a.init_mode()).or_default() += 1;
        for e in &t.edges {
            *visits.entry(e.dst).or_default() += 1;
        }
        for w in t.edges.windows(2) {
            if w[0].dst == w[1].src {
                *traversals.entry(w[0].dst).or_default() += 1;
            }
        }
    }
    let modes = tagged
        .label_profile()
        .into_iter()
        .map(|(m, (ins, outs))| {
            let actions = ins.len() + outs.len();
            let threshold = actions * actions.saturating_sub(1) / 2;
            let traversals = traversals.get(&m).copied().unwrap_or(0);
            let visits = visits.get(&m).copied().unwrap_or(0);
            let pass = traversals > threshold;
            let boundary = ins.is_empty() || outs.is_empty();
            ModeAdequacy {
                mode: m,
                state: tagged.tag(m).map(str::to_owned),
                actions,
                traversals,
                visits,
                threshold,
                pass,
                pass_boundary: if boundary { visits > threshold } else { pass },
            }
        })
        .collect();

    let mut guard_violations = Vec::new();
    for (e, g) in tagged.edges() {
        let violation = |kind| GuardViolation {
            src: e.src,
            label: e.label.clone(),
            dst: e.dst,
            kind,
        };
        let (Some(vs), Some(vd)) = (tagged.tag(e.src), tagged.tag(e.dst)) else {
            guard_violations.push(violation(ViolationKind::Untagged));
            continue;
        };
        if vs == vd {
            continue;
        }
        let declared = s.edges().find(|(se, _)| se.src == vs && se.label == e.label && se.dst == vd);
        match declared {
            None => guard_violations.push(violation(ViolationKind::Missing)),
            Some((_, sg)) if !g.is_subset(sg).unwrap_or(false) => {
                guard_violations.push(violation(ViolationKind::NotPermissive))
            }
            Some(_) => {}
        }
    }

    AdequacyReport {
        modes,
        guard_violations,
        coarser: coarser(&tagged, s),
    }
}

fn coarser(tagged: &HybridAutomaton, s: &SpecModel) -> Option<bool> {
    let mut p = Partition::covering(tagged.mode_ids());
    let mut first: BTreeMap<&str, ModeId> = BTreeMap::new();
    for m in tagged.mode_ids() {
        let tag = tagged.tag(m)?;
        let rep = *first.entry(tag).or_insert(m);
        p.union(rep, m);
    }
    let q = tagged.quotient(&p).ok()?;
    Some(discretely_bisimilar(&q, &s.to_automaton()))
}
