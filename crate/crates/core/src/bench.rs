//! Binary-tree benchmarks: generated ground truths, matching
//! specifications, adequate trace sets, and timed end-to-end runs.
//!
//! Mode `i` of a tree has children `2i + 1` and `2i + 2`; its depth is
//! `floor(log2(i + 1))`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{adequacy_check, conservative_check, project};
use crate::automaton::{Abstraction, Edge, HybridAutomaton, ModeId};
use crate::construct::run_construction;
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::merge::{merge_automaton, MergeOptions};
use crate::spec::{SpecEdge, SpecModel};
use crate::traces::{accepts, ObservableTrace, OmniscientTrace, WalkConfig, Walker};

pub const MAX_DEPTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecKind {
    /// One abstract state per depth; edges into depth `k` are labeled `a<k>`.
    Layer,
    /// One abstract state per mode; every edge has its own label.
    Id,
}

impl std::str::FromStr for SpecKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "layer" => Ok(SpecKind::Layer),
            "id" => Ok(SpecKind::Id),
            _ => Err(Error::Config(format!("unknown spec kind {s:?}, expected layer or id"))),
        }
    }
}

impl std::fmt::Display for SpecKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpecKind::Layer => "layer",
            SpecKind::Id => "id",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeBenchConfig {
    pub depth: usize,
    pub dim: usize,
    pub spec_kind: SpecKind,
    /// Minimum number of traces; adequacy may require more.
    pub trace_count: usize,
    pub seed: u64,
    pub delay_min: f64,
    pub delay_max: f64,
    /// Walks of the projection for the sampled conservativeness check;
    /// 0 skips it.
    pub check_samples: usize,
}

impl TreeBenchConfig {
    pub fn new(depth: usize, dim: usize, spec_kind: SpecKind) -> Self {
        TreeBenchConfig {
            depth,
            dim,
            spec_kind,
            trace_count: 0,
            seed: 0,
            delay_min: 1.0,
            delay_max: 10.0,
            check_samples: 0,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.depth == 0 || self.depth > MAX_DEPTH {
            return Err(Error::Config(format!("depth must lie in 1..={MAX_DEPTH}, got {}", self.depth)));
        }
        if self.dim == 0 {
            return Err(Error::Config("dim must be at least 1".into()));
        }
        self.walk().check()
    }

    pub fn mode_count(&self) -> usize {
        (1usize << (self.depth + 1)) - 1
    }

    /// Walks from the root reach a leaf in exactly `depth + 1` steps.
    pub fn walk(&self) -> WalkConfig {
        WalkConfig {
            max_steps: self.depth + 1,
            delay_min: self.delay_min,
            delay_max: self.delay_max,
        }
    }
}

fn depth_of(i: usize) -> usize {
    (usize::BITS - 1 - (i + 1).leading_zeros()) as usize
}

fn state_name(kind: SpecKind, i: usize) -> String {
    match kind {
        SpecKind::Layer => format!("L{}", depth_of(i)),
        SpecKind::Id => format!("s{i}"),
    }
}

fn label_into(kind: SpecKind, i: usize) -> String {
    match kind {
        SpecKind::Layer => format!("a{}", depth_of(i)),
        SpecKind::Id => format!("e{i}"),
    }
}

/// A complete binary tree with random singular flows (multiples of 1/4 in
/// [-10, 10]) and full guards, its specification, and the abstraction
/// mapping every mode to its abstract state.
pub fn gen_tree(c: &TreeBenchConfig) -> Result<(HybridAutomaton, SpecModel, Abstraction)> {
    c.check()?;
    let n = c.mode_count();
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut flow = || -> Result<Rect> {
        let v: Vec<f64> = (0..c.dim).map(|_| rng.gen_range(-40i32..=40) as f64 / 4.0).collect();
        Rect::singular(&v)
    };
    let full = Rect::full(c.dim)?;
    let mut truth = HybridAutomaton::new(ModeId(0), flow()?, vec![0.0; c.dim])?;
    truth.set_tag(ModeId(0), Some(state_name(c.spec_kind, 0)))?;
    for i in 1..n {
        truth.set_mode(ModeId(i), flow()?, Some(state_name(c.spec_kind, i)))?;
        truth.set_edge(Edge::new(ModeId((i - 1) / 2), label_into(c.spec_kind, i), ModeId(i)), full.clone())?;
    }

    let (states, edges): (Vec<String>, BTreeMap<SpecEdge, Rect>) = match c.spec_kind {
        SpecKind::Layer => (
            (0..=c.depth).map(|k| format!("L{k}")).collect(),
            (1..=c.depth)
                .map(|k| {
                    let e = SpecEdge {
                        src: format!("L{}", k - 1),
                        label: format!("a{k}"),
                        dst: format!("L{k}"),
                    };
                    (e, full.clone())
                })
                .collect(),
        ),
        SpecKind::Id => (
            (0..n).map(|i| format!("s{i}")).collect(),
            (1..n)
                .map(|i| {
                    let e = SpecEdge {
                        src: format!("s{}", (i - 1) / 2),
                        label: format!("e{i}"),
                        dst: format!("s{i}"),
                    };
                    (e, full.clone())
                })
                .collect(),
        ),
    };
    let spec = SpecModel::from_parts(c.dim, states, state_name(c.spec_kind, 0), edges)?;
    let alpha = truth.abstraction();
    Ok((truth, spec, alpha))
}

/// Number of root-to-leaf traces through every mode of the tree needed for
/// the traversal criterion, with modes that cannot be traversed (the root
/// and the leaves) counting visits instead.
fn required_paths(truth: &HybridAutomaton, n: usize) -> Vec<usize> {
    let profile = truth.label_profile();
    let mut req = vec![0usize; n];
    for i in (0..n).rev() {
        let (ins, outs) = &profile[&ModeId(i)];
        let a = ins.len() + outs.len();
        let own = a * a.saturating_sub(1) / 2 + 1;
        let below = if 2 * i + 2 < n { req[2 * i + 1] + req[2 * i + 2] } else { 0 };
        req[i] = own.max(below);
    }
    req
}

/// Root-to-leaf traces whose traversal counts satisfy the adequacy
/// threshold for every mode, padded with random root-to-leaf walks up to
/// `trace_count`.
///
/// The number of guided traces through each mode is the larger of its own
/// requirement and the sum over its children; any excess at a mode is
/// split between its children, left first.
pub fn gen_adequate_traces(truth: &HybridAutomaton, c: &TreeBenchConfig) -> Result<Vec<OmniscientTrace>> {
    c.check()?;
    let n = c.mode_count();
    if truth.mode_count() != n {
        return Err(Error::Config(format!(
            "truth has {} modes, configuration expects {n}",
            truth.mode_count()
        )));
    }
    let req = required_paths(truth, n);
    let mut through = vec![0usize; n];
    through[0] = req[0];
    for i in 0..n {
        let (l, r) = (2 * i + 1, 2 * i + 2);
        if r >= n {
            continue;
        }
        let extra = through[i] - req[l] - req[r];
        through[l] = req[l] + extra.div_ceil(2);
        through[r] = req[r] + extra / 2;
    }
    let first_leaf = n / 2;
    let leaves: Vec<usize> = (first_leaf..n).flat_map(|i| std::iter::repeat(i).take(through[i])).collect();

    let mut walker = Walker::new(truth, c.walk(), c.seed.wrapping_add(1))?;
    let mut out = Vec::with_capacity(leaves.len().max(c.trace_count));
    for &leaf in &leaves {
        let mut path = vec![leaf];
        while let Some(&i) = path.last() {
            if i == 0 {
                break;
            }
            path.push((i - 1) / 2);
        }
        path.reverse();
        let t = walker.walk(|_, j, enabled| enabled.iter().position(|e| e.dst == ModeId(path[j + 1])))?;
        out.push(t);
    }
    while out.len() < c.trace_count {
        out.push(walker.walk(|rng, _, enabled| Some(rng.gen_range(0..enabled.len())))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchMetrics {
    pub config: TreeBenchConfig,
    pub truth_modes: usize,
    pub traces: usize,
    /// Timed steps over all traces.
    pub trace_steps: usize,
    pub tree_modes: usize,
    pub merged_modes: usize,
    pub merged_edges: usize,
    pub construct_secs: f64,
    pub merge_secs: f64,
    pub total_secs: f64,
    /// Traversal criterion under the boundary-aware rule.
    pub adequate_traversals: bool,
    /// Every input trace is accepted by the merged automaton.
    pub replay_ok: bool,
    /// Rejected walks of the projection; `None` if the check was skipped.
    pub conservative_counterexamples: Option<usize>,
}

/// Everything produced by one benchmark run.
#[derive(Debug, Clone)]
pub struct BenchRun {
    pub truth: HybridAutomaton,
    pub spec: SpecModel,
    pub traces: Vec<OmniscientTrace>,
    pub tree: HybridAutomaton,
    pub merged: HybridAutomaton,
    pub metrics: BenchMetrics,
}

/// Generates an instance, then times construction and merging separately
/// and verifies the result.
pub fn run_benchmark(c: &TreeBenchConfig) -> Result<BenchRun> {
    let (truth, spec, alpha) = gen_tree(c)?;
    let traces = gen_adequate_traces(&truth, c)?;
    let observed: Vec<ObservableTrace> = traces.iter().map(OmniscientTrace::observe).collect();

    let t0 = Instant::now();
    let st = run_construction(&observed, &spec)?;
    let construct_secs = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let merged = merge_automaton(&st.aut, MergeOptions::default())?.automaton;
    let merge_secs = t1.elapsed().as_secs_f64();

    let adequacy = adequacy_check(&truth, &traces, &spec, &alpha);
    let replay_ok = observed.iter().all(|t| accepts(&merged, t).is_some());
    let conservative_counterexamples = if c.check_samples > 0 {
        let proj = project(&truth, &traces)?;
        let report = conservative_check(&merged, &proj, c.check_samples, c.seed, &c.walk(), 0.0)?;
        Some(report.counterexamples.len())
    } else {
        None
    };
    let metrics = BenchMetrics {
        config: *c,
        truth_modes: truth.mode_count(),
        traces: traces.len(),
        trace_steps: observed.iter().map(ObservableTrace::len).sum(),
        tree_modes: st.aut.mode_count(),
        merged_modes: merged.mode_count(),
        merged_edges: merged.edge_count(),
        construct_secs,
        merge_secs,
        total_secs: construct_secs + merge_secs,
        adequate_traversals: adequacy.traversals_pass_boundary(),
        replay_ok,
        conservative_counterexamples,
    };
    Ok(BenchRun {
        truth,
        spec,
        traces,
        tree: st.aut,
        merged,
        metrics,
    })
}

/// Runs every configuration in turn.
pub fn sweep(configs: &[TreeBenchConfig]) -> Result<Vec<BenchMetrics>> {
    configs.iter().map(|c| run_benchmark(c).map(|r| r.metrics)).collect()
}

/// Depths `1..=max_depth` for both specification kinds.
pub fn depth_grid(max_depth: usize, dim: usize, seed: u64) -> Vec<TreeBenchConfig> {
    [SpecKind::Layer, SpecKind::Id]
        .into_iter()
        .flat_map(|kind| {
            (1..=max_depth).map(move |d| TreeBenchConfig {
                seed,
                ..TreeBenchConfig::new(d, dim, kind)
            })
        })
        .collect()
}

/// Tab-separated table, one row per run.
pub fn metrics_table(rows: &[BenchMetrics]) -> String {
    let mut s = String::from(
        "spec\tdepth\tdim\tseed\ttraces\tsteps\ttree_modes\tmerged_modes\tmerged_edges\tconstruct_s\tmerge_s\ttotal_s\tadequate\treplay\n",
    );
    for m in rows {
        let c = &m.config;
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.6}\t{}\t{}",
            c.spec_kind,
            c.depth,
            c.dim,
            c.seed,
            m.traces,
            m.trace_steps,
            m.tree_modes,
            m.merged_modes,
            m.merged_edges,
            m.construct_secs,
            m.merge_secs,
            m.total_secs,
            m.adequate_traversals,
            m.replay_ok
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::connectivity_holds;
    use crate::traces::validate_omniscient;

    #[test]
    fn tree_shape_and_determinism() {
        let c = TreeBenchConfig::new(1, 2, SpecKind::Layer);
        let (t, s, alpha) = gen_tree(&c).unwrap();
        assert_eq!((t.mode_count(), t.edge_count()), (3, 2));
        assert_eq!(s.states().len(), 2);
        assert_eq!(alpha.len(), 3);
        let c10 = TreeBenchConfig::new(10, 1, SpecKind::Id);
        let (t10, s10, _) = gen_tree(&c10).unwrap();
        assert_eq!(t10.mode_count(), 2047);
        assert_eq!(s10.states().len(), 2047);
        assert_eq!(gen_tree(&c10).unwrap().0, t10);
        assert!(gen_tree(&TreeBenchConfig::new(0, 1, SpecKind::Id)).is_err());
        assert!(gen_tree(&TreeBenchConfig::new(21, 1, SpecKind::Id)).is_err());
    }

    #[test]
    fn depth_three_layer_traces_are_adequate() {
        let c = TreeBenchConfig::new(3, 2, SpecKind::Layer);
        let (t, s, alpha) = gen_tree(&c).unwrap();
        let ts = gen_adequate_traces(&t, &c).unwrap();
        for tr in &ts {
            assert_eq!(validate_omniscient(&t, tr), Ok(()));
        }
        let r = adequacy_check(&t, &ts, &s, &alpha);
        assert!(r.adequate(), "{r:?}");
        assert_eq!(ts.len(), 8);
    }

    #[test]
    fn id_internal_modes_get_more_than_three_traversals() {
        let c = TreeBenchConfig::new(3, 1, SpecKind::Id);
        let (t, s, alpha) = gen_tree(&c).unwrap();
        let ts = gen_adequate_traces(&t, &c).unwrap();
        let r = adequacy_check(&t, &ts, &s, &alpha);
        for m in &r.modes {
            if m.actions == 3 {
                assert_eq!(m.threshold, 3);
                assert!(m.traversals > 3);
            }
            if m.actions == 1 {
                assert!(m.visits >= 1);
            }
        }
        assert!(r.adequate());
    }

    #[test]
    fn padding_reaches_trace_count() {
        let c = TreeBenchConfig {
            trace_count: 50,
            ..TreeBenchConfig::new(2, 1, SpecKind::Layer)
        };
        let (t, _, _) = gen_tree(&c).unwrap();
        assert_eq!(gen_adequate_traces(&t, &c).unwrap().len(), 50);
    }

    #[test]
    fn layer_run_merges_one_class_per_depth() {
        let c = TreeBenchConfig {
            check_samples: 200,
            ..TreeBenchConfig::new(3, 2, SpecKind::Layer)
        };
        let run = run_benchmark(&c).unwrap();
        let m = &run.metrics;
        assert_eq!(m.merged_modes, 4);
        assert_eq!(m.merged_edges, 3);
        assert!(m.replay_ok && m.adequate_traversals);
        assert_eq!(m.conservative_counterexamples, Some(0));
        assert!(m.merged_modes <= m.tree_modes);
        assert!(connectivity_holds(&run.merged, &run.truth));
    }

    #[test]
    fn id_run_keeps_every_truth_mode() {
        let c = TreeBenchConfig {
            check_samples: 200,
            ..TreeBenchConfig::new(3, 1, SpecKind::Id)
        };
        let run = run_benchmark(&c).unwrap();
        assert_eq!(run.metrics.merged_modes, 15);
        assert!(run.metrics.tree_modes > 15);
        assert_eq!(run.metrics.conservative_counterexamples, Some(0));
    }

    #[test]
    fn table_has_a_row_per_run() {
        let rows = sweep(&depth_grid(2, 1, 7)).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(metrics_table(&rows).lines().count(), 5);
    }
}
