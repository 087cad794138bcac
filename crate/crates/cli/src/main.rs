//! `cha`: build conservative hybrid automata from a trigger specification and
//! recorded traces, and check them.
//!
//! Exit codes: 0 success, 1 a checked property was refuted, 2 bad input or
//! usage.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conservative_ha::analysis::{adequacy_check, conservative_check, project};
use conservative_ha::bench::{depth_grid, metrics_table, run_benchmark, sweep, SpecKind, TreeBenchConfig};
use conservative_ha::construct::run_construction;
use conservative_ha::merge::{merge_automaton, MergeOptions};
use conservative_ha::spec::SpecModel;
use conservative_ha::traces::{accepts_eps, random_walk, OmniscientTrace, TraceFile, WalkConfig};
use conservative_ha::{Error, HybridAutomaton};

#[derive(Parser)]
#[command(name = "cha", version, about = "Conservative hybrid automata from specifications and traces")]
struct Cli {
    /// Worker threads for sampling; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build and merge an automaton from observable traces.
    Construct(ConstructArgs),
    /// Sample random walks of a model.
    Simulate(SimulateArgs),
    /// Restrict a model to what a set of its traces exercises.
    Project(ProjectArgs),
    /// Check whether traces are adequate for a ground-truth model.
    Adequacy(AdequacyArgs),
    #[command(subcommand)]
    Check(CheckCmd),
    #[command(subcommand)]
    Bench(BenchCmd),
    #[command(subcommand)]
    Spec(SpecCmd),
    #[command(subcommand)]
    Export(ExportCmd),
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    traces: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Dimension, if the spec file does not declare one.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Also write the tree automaton before merging.
    #[arg(long)]
    keep_tree: Option<PathBuf>,
    /// Write every merge with its justification as JSON.
    #[arg(long)]
    explain_merges: Option<PathBuf>,
    /// Repeat merging until nothing changes.
    #[arg(long)]
    fixpoint: bool,
}

#[derive(Args, Clone, Copy)]
struct WalkArgs {
    #[arg(long, default_value_t = 20)]
    max_steps: usize,
    #[arg(long, default_value_t = 1.0)]
    delay_min: f64,
    #[arg(long, default_value_t = 10.0)]
    delay_max: f64,
}

impl WalkArgs {
    fn config(self) -> WalkConfig {
        WalkConfig {
            max_steps: self.max_steps,
            delay_min: self.delay_min,
            delay_max: self.delay_max,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(long)]
    out: PathBuf,
    /// Keep the edge annotations.
    #[arg(long)]
    omniscient: bool,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long)]
    model: PathBuf,
    /// Traces of the model; unannotated traces are annotated with an
    /// accepting run.
    #[arg(long)]
    traces: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AdequacyArgs {
    /// Ground truth whose mode tags name specification states.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    traces: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Apply the traversal rule literally, also to modes that cannot be
    /// traversed.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Replay traces on a model.
    Membership {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        traces: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Sample walks of a reference and replay them on a model.
    Conservative {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[command(flatten)]
        walk: WalkArgs,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    /// One binary-tree benchmark run.
    Tree {
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value = "layer")]
        spec: SpecKind,
        #[arg(long, default_value_t = 0)]
        traces: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Walks for the sampled conservativeness check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Depths 1 to --max-depth for both specification kinds, as a table.
    Sweep {
        #[arg(long, default_value_t = 8)]
        max_depth: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SpecCmd {
    /// Parse a specification and print it normalized.
    Dump {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        /// Print the abstract automaton in DOT instead.
        #[arg(long)]
        dot: bool,
    },
}

#[derive(Subcommand)]
enum ExportCmd {
    /// Graphviz rendering of a model.
    Dot {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures, split by exit code.
enum Failure {
    Refuted(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn context<T>(path: &Path, r: conservative_ha::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<HybridAutomaton, Failure> {
    context(path, HybridAutomaton::load(path))
}

fn load_traces(path: &Path) -> Result<TraceFile, Failure> {
    context(path, TraceFile::load(path))
}

/// Omniscient traces as recorded, or annotated with an accepting run of
/// `model` when the file carries no edges.
fn omniscient(model: &HybridAutomaton, path: &Path) -> Result<Vec<OmniscientTrace>, Failure> {
    let file = load_traces(path)?;
    let annotated = file
        .traces
        .iter()
        .all(|t| t.steps.iter().skip(1).all(|s| s.edge.is_some()));
    if annotated {
        return context(path, file.omniscient());
    }
    let observed = context(path, file.observable())?;
    observed
        .iter()
        .enumerate()
        .map(|(i, t)| {
            accepts_eps(model, t, 0.0)
                .map(|w| w.trace)
                .ok_or_else(|| Failure::Input(format!("{}: trace {i} is not a run of the model", path.display())))
        })
        .collect()
}

fn construct(a: ConstructArgs) -> Outcome {
    let spec = context(&a.spec, SpecModel::load(&a.spec, a.dim))?;
    let traces = context(&a.traces, load_traces(&a.traces)?.observable())?;
    let st = run_construction(&traces, &spec)?;
    if let Some(p) = &a.keep_tree {
        write(p, &st.aut.to_json())?;
    }
    let outcome = merge_automaton(&st.aut, MergeOptions { fixpoint: a.fixpoint })?;
    let m = &outcome.automaton;
    write(&a.out, &m.to_json())?;
    if let Some(p) = &a.dot {
        write(p, &m.to_dot())?;
    }
    if let Some(p) = &a.explain_merges {
        write(p, &serde_json::to_string_pretty(&outcome.events).expect("events serialize"))?;
    }
    println!(
        "constructed {} tree modes from {} traces; merged into {} modes and {} edges in {} round(s)",
        st.aut.mode_count(),
        traces.len(),
        m.mode_count(),
        m.edge_count(),
        outcome.rounds
    );
    Ok(())
}

fn simulate(a: SimulateArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let cfg = a.walk.config();
    let walks = (0..a.count)
        .map(|i| random_walk(&model, &cfg, a.seed.wrapping_add(i as u64)))
        .collect::<conservative_ha::Result<Vec<_>>>()?;
    let file = if a.omniscient {
        TraceFile::from_omniscient(model.dim(), &walks)
    } else {
        let obs: Vec<_> = walks.iter().map(OmniscientTrace::observe).collect();
        TraceFile::from_observable(model.dim(), &obs)
    };
    write(&a.out, &file.to_json())?;
    println!("wrote {} walks", walks.len());
    Ok(())
}

fn project_cmd(a: ProjectArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let ts = omniscient(&model, &a.traces)?;
    let p = project(&model, &ts)?;
    write(&a.out, &p.to_json())?;
    println!("projection has {} modes and {} edges", p.mode_count(), p.edge_count());
    Ok(())
}

fn adequacy(a: AdequacyArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let spec = context(&a.spec, SpecModel::load(&a.spec, Some(model.dim())))?;
    let ts = omniscient(&model, &a.traces)?;
    let r = adequacy_check(&model, &ts, &spec, &model.abstraction());
    if a.json {
        println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
    } else {
        println!("mode\tstate\tactions\ttraversals\tneeded\tpass");
        for m in &r.modes {
            let pass = if a.strict { m.pass } else { m.pass_boundary };
            println!(
                "{}\t{}\t{}\t{}\t{}\t{}",
                m.mode,
                m.state.as_deref().unwrap_or("-"),
                m.actions,
                m.traversals,
                m.threshold + 1,
                pass
            );
        }
        for v in &r.guard_violations {
            println!("guard violation: {} -{}-> {}: {:?}", v.src, v.label, v.dst, v.kind);
        }
        match r.coarser {
            Some(b) => println!("abstraction bisimilar to specification: {b}"),
            None => println!("abstraction bisimilar to specification: undefined (untagged modes)"),
        }
    }
    let traversals = if a.strict { r.traversals_pass() } else { r.traversals_pass_boundary() };
    if traversals && r.guard_violations.is_empty() && r.coarser == Some(true) {
        println!("adequate");
        Ok(())
    } else {
        Err(Failure::Refuted("traces are not adequate".into()))
    }
}

fn check(c: CheckCmd) -> Outcome {
    match c {
        CheckCmd::Membership { model, traces, eps } => {
            let m = load_model(&model)?;
            let ts = context(&traces, load_traces(&traces)?.observable())?;
            let mut rejected = 0;
            for (i, t) in ts.iter().enumerate() {
                if accepts_eps(&m, t, eps).is_some() {
                    println!("trace {i}: ACCEPT");
                } else {
                    rejected += 1;
                    println!("trace {i}: REJECT");
                }
            }
            if rejected > 0 {
                return Err(Failure::Refuted(format!("{rejected} of {} traces rejected", ts.len())));
            }
            Ok(())
        }
        CheckCmd::Conservative {
            model,
            reference,
            samples,
            seed,
            eps,
            walk,
            out,
        } => {
            let m = load_model(&model)?;
            let r = load_model(&reference)?;
            let report = conservative_check(&m, &r, samples, seed, &walk.config(), eps)?;
            if let Some(p) = &out {
                write(p, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
            }
            println!("{}", report.note);
            for c in &report.counterexamples {
                println!("counterexample: walk {} (seed {})", c.index, c.seed);
            }
            println!("{} of {samples} walks rejected", report.counterexamples.len());
            if report.refuted() {
                Err(Failure::Refuted("language inclusion refuted".into()))
            } else {
                Ok(())
            }
        }
    }
}

fn bench(b: BenchCmd) -> Outcome {
    match b {
        BenchCmd::Tree {
            depth,
            dim,
            spec,
            traces,
            seed,
            samples,
            out_dir,
        } => {
            let c = TreeBenchConfig {
                trace_count: traces,
                seed,
                check_samples: samples,
                ..TreeBenchConfig::new(depth, dim, spec)
            };
            let run = run_benchmark(&c)?;
            fs::create_dir_all(&out_dir).map_err(|e| Failure::Input(format!("{}: {e}", out_dir.display())))?;
            write(&out_dir.join("truth.json"), &run.truth.to_json())?;
            write(&out_dir.join("spec.hspec"), &run.spec.to_string())?;
            write(&out_dir.join("traces.json"), &TraceFile::from_omniscient(dim, &run.traces).to_json())?;
            write(&out_dir.join("constructed.json"), &run.merged.to_json())?;
            let metrics = serde_json::to_string_pretty(&run.metrics).expect("metrics serialize");
            write(&out_dir.join("metrics.json"), &metrics)?;
            print!("{}", metrics_table(std::slice::from_ref(&run.metrics)));
            let m = &run.metrics;
            if !m.replay_ok || !m.adequate_traversals || m.conservative_counterexamples.unwrap_or(0) > 0 {
                return Err(Failure::Refuted("benchmark verification failed".into()));
            }
            Ok(())
        }
        BenchCmd::Sweep {
            max_depth,
            dim,
            seed,
            out,
        } => {
            let rows = sweep(&depth_grid(max_depth, dim, seed))?;
            let table = metrics_table(&rows);
            match out {
                Some(p) => write(&p, &table)?,
                None => print!("{table}"),
            }
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.cmd {
        Cmd::Construct(a) => construct(a),
        Cmd::Simulate(a) => simulate(a),
        Cmd::Project(a) => project_cmd(a),
        Cmd::Adequacy(a) => adequacy(a),
        Cmd::Check(c) => check(c),
        Cmd::Bench(b) => bench(b),
        Cmd::Spec(SpecCmd::Dump { spec, dim, dot }) => {
            let s = context(&spec, SpecModel::load(&spec, dim))?;
            if dot {
                print!("{}", s.to_automaton().to_dot());
            } else {
                print!("{s}");
            }
            Ok(())
        }
        Cmd::Export(ExportCmd::Dot { model, out }) => {
            let dot = load_model(&model)?.to_dot();
            match out {
                Some(p) => write(&p, &dot),
                None => {
                    print!("{dot}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Refuted(msg)) => {
            eprintln!("refuted: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
