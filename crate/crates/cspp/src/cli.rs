//! Batch command-line surface: solving, tracing, solver comparison,
//! expansiveness checking, counterexample generation, bundled examples, and
//! benchmarking.
//!
//! Exit codes: 0 on success, 1 on validation or usage errors, 2 when
//! `compare` detects solver disagreement.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{load_graph, save_graph, WeightedGraph};
use crate::instances::{self, InstanceId, InstanceSpec};
use crate::modality::Transition;
use crate::solve::queue::QueueKind;
use crate::solve::{
    coalg_dijkstra, coalg_dijkstra_heap, kleene_gfp, DijkstraOptions, KleeneOptions, SolveResult,
    SolveStatus,
};
use crate::verify::{
    check_expansive, contraction_coalgebra, cross_check, CrossCheckConfig, CrossCheckReport,
    ExpansivenessReport, PayloadSource,
};

#[derive(Parser)]
#[command(
    name = "cspp",
    version,
    about = "Solvers for shortest-path problems on weighted G-graphs"
)]
struct Cli {
    /// Seed for all randomness (samplers, benchmark graphs).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Kleene,
    Dijkstra,
    DijkstraHeap,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum CheckMode {
    #[default]
    Analytic,
    Sample,
    FromGraph,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
enum QueueArg {
    #[default]
    Fib,
    Binary,
}

impl From<QueueArg> for QueueKind {
    fn from(q: QueueArg) -> QueueKind {
        match q {
            QueueArg::Fib => QueueKind::Fibonacci,
            QueueArg::Binary => QueueKind::Binary,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve a graph file; the valuation goes to stdout as JSON.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        algorithm: Algorithm,
        /// Kleene iteration cap (default 10 V + 100).
        #[arg(long)]
        max_iters: Option<usize>,
        /// Kleene stabilization tolerance (default: exact equality).
        #[arg(long)]
        tol: Option<f64>,
        /// Record expansiveness violations seen while solving.
        #[arg(long)]
        monitor: bool,
    },
    /// Print the per-iteration table of a coalgebraic Dijkstra run.
    Trace {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Run every solver and report pairwise disagreements (exit code 2).
    Compare {
        #[arg(long)]
        graph: PathBuf,
        /// Also evaluate the run-tree oracle at this height.
        #[arg(long)]
        run_tree_height: Option<usize>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Decide expansiveness of an instance; report (and witness) as JSON.
    CheckExpansive {
        #[arg(long)]
        instance: String,
        /// Instance parameters, e.g. "l0=1,L=2,r=1/2".
        #[arg(long)]
        params: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        mode: CheckMode,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Graph file for from-graph mode (default: the bundled sample).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Application budget for the sampled modes.
        #[arg(long, default_value_t = 200_000)]
        budget: usize,
        /// Payload draws in sample mode.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Build a graph on which Dijkstra is provably wrong, from a witness
    /// file or by searching an instance, and demonstrate the disagreement.
    Counterexample {
        /// Witness report produced by check-expansive.
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        instance: Option<String>,
        #[arg(long)]
        params: Option<String>,
        /// Search the instance for a witness.
        #[arg(long)]
        search: bool,
        /// Write the constructed graph here (otherwise inline in stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a bundled example graph (or list them all).
    Examples {
        #[arg(long)]
        emit: Option<String>,
    },
    /// Time the Dijkstra solvers on a seeded random graph; CSV to stdout.
    Bench {
        #[arg(long)]
        instance: String,
        #[arg(long)]
        v: usize,
        #[arg(long)]
        e: usize,
        #[arg(long, value_enum, default_value_t)]
        queue: QueueArg,
    },
}

/// Entry point with injectable streams; the binary wires the real ones.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                0
            } else {
                let _ = write!(stderr, "{e}");
                1
            };
        }
    };
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(message) => {
            let _ = writeln!(stderr, "error: {message}");
            1
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, String> {
    match cli.command {
        Command::Solve {
            graph,
            algorithm,
            max_iters,
            tol,
            monitor,
        } => {
            let graph = load_validated(&graph)?;
            let result = match algorithm {
                Algorithm::Kleene => kleene_gfp(&graph, &KleeneOptions { max_iters, tol }),
                Algorithm::Dijkstra => {
                    coalg_dijkstra(
                        &graph,
                        &DijkstraOptions {
                            monitor,
                            ..Default::default()
                        },
                    )
                    .0
                }
                Algorithm::DijkstraHeap => coalg_dijkstra_heap(&graph, QueueKind::Fibonacci),
            };
            let name = match algorithm {
                Algorithm::Kleene => "kleene",
                Algorithm::Dijkstra => "dijkstra",
                Algorithm::DijkstraHeap => "dijkstra-heap",
            };
            let mut doc = solve_result_json(name, &result);
            if let serde_json::Value::Object(obj) = &mut doc {
                obj.insert("instance".to_string(), instance_json(&graph.instance));
            }
            emit_json(stdout, &doc);
            Ok(0)
        }
        Command::Trace { graph } => {
            let graph = load_validated(&graph)?;
            let (_, trace) = coalg_dijkstra(
                &graph,
                &DijkstraOptions {
                    want_trace: true,
                    ..Default::default()
                },
            );
            let _ = write!(stdout, "{}", trace.expect("trace requested").render());
            Ok(0)
        }
        Command::Compare {
            graph,
            run_tree_height,
            max_iters,
            tol,
        } => {
            let graph = load_validated(&graph)?;
            let config = CrossCheckConfig {
                kleene: KleeneOptions { max_iters, tol },
                run_tree_height,
                tol,
                ..Default::default()
            };
            let report = cross_check(&graph, &config);
            emit_json(stdout, &cross_check_json(&report));
            Ok(if report.agreed() { 0 } else { 2 })
        }
        Command::CheckExpansive {
            instance,
            params,
            mode,
            depth,
            graph,
            budget,
            samples,
        } => {
            let spec = parse_instance(&instance, params.as_deref())?;
            let report = match mode {
                CheckMode::Analytic => {
                    check_expansive(&spec, depth, &PayloadSource::Analytic, budget)
                        .map_err(stringify)?
                }
                CheckMode::Sample => check_expansive(
                    &spec,
                    depth,
                    &PayloadSource::Sampler {
                        seed: cli.seed,
                        count: samples,
                    },
                    budget,
                )
                .map_err(stringify)?,
                CheckMode::FromGraph => {
                    let g = match graph {
                        Some(path) => load_validated(&path)?,
                        None => instances::default_sample_graph(spec.id),
                    };
                    check_expansive(&spec, depth, &PayloadSource::FromGraph(&g), budget)
                        .map_err(stringify)?
                }
            };
            emit_json(stdout, &report.to_json());
            Ok(0)
        }
        Command::Counterexample {
            witness,
            instance,
            params,
            search,
            out,
        } => {
            let report = match (witness, instance) {
                (Some(path), _) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                    let value: serde_json::Value =
                        serde_json::from_str(&text).map_err(stringify)?;
                    ExpansivenessReport::from_json(&value).map_err(stringify)?
                }
                (None, Some(id)) => {
                    if !search {
                        return Err("pass --search to look for a witness of an instance".into());
                    }
                    let spec = parse_instance(&id, params.as_deref())?;
                    check_expansive(&spec, 3, &PayloadSource::Analytic, 200_000)
                        .map_err(stringify)?
                }
                (None, None) => return Err("need --witness FILE or --instance ID --search".into()),
            };
            let Some(w) = report.witness() else {
                let _ = writeln!(
                    stderr,
                    "instance {} is expansive; no counterexample exists",
                    report.instance.id
                );
                return Ok(1);
            };
            let graph = contraction_coalgebra(&report.instance, w).map_err(stringify)?;
            let demo = cross_check(&graph, &CrossCheckConfig::default());
            let graph_text = save_graph(&graph);
            if let Some(path) = &out {
                std::fs::write(path, &graph_text)
                    .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            }
            let doc = serde_json::json!({
                "graph": serde_json::from_str::<serde_json::Value>(&graph_text).expect("canonical graph"),
                "demonstration": cross_check_json(&demo),
            });
            emit_json(stdout, &doc);
            Ok(if demo.agreed() { 1 } else { 0 })
        }
        Command::Examples { emit } => match emit {
            Some(name) => {
                let graph = instances::example_graph(&name).map_err(stringify)?;
                let _ = write!(stdout, "{}", save_graph(&graph));
                Ok(0)
            }
            None => {
                for name in instances::EXAMPLE_NAMES {
                    let _ = writeln!(stdout, "{name}");
                }
                Ok(0)
            }
        },
        Command::Bench {
            instance,
            v,
            e,
            queue,
        } => {
            let spec = parse_instance(&instance, None)?;
            let graph = bench_graph(&spec, v, e, cli.seed);
            let rows = bench_rows(&graph, queue.into());
            let queue_name = match queue {
                QueueArg::Fib => "fib",
                QueueArg::Binary => "binary",
            };
            let _ = writeln!(stdout, "instance,V,E,queue,solver,wall_ms,iterations");
            for (solver, wall_ms, iterations) in rows {
                let _ = writeln!(
                    stdout,
                    "{},{},{},{},{},{:.3},{}",
                    spec.id,
                    graph.len(),
                    graph.transition_count(),
                    queue_name,
                    solver,
                    wall_ms,
                    iterations
                );
            }
            Ok(0)
        }
    }
}

fn stringify(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn load_validated(path: &PathBuf) -> Result<WeightedGraph, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let graph = load_graph(&text).map_err(stringify)?;
    let diagnostics = graph.validate();
    if !diagnostics.is_empty() {
        let lines: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
        return Err(format!("graph failed validation:\n{}", lines.join("\n")));
    }
    Ok(graph)
}

fn parse_instance(id: &str, params: Option<&str>) -> Result<InstanceSpec, String> {
    let id = InstanceId::parse(id).map_err(stringify)?;
    let mut pairs = BTreeMap::new();
    if let Some(params) = params {
        for item in params.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("bad parameter {item:?}, expected key=value"))?;
            pairs.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let params = instances::InstanceParams::from_pairs(id, &pairs).map_err(stringify)?;
    instances::instance(id, params).map_err(stringify)
}

fn instance_json(spec: &InstanceSpec) -> serde_json::Value {
    serde_json::json!({
        "id": spec.id.as_str(),
        "params": instances::params_to_json(&spec.params),
    })
}

/// JSON document for one solver outcome; shared with the bindings.
pub fn solve_result_json(algorithm: &str, result: &SolveResult) -> serde_json::Value {
    let status = match result.status {
        SolveStatus::Stabilized(_) => "stabilized",
        SolveStatus::IterationCapped => "iteration-capped",
        SolveStatus::Frozen => "frozen",
    };
    let mut obj = serde_json::Map::new();
    obj.insert("algorithm".to_string(), serde_json::json!(algorithm));
    obj.insert("status".to_string(), serde_json::json!(status));
    obj.insert(
        "iterations".to_string(),
        serde_json::json!(result.iterations),
    );
    obj.insert(
        "values".to_string(),
        serde_json::json!(result.valuation.render()),
    );
    if !result.divergent.is_empty() {
        obj.insert("divergent".to_string(), serde_json::json!(result.divergent));
    }
    if let Some(witnesses) = &result.witnesses {
        let list: Vec<serde_json::Value> = witnesses
            .iter()
            .map(|w| {
                serde_json::json!({
                    "state": w.state,
                    "transition": w.transition,
                    "payload": crate::graph::payload_to_json(&w.check.payload),
                    "slot_values": w.check.slot_values.iter().map(|v| v.render()).collect::<Vec<_>>(),
                    "offending_slot": w.check.offending_slot,
                    "slot_value": w.check.slot_value.render(),
                    "sigma_value": w.check.sigma_value.render(),
                    "below_final_weight": w.below_final_weight,
                })
            })
            .collect();
        obj.insert(
            "monitor_witnesses".to_string(),
            serde_json::Value::Array(list),
        );
    }
    serde_json::Value::Object(obj)
}

/// JSON document for a cross-check report; shared with the bindings.
pub fn cross_check_json(report: &CrossCheckReport) -> serde_json::Value {
    let mut obj = serde_json::Map::new();
    obj.insert("agreed".to_string(), serde_json::json!(report.agreed()));
    let disagreements: Vec<serde_json::Value> = report
        .disagreements
        .iter()
        .map(|d| {
            serde_json::json!({
                "left": d.left,
                "right": d.right,
                "state": d.state,
                "left_value": d.left_value.render(),
                "right_value": d.right_value.render(),
            })
        })
        .collect();
    obj.insert(
        "disagreements".to_string(),
        serde_json::Value::Array(disagreements),
    );
    let mut solvers = serde_json::Map::new();
    solvers.insert(
        "dijkstra".to_string(),
        solve_result_json("dijkstra", &report.dijkstra),
    );
    solvers.insert(
        "dijkstra-heap".to_string(),
        solve_result_json("dijkstra-heap", &report.dijkstra_heap),
    );
    solvers.insert(
        "kleene".to_string(),
        solve_result_json("kleene", &report.kleene),
    );
    obj.insert("solvers".to_string(), serde_json::Value::Object(solvers));
    if let Some(values) = &report.run_tree {
        obj.insert(
            "run_tree".to_string(),
            serde_json::json!(values.iter().map(|v| v.render()).collect::<Vec<_>>()),
        );
    }
    if let Some(e) = &report.expansiveness {
        obj.insert("expansiveness".to_string(), e.to_json());
    }
    obj.insert(
        "monitor_caveat".to_string(),
        serde_json::json!(report.monitor_caveat),
    );
    serde_json::Value::Object(obj)
}

fn emit_json(stdout: &mut dyn Write, value: &serde_json::Value) {
    let _ = writeln!(
        stdout,
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

/// Random graph with `v` states and about `e` transitions for benchmarking.
/// State 0 is a target; everything else branches randomly. Additive weights
/// are spread over a wide range so minimal freezing sees realistically small
/// tie groups.
pub fn bench_graph(spec: &InstanceSpec, v: usize, e: usize, seed: u64) -> WeightedGraph {
    use crate::modality::Payload;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states: Vec<crate::graph::StateData> = (0..v)
        .map(|x| crate::graph::StateData {
            target: x == 0 || rng.random_bool(0.01),
            transitions: vec![],
        })
        .collect();
    for _ in 0..e {
        let x = rng.random_range(0..v);
        let (payload, arity) = instances::sample_payload(spec, 3, &mut rng);
        let payload = match payload {
            Payload::Weight(_) => {
                Payload::Weight(crate::WeightValue::int(rng.random_range(1..=1000)))
            }
            Payload::Capacity(_) => {
                Payload::Capacity(crate::WeightValue::int(rng.random_range(1..=1000)))
            }
            other => other,
        };
        let slots = (0..arity).map(|_| rng.random_range(0..v)).collect();
        states[x].transitions.push(Transition::new(payload, slots));
    }
    WeightedGraph::new(spec.clone(), states)
}

/// Times the basic and heap-accelerated solvers; used by the bench command.
pub fn bench_rows(graph: &WeightedGraph, kind: QueueKind) -> Vec<(&'static str, f64, usize)> {
    let start = Instant::now();
    let (basic, _) = coalg_dijkstra(graph, &DijkstraOptions::default());
    let basic_ms = start.elapsed().as_secs_f64() * 1e3;

    let start = Instant::now();
    let heap = coalg_dijkstra_heap(graph, kind);
    let heap_ms = start.elapsed().as_secs_f64() * 1e3;

    assert_eq!(
        basic.valuation, heap.valuation,
        "solvers disagree on a benchmark graph"
    );
    vec![
        ("dijkstra", basic_ms, basic.iterations),
        ("dijkstra-heap", heap_ms, heap.iterations),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> (i32, String, String) {
        let mut stdout = Vec::new();
        let mut stderr = Vec::new();
        let args: Vec<String> = std::iter::once("cspp".to_string())
            .chain(args.iter().map(|s| s.to_string()))
            .collect();
        let code = run(&args, &mut stdout, &mut stderr);
        (
            code,
            String::from_utf8(stdout).unwrap(),
            String::from_utf8(stderr).unwrap(),
        )
    }

    #[test]
    fn examples_lists_and_emits() {
        let (code, out, _) = run_cli(&["examples"]);
        assert_eq!(code, 0);
        assert!(out.lines().any(|l| l == "fig3"));

        let (code, out, _) = run_cli(&["examples", "--emit", "fig1_fig2"]);
        assert_eq!(code, 0);
        let graph = load_graph(&out).unwrap();
        assert_eq!(graph.len(), 6);

        let (code, _, err) = run_cli(&["examples", "--emit", "nope"]);
        assert_eq!(code, 1);
        assert!(err.contains("unknown example"));
    }

    #[test]
    fn check_expansive_reports_verdicts() {
        let (code, out, _) = run_cli(&["check-expansive", "--instance", "spp"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "expansive");

        let (code, out, _) = run_cli(&[
            "check-expansive",
            "--instance",
            "dyn-game-discount",
            "--params",
            "l0=1,L=2,r=1/2",
        ]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "not-expansive");
    }

    #[test]
    fn usage_errors_exit_nonzero() {
        let (code, _, err) = run_cli(&["solve", "--graph", "missing.json"]);
        assert_eq!(code, 1);
        assert!(!err.is_empty());

        let (code, _, err) = run_cli(&["frobnicate"]);
        assert_eq!(code, 1);
        assert!(!err.is_empty());

        let (code, out, _) = run_cli(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("cspp"));
    }
}
