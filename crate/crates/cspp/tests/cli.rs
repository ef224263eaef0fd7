//! End-to-end command-line behavior: outputs, exit codes, determinism of
//! seeded runs, and the witness-to-counterexample pipeline.

use std::io::Write;
use std::path::PathBuf;

use cspp::load_graph;

fn asset(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("assets")
        .join(name)
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv: Vec<String> = std::iter::once("cspp".to_string())
        .chain(args.iter().map(|s| s.to_string()))
        .collect();
    let code = cspp::cli::run(&argv, &mut stdout, &mut stderr);
    (
        code,
        String::from_utf8(stdout).unwrap(),
        String::from_utf8(stderr).unwrap(),
    )
}

#[test]
fn solve_outputs_reparse_and_revalidate() {
    let path = asset("fig1_fig2_spp.json");
    let graph = load_graph(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for algorithm in ["kleene", "dijkstra", "dijkstra-heap"] {
        let (code, out, _) = run_cli(&[
            "solve",
            "--graph",
            path.to_str().unwrap(),
            "--algorithm",
            algorithm,
        ]);
        assert_eq!(code, 0, "{algorithm}");
        let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
        let values = doc["values"].as_array().unwrap();
        assert_eq!(values.len(), graph.len());
        let parsed: Vec<cspp::WeightValue> = values
            .iter()
            .map(|v| cspp::WeightValue::parse(v.as_str().unwrap(), true).unwrap())
            .collect();
        for v in &parsed {
            graph.instance.domain.check_carrier(v).unwrap();
        }
        let expected: Vec<cspp::WeightValue> =
            [0, 1, 5, 3, 6, 4].map(cspp::WeightValue::int).to_vec();
        assert_eq!(parsed, expected, "{algorithm}");
    }
}

#[test]
fn trace_table_is_byte_exact() {
    let path = asset("fig1_fig2_spp.json");
    let (code, out, _) = run_cli(&["trace", "--graph", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let expected = "\
n\td(0)\td(1)\td(2)\td(3)\td(4)\td(5)\tS\tY
0\tinf\tinf\tinf\tinf\tinf\tinf\t{}\t{}
1\t0\tinf\tinf\tinf\tinf\tinf\t{0}\t{0}
2\t0\t1\t6\tinf\tinf\tinf\t{0,1}\t{1}
3\t0\t1\t6\t3\tinf\tinf\t{0,1,3}\t{3}
4\t0\t1\t5\t3\tinf\t4\t{0,1,3,5}\t{5}
5\t0\t1\t5\t3\tinf\t4\t{0,1,2,3,5}\t{2}
6\t0\t1\t5\t3\t6\t4\t{0,1,2,3,4,5}\t{4}
";
    assert_eq!(out, expected);
}

#[test]
fn compare_exit_codes_signal_disagreement() {
    let good = asset("fig1_fig2_spp.json");
    let (code, out, _) = run_cli(&["compare", "--graph", good.to_str().unwrap()]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["agreed"], true);

    let bad = asset("neg_edges_counterexample.json");
    let (code, out, _) = run_cli(&["compare", "--graph", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["agreed"], false);
    assert!(doc["disagreements"]
        .as_array()
        .unwrap()
        .iter()
        .any(|d| d["state"] == 1 && d["right"] == "kleene"));
    assert!(doc["monitor_caveat"]
        .as_str()
        .unwrap()
        .contains("does not certify"));
}

#[test]
fn invalid_graphs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut f = std::fs::File::create(&path).unwrap();
    write!(
        f,
        r#"{{
            "instance": {{"id": "prob-reach", "params": {{}}}},
            "states": [
                {{"id": 0, "target": true, "transitions": []}},
                {{"id": 1, "target": false, "transitions": [{{"payload": {{"probs": ["1/2", "2/5"]}}, "slots": [0, 1]}}]}}
            ]
        }}"#
    )
    .unwrap();
    let (code, _, err) = run_cli(&[
        "solve",
        "--graph",
        path.to_str().unwrap(),
        "--algorithm",
        "dijkstra",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("ProbSum"), "{err}");
}

#[test]
fn witness_pipeline_reconstructs_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let witness_path = dir.path().join("witness.json");
    let graph_path = dir.path().join("counterexample.json");

    let (code, out, _) = run_cli(&[
        "check-expansive",
        "--instance",
        "spp-neg",
        "--mode",
        "analytic",
    ]);
    assert_eq!(code, 0);
    std::fs::write(&witness_path, &out).unwrap();

    let (code, out, _) = run_cli(&[
        "counterexample",
        "--witness",
        witness_path.to_str().unwrap(),
        "--out",
        graph_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{out}");
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["demonstration"]["agreed"], false);

    // The emitted graph is the two-state negative-loop graph, and compare
    // flags it with exit code 2.
    let built = load_graph(&std::fs::read_to_string(&graph_path).unwrap()).unwrap();
    let reference = cspp::example_graph("neg_edges").unwrap();
    assert_eq!(built.states, reference.states);
    let (code, _, _) = run_cli(&["compare", "--graph", graph_path.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn counterexample_search_covers_negative_rows() {
    let dir = tempfile::tempdir().unwrap();
    for (id, params) in [
        ("ulongest", None),
        ("spp-neg", None),
        ("spp-discount", None),
        ("prob-reach", None),
        ("dyn-game-discount", Some("l0=1,L=2,r=1/2")),
    ] {
        let out_path = dir.path().join(format!("{id}.json"));
        let mut args = vec![
            "counterexample",
            "--instance",
            id,
            "--search",
            "--out",
            out_path.to_str().unwrap(),
        ];
        if let Some(p) = params {
            args.extend(["--params", p]);
        }
        let (code, out, _) = run_cli(&args);
        assert_eq!(code, 0, "{id}: {out}");
        let (code, _, _) = run_cli(&["compare", "--graph", out_path.to_str().unwrap()]);
        assert_eq!(code, 2, "{id}");
    }

    // Expansive instances have no counterexample.
    let (code, _, err) = run_cli(&["counterexample", "--instance", "spp", "--search"]);
    assert_eq!(code, 1);
    assert!(err.contains("expansive"));
}

#[test]
fn seeded_commands_are_byte_identical() {
    let fig2 = asset("fig1_fig2_spp.json");
    let neg = asset("neg_edges_counterexample.json");
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "solve",
            "--graph",
            fig2.to_str().unwrap(),
            "--algorithm",
            "dijkstra",
            "--monitor",
        ],
        vec![
            "solve",
            "--graph",
            neg.to_str().unwrap(),
            "--algorithm",
            "kleene",
            "--max-iters",
            "40",
        ],
        vec!["trace", "--graph", fig2.to_str().unwrap()],
        vec![
            "compare",
            "--graph",
            fig2.to_str().unwrap(),
            "--run-tree-height",
            "6",
        ],
        vec![
            "check-expansive",
            "--instance",
            "prob-reach",
            "--mode",
            "sample",
            "--seed",
            "7",
        ],
        vec![
            "check-expansive",
            "--instance",
            "widest",
            "--mode",
            "from-graph",
            "--depth",
            "2",
        ],
        vec!["examples", "--emit", "fig3"],
    ];
    for args in commands {
        let first = run_cli(&args);
        let second = run_cli(&args);
        assert_eq!(first, second, "{args:?}");
    }
}

#[test]
fn bench_emits_csv_with_stable_shape() {
    let args = [
        "bench",
        "--instance",
        "spp",
        "--v",
        "200",
        "--e",
        "800",
        "--queue",
        "binary",
        "--seed",
        "3",
    ];
    let (code, out, _) = run_cli(&args);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "instance,V,E,queue,solver,wall_ms,iterations");
    assert_eq!(lines.len(), 3);
    let strip_time = |line: &str| {
        let fields: Vec<&str> = line.split(',').collect();
        let mut fields: Vec<String> = fields.iter().map(|s| s.to_string()).collect();
        fields.remove(5);
        fields.join(",")
    };
    assert_eq!(
        strip_time(lines[1]),
        "spp,200,800,binary,dijkstra,".to_string() + lines[1].split(',').next_back().unwrap()
    );
    // Everything except wall time is deterministic across runs.
    let (_, out2, _) = run_cli(&args);
    let lines2: Vec<&str> = out2.lines().collect();
    for (a, b) in lines.iter().zip(&lines2) {
        assert_eq!(strip_time(a), strip_time(b));
    }
}
