#!/usr/bin/env python3
"""Smoke test for the cspp_py extension module.

Builds the extension with cargo, loads it, and drives the main operations:
solving the bundled graphs, tracing, cross-checking, expansiveness verdicts,
and the witness-to-counterexample pipeline.

Usage: python3 python/smoke_test.py [--debug]
"""

import argparse
import json
import shutil
import subprocess
import sys
import sysconfig
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_extension(debug: bool) -> Path:
    profile = "dev" if debug else "release"
    subprocess.run(
        ["cargo", "build", "-p", "cspp-py", "--profile", profile],
        cwd=ROOT,
        check=True,
    )
    target_dir = ROOT / "target" / ("debug" if debug else "release")
    built = target_dir / "libcspp_py.so"
    if not built.exists():  # e.g. macOS
        built = target_dir / "libcspp_py.dylib"
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    out_dir = ROOT / "python" / "build"
    out_dir.mkdir(parents=True, exist_ok=True)
    module_path = out_dir / f"cspp_py{suffix}"
    shutil.copy2(built, module_path)
    return out_dir


def check(label: str, condition: bool) -> None:
    if not condition:
        print(f"FAIL {label}")
        sys.exit(1)
    print(f"PASS {label}")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--debug", action="store_true", help="build the extension in debug mode")
    args = parser.parse_args()

    sys.path.insert(0, str(build_extension(args.debug)))
    import cspp_py

    check("module lists 15 instances", len(cspp_py.instances()) == 15)
    check("module lists 15 examples", len(cspp_py.examples()) == 15)

    # The six-state weighted graph and its known solution.
    fig2 = cspp_py.Graph.example("fig1_fig2")
    check("fig1_fig2 validates", fig2.validate() == [])
    expected = ["0", "1", "5", "3", "6", "4"]
    for solver in ("solve_dijkstra", "solve_dijkstra_heap", "solve_kleene"):
        result = getattr(fig2, solver)()
        check(f"fig1_fig2 {solver} values", result["values"] == expected)
    check(
        "fig1_fig2 trace final row",
        fig2.trace().splitlines()[-1] == "6\t0\t1\t5\t3\t6\t4\t{0,1,2,3,4,5}\t{4}",
    )
    check("fig1_fig2 run-tree oracle at state 5", fig2.run_tree_infimum(5, 6) == "4")
    check("fig1_fig2 successors of 2", fig2.successors(2) == [0, 3, 4])
    check("fig1_fig2 predecessors of {0}", fig2.predecessors([0]) == [1, 2])
    check("fig1_fig2 solvers agree", fig2.compare(run_tree_height=6)["agreed"])

    # Round trip through the JSON format and float mode.
    reparsed = cspp_py.Graph.load(fig2.save())
    check("graph save/load round trip", reparsed.save() == fig2.save())
    check(
        "float mode stays in tolerance",
        abs(float(fig2.to_float().solve_dijkstra()["values"][2]) - 5.0) < 1e-9,
    )

    # The negative-edge counterexample: greedy freezing disagrees with the
    # fixed point and the monitor records the offending payload.
    neg = cspp_py.Graph.example("neg_edges")
    report = neg.compare()
    check("neg_edges solvers disagree", not report["agreed"])
    monitored = neg.solve_dijkstra(monitor=True)
    check(
        "neg_edges monitor catches weight -1",
        any(w["payload"] == {"weight": "-1"} for w in monitored["monitor_witnesses"]),
    )

    # Expansiveness verdicts and the counterexample pipeline.
    check(
        "spp is expansive",
        cspp_py.expansiveness("spp")["verdict"] == "expansive",
    )
    prob_report = cspp_py.expansiveness("prob-reach")
    check("prob-reach is not expansive", prob_report["verdict"] == "not-expansive")
    contraction = cspp_py.counterexample_graph(json.dumps(prob_report))
    check("contraction graph has two states", contraction.state_count == 2)
    check("contraction demonstrates the failure", not contraction.compare()["agreed"])

    # Discounted-game regimes.
    strict = cspp_py.expansiveness("dyn-game-discount", params="l0=1,L=2,r=1/2")
    check("discounted game (l0 < L) is not expansive", strict["verdict"] == "not-expansive")
    constant = cspp_py.discount_condition("1", "1", "1/2")
    check("constant-reward condition agrees", constant["uniform_holds"] and constant["agree"])

    # Random graphs stay deterministic under a seed.
    a = cspp_py.Graph.random("spp", states=6, seed=9).save()
    b = cspp_py.Graph.random("spp", states=6, seed=9).save()
    check("seeded random graphs are reproducible", a == b)

    print("smoke test passed")


if __name__ == "__main__":
    main()
