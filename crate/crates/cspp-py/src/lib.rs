//! Python bindings: graphs, the three solvers, tracing, cross-checking,
//! expansiveness verdicts, and the counterexample construction.

use std::collections::{BTreeMap, BTreeSet};

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use cspp::solve::queue::QueueKind;
use cspp::solve::{
    coalg_dijkstra, coalg_dijkstra_heap, kleene_gfp, DijkstraOptions, KleeneOptions,
};
use cspp::verify::{
    check_expansive, contraction_coalgebra, cross_check, discount_condition_report,
    run_tree_infimum, CrossCheckConfig, ExpansivenessReport, PayloadSource,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts a JSON document into plain Python objects.
fn json_to_py(py: Python<'_>, value: &serde_json::Value) -> PyResult<Py<PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None(),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any().unbind()
            } else {
                n.as_f64()
                    .unwrap_or(f64::NAN)
                    .into_pyobject(py)?
                    .into_any()
                    .unbind()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any().unbind()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any().unbind()
        }
    })
}

fn parse_spec(instance: &str, params: Option<&str>) -> PyResult<cspp::InstanceSpec> {
    let id = cspp::InstanceId::parse(instance).map_err(value_err)?;
    let mut pairs = BTreeMap::new();
    if let Some(params) = params {
        for item in params.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| value_err(format!("bad parameter {item:?}, expected key=value")))?;
            pairs.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let params = cspp::InstanceParams::from_pairs(id, &pairs).map_err(value_err)?;
    cspp::instance(id, params).map_err(value_err)
}

/// A weighted G-graph plus the instance it belongs to.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Graph {
    inner: cspp::WeightedGraph,
}

#[pymethods]
impl Graph {
    /// Parses a graph from its JSON text.
    #[staticmethod]
    fn load(text: &str) -> PyResult<Graph> {
        Ok(Graph {
            inner: cspp::load_graph(text).map_err(value_err)?,
        })
    }

    /// One of the bundled example graphs; see `examples()`.
    #[staticmethod]
    fn example(name: &str) -> PyResult<Graph> {
        Ok(Graph {
            inner: cspp::example_graph(name).map_err(value_err)?,
        })
    }

    /// Seeded random graph of an instance.
    #[staticmethod]
    #[pyo3(signature = (instance, params=None, states=8, max_transitions=3, max_arity=3, seed=0))]
    fn random(
        instance: &str,
        params: Option<&str>,
        states: usize,
        max_transitions: usize,
        max_arity: usize,
        seed: u64,
    ) -> PyResult<Graph> {
        use rand::SeedableRng;
        let spec = parse_spec(instance, params)?;
        let cfg = cspp::instances::SampleConfig {
            states,
            max_transitions,
            max_arity,
            target_prob: 0.3,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Ok(Graph {
            inner: cspp::instances::sample_graph(&spec, &cfg, &mut rng),
        })
    }

    /// Canonical JSON text.
    fn save(&self) -> String {
        cspp::save_graph(&self.inner)
    }

    /// Well-formedness findings; empty when the graph is valid.
    fn validate(&self) -> Vec<String> {
        self.inner
            .validate()
            .iter()
            .map(|d| d.to_string())
            .collect()
    }

    #[getter]
    fn instance_id(&self) -> &'static str {
        self.inner.instance.id.as_str()
    }

    #[getter]
    fn state_count(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn transition_count(&self) -> usize {
        self.inner.transition_count()
    }

    fn successors(&self, state: usize) -> PyResult<Vec<usize>> {
        Ok(self
            .inner
            .successors(state)
            .map_err(value_err)?
            .into_iter()
            .collect())
    }

    fn predecessors(&self, of: Vec<usize>) -> PyResult<Vec<usize>> {
        let index = cspp::ReverseIndex::build(&self.inner);
        let set: BTreeSet<usize> = of.into_iter().collect();
        Ok(cspp::predecessors(&self.inner, &index, &set)
            .map_err(value_err)?
            .into_iter()
            .collect())
    }

    /// The same graph with every scalar in float representation.
    fn to_float(&self) -> Graph {
        Graph {
            inner: self.inner.to_float(),
        }
    }

    /// Kleene iteration of the Bellman operator from the top valuation.
    #[pyo3(signature = (max_iters=None, tol=None))]
    fn solve_kleene(
        &self,
        py: Python<'_>,
        max_iters: Option<usize>,
        tol: Option<f64>,
    ) -> PyResult<Py<PyAny>> {
        let result = kleene_gfp(&self.inner, &KleeneOptions { max_iters, tol });
        json_to_py(py, &cspp::cli::solve_result_json("kleene", &result))
    }

    /// The coalgebraic Dijkstra algorithm (basic form).
    #[pyo3(signature = (monitor=false))]
    fn solve_dijkstra(&self, py: Python<'_>, monitor: bool) -> PyResult<Py<PyAny>> {
        let (result, _) = coalg_dijkstra(
            &self.inner,
            &DijkstraOptions {
                monitor,
                ..Default::default()
            },
        );
        json_to_py(py, &cspp::cli::solve_result_json("dijkstra", &result))
    }

    /// The heap-accelerated coalgebraic Dijkstra algorithm.
    #[pyo3(signature = (queue="fib"))]
    fn solve_dijkstra_heap(&self, py: Python<'_>, queue: &str) -> PyResult<Py<PyAny>> {
        let kind = match queue {
            "fib" => QueueKind::Fibonacci,
            "binary" => QueueKind::Binary,
            other => return Err(value_err(format!("unknown queue {other:?}"))),
        };
        let result = coalg_dijkstra_heap(&self.inner, kind);
        json_to_py(py, &cspp::cli::solve_result_json("dijkstra-heap", &result))
    }

    /// The per-iteration table of a Dijkstra run.
    fn trace(&self) -> String {
        let (_, trace) = coalg_dijkstra(
            &self.inner,
            &DijkstraOptions {
                want_trace: true,
                ..Default::default()
            },
        );
        trace.expect("trace requested").render()
    }

    /// Runs every solver and reports pairwise disagreements.
    #[pyo3(signature = (run_tree_height=None, max_iters=None, tol=None))]
    fn compare(
        &self,
        py: Python<'_>,
        run_tree_height: Option<usize>,
        max_iters: Option<usize>,
        tol: Option<f64>,
    ) -> PyResult<Py<PyAny>> {
        let config = CrossCheckConfig {
            kleene: KleeneOptions { max_iters, tol },
            run_tree_height,
            tol,
            ..Default::default()
        };
        let report = cross_check(&self.inner, &config);
        json_to_py(py, &cspp::cli::cross_check_json(&report))
    }

    /// Infimum of run-tree values of bounded height rooted at a state,
    /// rendered canonically.
    #[pyo3(signature = (state, height, budget=1_000_000))]
    fn run_tree_infimum(&self, state: usize, height: usize, budget: usize) -> PyResult<String> {
        Ok(run_tree_infimum(&self.inner, state, height, budget)
            .map_err(value_err)?
            .render())
    }
}

/// Names of the bundled example graphs.
#[pyfunction]
fn examples() -> Vec<&'static str> {
    cspp::instances::EXAMPLE_NAMES.to_vec()
}

/// Instance identifiers of the catalog.
#[pyfunction]
fn instances() -> Vec<&'static str> {
    cspp::instances::ALL_INSTANCES
        .iter()
        .map(|id| id.as_str())
        .collect()
}

/// Expansiveness verdict for an instance, as a report dict (mode is one of
/// "analytic", "sample", "from-graph").
#[pyfunction]
#[pyo3(signature = (instance, params=None, mode="analytic", depth=3, budget=200_000, seed=0, samples=64, graph=None))]
#[allow(clippy::too_many_arguments)]
fn expansiveness(
    py: Python<'_>,
    instance: &str,
    params: Option<&str>,
    mode: &str,
    depth: usize,
    budget: usize,
    seed: u64,
    samples: usize,
    graph: Option<Graph>,
) -> PyResult<Py<PyAny>> {
    let spec = parse_spec(instance, params)?;
    let report = match mode {
        "analytic" => check_expansive(&spec, depth, &PayloadSource::Analytic, budget),
        "sample" => check_expansive(
            &spec,
            depth,
            &PayloadSource::Sampler {
                seed,
                count: samples,
            },
            budget,
        ),
        "from-graph" => {
            let g = match &graph {
                Some(g) => g.inner.clone(),
                None => cspp::instances::default_sample_graph(spec.id),
            };
            check_expansive(&spec, depth, &PayloadSource::FromGraph(&g), budget)
        }
        other => return Err(value_err(format!("unknown mode {other:?}"))),
    }
    .map_err(value_err)?;
    json_to_py(py, &report.to_json())
}

/// Builds the graph on which Dijkstra is provably wrong from a
/// non-expansiveness report (as produced by `expansiveness`).
#[pyfunction]
fn counterexample_graph(report_json: &str) -> PyResult<Graph> {
    let value: serde_json::Value = serde_json::from_str(report_json).map_err(value_err)?;
    let report = ExpansivenessReport::from_json(&value).map_err(value_err)?;
    let witness = report
        .witness()
        .ok_or_else(|| value_err("report carries no witness; the instance is expansive"))?;
    Ok(Graph {
        inner: contraction_coalgebra(&report.instance, witness).map_err(value_err)?,
    })
}

/// The uniform stepwise-reward condition for the discounted game, checked
/// against the closed-form expansiveness verdict.
#[pyfunction]
#[pyo3(signature = (l0, l, r, xi="0", n_bound=200))]
fn discount_condition(
    py: Python<'_>,
    l0: &str,
    l: &str,
    r: &str,
    xi: &str,
    n_bound: usize,
) -> PyResult<Py<PyAny>> {
    let parse = |s: &str| cspp::WeightValue::parse(s, true).map_err(value_err);
    let report =
        discount_condition_report(&parse(l0)?, &parse(l)?, &parse(r)?, &parse(xi)?, n_bound)
            .map_err(value_err)?;
    let doc = serde_json::json!({
        "uniform_holds": report.uniform_holds,
        "first_violation": report.first_violation,
        "limit_holds": report.limit_holds,
        "expansive": report.expansive,
        "agree": report.agree,
    });
    json_to_py(py, &doc)
}

#[pymodule]
fn cspp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_function(wrap_pyfunction!(examples, m)?)?;
    m.add_function(wrap_pyfunction!(instances, m)?)?;
    m.add_function(wrap_pyfunction!(expansiveness, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample_graph, m)?)?;
    m.add_function(wrap_pyfunction!(discount_condition, m)?)?;
    Ok(())
}
