//! Weighted G-graphs: states flagged target/non-target, each carrying a
//! finite list of transitions, plus coalgebraic predecessors/successors and
//! the JSON file format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::domain::{DomainError, WeightValue};
use crate::instances::{self, InstanceError, InstanceId, InstanceSpec};
use crate::modality::{ModalityError, Payload, Transition};
use crate::StateId;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("dangling state reference {slot} at state {state}, transition {transition}")]
    DanglingStateRef {
        state: StateId,
        transition: usize,
        slot: StateId,
    },
    #[error("state index {0} out of range")]
    IndexOutOfRange(StateId),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Exact rationals or floats; one graph is entirely one or the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumericMode {
    #[default]
    Exact,
    Float,
}

/// One state: the target flag and the finite transition list.
#[derive(Debug, Clone, PartialEq)]
pub struct StateData {
    pub target: bool,
    pub transitions: Vec<Transition>,
}

/// A weighted G-graph over dense state ids `0..V`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub instance: InstanceSpec,
    pub states: Vec<StateData>,
    pub labels: BTreeMap<StateId, String>,
    pub mode: NumericMode,
}

/// A well-formedness finding; see [`WeightedGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub state: StateId,
    pub transition: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.transition {
            Some(t) => write!(
                f,
                "state {}, transition {}: {}",
                self.state, t, self.message
            ),
            None => write!(f, "state {}: {}", self.state, self.message),
        }
    }
}

impl WeightedGraph {
    pub fn new(instance: InstanceSpec, states: Vec<StateData>) -> WeightedGraph {
        WeightedGraph {
            instance,
            states,
            labels: BTreeMap::new(),
            mode: NumericMode::Exact,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Total transition count, the `E` of the complexity accounting.
    pub fn transition_count(&self) -> usize {
        self.states.iter().map(|s| s.transitions.len()).sum()
    }

    pub fn target_states(&self) -> BTreeSet<StateId> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, s)| s.target)
            .map(|(x, _)| x)
            .collect()
    }

    /// Union of the supports of `x`'s transitions.
    pub fn successors(&self, x: StateId) -> Result<BTreeSet<StateId>, GraphError> {
        let state = self.states.get(x).ok_or(GraphError::IndexOutOfRange(x))?;
        let mut out = BTreeSet::new();
        for t in &state.transitions {
            out.extend(t.support());
        }
        Ok(out)
    }

    /// The same graph with every scalar converted to float representation.
    pub fn to_float(&self) -> WeightedGraph {
        let mut instance = self.instance.clone();
        instance.domain = instance.domain.to_float();
        let states = self
            .states
            .iter()
            .map(|s| StateData {
                target: s.target,
                transitions: s
                    .transitions
                    .iter()
                    .map(|t| Transition::new(payload_to_float(&t.payload), t.slots.clone()))
                    .collect(),
            })
            .collect();
        WeightedGraph {
            instance,
            states,
            labels: self.labels.clone(),
            mode: NumericMode::Float,
        }
    }

    /// Checks every structural invariant and returns the violations; an empty
    /// list means the graph is well-formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let v = self.len();
        for (x, state) in self.states.iter().enumerate() {
            for (j, t) in state.transitions.iter().enumerate() {
                for &slot in &t.slots {
                    if slot >= v {
                        out.push(Diagnostic {
                            state: x,
                            transition: Some(j),
                            message: format!("DanglingStateRef: slot {slot} >= {v}"),
                        });
                    }
                }
                if let Err(e) = self
                    .instance
                    .modality
                    .validate_payload(&t.payload, t.slots.len())
                {
                    let message = match &e {
                        ModalityError::ArityMismatch { .. }
                            if t.slots.is_empty() && self.instance.requires_nonempty_support() =>
                        {
                            "NonEmptySupportRequired: empty slot list".to_string()
                        }
                        ModalityError::ArityMismatch { .. } => format!("ArityMismatch: {e}"),
                        _ => format!("PayloadSchema: {e}"),
                    };
                    out.push(Diagnostic {
                        state: x,
                        transition: Some(j),
                        message,
                    });
                    continue;
                }
                for issue in self.instance.payload_diagnostics(&t.payload) {
                    out.push(Diagnostic {
                        state: x,
                        transition: Some(j),
                        message: issue,
                    });
                }
                let exact_expected = self.mode == NumericMode::Exact;
                if t.payload
                    .scalars()
                    .iter()
                    .any(|s| s.is_finite() && s.is_exact() != exact_expected)
                {
                    out.push(Diagnostic {
                        state: x,
                        transition: Some(j),
                        message: "MixedNumericMode: payload does not match the graph mode"
                            .to_string(),
                    });
                }
            }
        }
        out
    }
}

fn payload_to_float(payload: &Payload) -> Payload {
    let f = WeightValue::to_float_value;
    match payload {
        Payload::Empty => Payload::Empty,
        Payload::Weight(w) => Payload::Weight(f(w)),
        Payload::WeightRate { weight, rate } => Payload::WeightRate {
            weight: f(weight),
            rate: f(rate),
        },
        Payload::Capacity(c) => Payload::Capacity(f(c)),
        Payload::Prob(p) => Payload::Prob(f(p)),
        Payload::Weights(ws) => Payload::Weights(ws.iter().map(f).collect()),
        Payload::Probs(ps) => Payload::Probs(ps.iter().map(f).collect()),
    }
}

/// For each state `y`, the `(x, j)` pairs with `y` in the support of the
/// `j`-th transition of `x`. Precomputed once per graph.
#[derive(Debug, Clone)]
pub struct ReverseIndex {
    incoming: Vec<Vec<(StateId, usize)>>,
}

impl ReverseIndex {
    pub fn build(graph: &WeightedGraph) -> ReverseIndex {
        let mut incoming = vec![Vec::new(); graph.len()];
        for (x, state) in graph.states.iter().enumerate() {
            for (j, t) in state.transitions.iter().enumerate() {
                for y in t.support() {
                    incoming[y].push((x, j));
                }
            }
        }
        ReverseIndex { incoming }
    }

    pub fn incoming(&self, y: StateId) -> &[(StateId, usize)] {
        &self.incoming[y]
    }
}

/// `Pred(Y)`: states with a transition whose support meets `Y`. Runs in time
/// proportional to the edges touching `Y`.
pub fn predecessors(
    graph: &WeightedGraph,
    index: &ReverseIndex,
    targets: &BTreeSet<StateId>,
) -> Result<BTreeSet<StateId>, GraphError> {
    let mut out = BTreeSet::new();
    for &y in targets {
        if y >= graph.len() {
            return Err(GraphError::IndexOutOfRange(y));
        }
        out.extend(index.incoming(y).iter().map(|&(x, _)| x));
    }
    Ok(out)
}

// --- JSON file format ---
//
// {
//   "instance": {"id": "spp", "params": {}},
//   "mode": "exact",                               // optional, default exact
//   "states": [
//     {"id": 0, "target": true, "transitions": []},
//     {"id": 1, "target": false,
//      "transitions": [{"payload": {"weight": "1"}, "slots": [0]}]}
//   ],
//   "labels": {"0": "goal"}                        // optional
// }
//
// Numbers may be written as JSON numbers or as strings: "inf", "-inf",
// "p/q", integers, or decimals.

pub fn save_graph(graph: &WeightedGraph) -> String {
    let mut root = serde_json::Map::new();
    root.insert(
        "instance".to_string(),
        serde_json::json!({
            "id": graph.instance.id.as_str(),
            "params": instances::params_to_json(&graph.instance.params),
        }),
    );
    if graph.mode == NumericMode::Float {
        root.insert(
            "mode".to_string(),
            serde_json::Value::String("float".to_string()),
        );
    }
    let states: Vec<serde_json::Value> = graph
        .states
        .iter()
        .enumerate()
        .map(|(x, s)| {
            let transitions: Vec<serde_json::Value> = s
                .transitions
                .iter()
                .map(|t| {
                    serde_json::json!({
                        "payload": payload_to_json(&t.payload),
                        "slots": t.slots,
                    })
                })
                .collect();
            serde_json::json!({ "id": x, "target": s.target, "transitions": transitions })
        })
        .collect();
    root.insert("states".to_string(), serde_json::Value::Array(states));
    if !graph.labels.is_empty() {
        let labels: serde_json::Map<String, serde_json::Value> = graph
            .labels
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
            .collect();
        root.insert("labels".to_string(), serde_json::Value::Object(labels));
    }
    let mut text =
        serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("serializable");
    text.push('\n');
    text
}

pub fn load_graph(text: &str) -> Result<WeightedGraph, GraphError> {
    let root: serde_json::Value =
        serde_json::from_str(text).map_err(|e| GraphError::Parse(e.to_string()))?;
    let obj = root
        .as_object()
        .ok_or_else(|| GraphError::Parse("top level must be an object".into()))?;

    let instance_val = obj
        .get("instance")
        .ok_or_else(|| GraphError::Parse("missing \"instance\"".into()))?;
    let id_str = instance_val
        .get("id")
        .and_then(|v| v.as_str())
        .ok_or_else(|| GraphError::Parse("missing instance id".into()))?;
    let id = InstanceId::parse(id_str)?;
    let params = instances::params_from_json(id, instance_val.get("params"))?;
    let mut spec = instances::instance(id, params)?;

    let exact = match obj.get("mode").and_then(|v| v.as_str()) {
        None | Some("exact") => true,
        Some("float") => false,
        Some(other) => return Err(GraphError::Parse(format!("unknown mode {other:?}"))),
    };
    if !exact {
        spec.domain = spec.domain.to_float();
    }

    let states_val = obj
        .get("states")
        .and_then(|v| v.as_array())
        .ok_or_else(|| GraphError::Parse("missing \"states\" array".into()))?;
    let v = states_val.len();
    let mut states: Vec<Option<StateData>> = vec![None; v];
    for entry in states_val {
        let id = entry
            .get("id")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| GraphError::Parse("state without integer id".into()))?
            as usize;
        if id >= v {
            return Err(GraphError::Parse(format!(
                "state ids must be dense 0..{v}, got {id}"
            )));
        }
        if states[id].is_some() {
            return Err(GraphError::Parse(format!("duplicate state id {id}")));
        }
        let target = entry
            .get("target")
            .and_then(|x| x.as_bool())
            .ok_or_else(|| GraphError::Parse(format!("state {id} missing boolean target flag")))?;
        let mut transitions = Vec::new();
        for (j, tv) in entry
            .get("transitions")
            .and_then(|x| x.as_array())
            .ok_or_else(|| GraphError::Parse(format!("state {id} missing transitions array")))?
            .iter()
            .enumerate()
        {
            let payload = payload_from_json(
                tv.get("payload").ok_or_else(|| {
                    GraphError::Parse(format!("state {id}, transition {j}: missing payload"))
                })?,
                exact,
            )?;
            let mut slots = Vec::new();
            for sv in tv.get("slots").and_then(|x| x.as_array()).ok_or_else(|| {
                GraphError::Parse(format!("state {id}, transition {j}: missing slots"))
            })? {
                let slot = sv.as_u64().ok_or_else(|| {
                    GraphError::Parse(format!("state {id}, transition {j}: bad slot"))
                })? as usize;
                if slot >= v {
                    return Err(GraphError::DanglingStateRef {
                        state: id,
                        transition: j,
                        slot,
                    });
                }
                slots.push(slot);
            }
            if let Err(e) = spec.modality.validate_payload(&payload, slots.len()) {
                // Arity problems stay loadable so validate() can report them.
                if !matches!(e, ModalityError::ArityMismatch { .. }) {
                    return Err(GraphError::Schema(format!(
                        "state {id}, transition {j}: {e}"
                    )));
                }
            }
            transitions.push(Transition::new(payload, slots));
        }
        states[id] = Some(StateData {
            target,
            transitions,
        });
    }
    let states: Vec<StateData> = states
        .into_iter()
        .map(|s| s.ok_or_else(|| GraphError::Parse("state ids must be dense".into())))
        .collect::<Result<_, _>>()?;

    let mut labels = BTreeMap::new();
    if let Some(serde_json::Value::Object(map)) = obj.get("labels") {
        for (k, v) in map {
            let idx: usize = k
                .parse()
                .map_err(|_| GraphError::Parse(format!("bad label key {k:?}")))?;
            let text = v
                .as_str()
                .ok_or_else(|| GraphError::Parse(format!("bad label value for {k}")))?;
            labels.insert(idx, text.to_string());
        }
    }

    Ok(WeightedGraph {
        instance: spec,
        states,
        labels,
        mode: if exact {
            NumericMode::Exact
        } else {
            NumericMode::Float
        },
    })
}

pub fn payload_to_json(payload: &Payload) -> serde_json::Value {
    let val = |w: &WeightValue| serde_json::Value::String(w.render());
    let vals = |ws: &[WeightValue]| serde_json::Value::Array(ws.iter().map(val).collect());
    match payload {
        Payload::Empty => serde_json::json!({}),
        Payload::Weight(w) => serde_json::json!({ "weight": val(w) }),
        Payload::WeightRate { weight, rate } => {
            serde_json::json!({ "rate": val(rate), "weight": val(weight) })
        }
        Payload::Capacity(c) => serde_json::json!({ "capacity": val(c) }),
        Payload::Prob(p) => serde_json::json!({ "prob": val(p) }),
        Payload::Weights(ws) => serde_json::json!({ "weights": vals(ws) }),
        Payload::Probs(ps) => serde_json::json!({ "probs": vals(ps) }),
    }
}

pub fn payload_from_json(value: &serde_json::Value, exact: bool) -> Result<Payload, GraphError> {
    let obj = value
        .as_object()
        .ok_or_else(|| GraphError::Parse(format!("payload must be an object, got {value}")))?;
    let scalar = |v: &serde_json::Value| -> Result<WeightValue, GraphError> {
        let raw = match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(GraphError::Parse(format!("bad number {other}"))),
        };
        Ok(WeightValue::parse(&raw, exact)?)
    };
    let vector = |v: &serde_json::Value| -> Result<Vec<WeightValue>, GraphError> {
        v.as_array()
            .ok_or_else(|| GraphError::Parse(format!("expected array, got {v}")))?
            .iter()
            .map(scalar)
            .collect()
    };
    let known = ["weight", "rate", "capacity", "prob", "weights", "probs"];
    if let Some(key) = obj.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(GraphError::Parse(format!("unknown payload field {key:?}")));
    }
    let payload = if obj.is_empty() {
        Payload::Empty
    } else if obj.contains_key("rate") {
        let weight = scalar(
            obj.get("weight")
                .ok_or_else(|| GraphError::Parse("rate payload needs weight".into()))?,
        )?;
        let rate = scalar(&obj["rate"])?;
        Payload::WeightRate { weight, rate }
    } else if let Some(w) = obj.get("weight") {
        Payload::Weight(scalar(w)?)
    } else if let Some(c) = obj.get("capacity") {
        Payload::Capacity(scalar(c)?)
    } else if let Some(p) = obj.get("prob") {
        Payload::Prob(scalar(p)?)
    } else if let Some(ws) = obj.get("weights") {
        Payload::Weights(vector(ws)?)
    } else if let Some(ps) = obj.get("probs") {
        Payload::Probs(vector(ps)?)
    } else {
        return Err(GraphError::Parse(format!("unrecognized payload {value}")));
    };
    Ok(payload)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::example_graph;

    #[test]
    fn successors_match_figure() {
        let g = example_graph("fig1_fig2").unwrap();
        assert_eq!(
            g.successors(2).unwrap().into_iter().collect::<Vec<_>>(),
            vec![0, 3, 4]
        );
        assert!(g.successors(0).unwrap().is_empty());
        assert!(g.successors(99).is_err());

        let neg = example_graph("neg_edges").unwrap();
        assert_eq!(
            neg.successors(1).unwrap().into_iter().collect::<Vec<_>>(),
            vec![0, 1]
        );
    }

    #[test]
    fn predecessors_match_figure() {
        let g = example_graph("fig1_fig2").unwrap();
        let idx = ReverseIndex::build(&g);
        let preds = predecessors(&g, &idx, &BTreeSet::from([0])).unwrap();
        assert_eq!(preds.into_iter().collect::<Vec<_>>(), vec![1, 2]);
        assert!(predecessors(&g, &idx, &BTreeSet::new()).unwrap().is_empty());

        let fig3 = example_graph("fig3").unwrap();
        let idx3 = ReverseIndex::build(&fig3);
        let preds = predecessors(&fig3, &idx3, &BTreeSet::from([2])).unwrap();
        assert_eq!(preds.into_iter().collect::<Vec<_>>(), vec![1, 3, 4]);
    }

    #[test]
    fn predecessor_duality() {
        for name in ["fig1_fig2", "fig3", "reach_game_sample"] {
            let g = example_graph(name).unwrap();
            let idx = ReverseIndex::build(&g);
            for y in 0..g.len() {
                let via_index = predecessors(&g, &idx, &BTreeSet::from([y])).unwrap();
                let via_scan: BTreeSet<StateId> = (0..g.len())
                    .filter(|&x| g.successors(x).unwrap().contains(&y))
                    .collect();
                assert_eq!(via_index, via_scan, "{name}, state {y}");
            }
        }
    }

    #[test]
    fn save_load_round_trip() {
        for name in crate::instances::EXAMPLE_NAMES {
            let g = example_graph(name).unwrap();
            let text = save_graph(&g);
            let loaded = load_graph(&text).unwrap();
            assert_eq!(loaded, g, "{name}");
            assert_eq!(save_graph(&loaded), text, "{name}");
        }
    }

    #[test]
    fn load_rejects_dangling_refs() {
        let text = r#"{
            "instance": {"id": "spp", "params": {}},
            "states": [
                {"id": 0, "target": true, "transitions": [{"payload": {"weight": "1"}, "slots": [1]}]}
            ]
        }"#;
        assert!(matches!(
            load_graph(text),
            Err(GraphError::DanglingStateRef { slot: 1, .. })
        ));
    }

    #[test]
    fn load_rejects_wrong_payload_shape() {
        let text = r#"{
            "instance": {"id": "spp", "params": {}},
            "states": [
                {"id": 0, "target": false, "transitions": [{"payload": {"probs": ["1/2", "1/2"]}, "slots": [0, 0]}]}
            ]
        }"#;
        assert!(matches!(load_graph(text), Err(GraphError::Schema(_))));
    }

    #[test]
    fn validate_reports_prob_sum_and_support() {
        let text = r#"{
            "instance": {"id": "prob-reach", "params": {}},
            "states": [
                {"id": 0, "target": true, "transitions": []},
                {"id": 1, "target": false, "transitions": [{"payload": {"probs": ["1/2", "2/5"]}, "slots": [0, 1]}]}
            ]
        }"#;
        let g = load_graph(text).unwrap();
        let diags = g.validate();
        assert!(diags
            .iter()
            .any(|d| d.state == 1 && d.transition == Some(0) && d.message.contains("ProbSum")));

        let text = r#"{
            "instance": {"id": "reach-game", "params": {}},
            "states": [
                {"id": 0, "target": false, "transitions": [{"payload": {}, "slots": []}]}
            ]
        }"#;
        let g = load_graph(text).unwrap();
        let diags = g.validate();
        assert!(
            diags
                .iter()
                .any(|d| d.message.contains("NonEmptySupportRequired")),
            "{diags:?}"
        );
    }

    #[test]
    fn numbers_parse_from_json_numbers_and_strings() {
        let text = r#"{
            "instance": {"id": "spp", "params": {}},
            "states": [
                {"id": 0, "target": true, "transitions": []},
                {"id": 1, "target": false, "transitions": [
                    {"payload": {"weight": 0.5}, "slots": [0]},
                    {"payload": {"weight": "3/2"}, "slots": [0]}
                ]}
            ]
        }"#;
        let g = load_graph(text).unwrap();
        assert_eq!(
            g.states[1].transitions[0].payload,
            Payload::Weight(WeightValue::ratio(1, 2))
        );
        assert_eq!(
            g.states[1].transitions[1].payload,
            Payload::Weight(WeightValue::ratio(3, 2))
        );
    }

    #[test]
    fn float_mode_converts_domain() {
        let g = example_graph("fig1_fig2").unwrap().to_float();
        assert_eq!(g.mode, NumericMode::Float);
        assert_eq!(g.instance.domain.xi, WeightValue::float(0.0));
        assert!(g.validate().is_empty());
        let round = load_graph(&save_graph(&g)).unwrap();
        assert_eq!(round, g);
    }
}
