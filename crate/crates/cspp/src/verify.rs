//! Verification tools: enumeration of the weight closure, expansiveness
//! checking with re-checkable witnesses, a run-tree oracle independent of the
//! solvers, the counterexample graph construction, and solver cross-checks.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::domain::WeightValue;
use crate::graph::{StateData, WeightedGraph};
use crate::instances::{instance, InstanceId, InstanceParams, InstanceSpec};
use crate::modality::{ModalityError, Payload, Transition};
use crate::solve::queue::QueueKind;
use crate::solve::{
    coalg_dijkstra, coalg_dijkstra_heap, kleene_gfp, DijkstraOptions, KleeneOptions, SolveResult,
    SolveStatus, Valuation,
};
use crate::StateId;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("instance mismatch: graph carries {graph}, operation requested {requested}")]
    InstanceMismatch { graph: String, requested: String },
    #[error("not a witness: {0}")]
    NotAWitness(String),
    #[error("enumeration budget of {0} exceeded")]
    CombinatorialBlowup(usize),
    #[error("cannot parse witness: {0}")]
    WitnessParse(String),
    #[error("analysis requires exact rational parameters")]
    InexactParams,
    #[error(transparent)]
    Modality(#[from] ModalityError),
}

/// Where the payloads fed to the verifier come from.
#[derive(Debug, Clone, Copy)]
pub enum PayloadSource<'a> {
    /// Exactly the payloads occurring in the graph.
    FromGraph(&'a WeightedGraph),
    /// Payloads drawn from the instance's declared payload distribution.
    Sampler { seed: u64, count: usize },
    /// Closed-form verdicts and canonical payload families.
    Analytic,
}

impl PayloadSource<'_> {
    pub fn mode_name(&self) -> &'static str {
        match self {
            PayloadSource::FromGraph(_) => "from-graph",
            PayloadSource::Sampler { .. } => "sampler",
            PayloadSource::Analytic => "analytic",
        }
    }
}

/// Caps for closure enumeration.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    pub max_set: usize,
    pub max_applications: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits {
            max_set: 10_000,
            max_applications: 1_000_000,
        }
    }
}

#[derive(Debug, Clone)]
struct Derivation {
    payload: Payload,
    slot_values: Vec<WeightValue>,
}

/// A finite approximation of the closure of `{xi, top}` under the modality:
/// level `n + 1` adds every value obtainable by one application over level
/// `n` values.
#[derive(Debug, Clone)]
pub struct OmegaSigmaSample {
    /// Cumulative value sets, one per depth.
    pub levels: Vec<BTreeSet<WeightValue>>,
    /// Some enumeration limit was hit; the sets are incomplete.
    pub capped: bool,
    derivations: BTreeMap<WeightValue, Derivation>,
    xi: WeightValue,
    top: WeightValue,
}

impl OmegaSigmaSample {
    pub fn values(&self) -> &BTreeSet<WeightValue> {
        self.levels.last().expect("at least depth zero")
    }

    /// Reconstructs how a value was built, as a construction tree.
    pub fn construction_tree(&self, v: &WeightValue) -> ConstructionTree {
        if *v == self.xi {
            return ConstructionTree::Leaf(BaseElement::Xi);
        }
        if *v == self.top {
            return ConstructionTree::Leaf(BaseElement::Top);
        }
        let derivation = self.derivations.get(v).expect("derived value");
        ConstructionTree::Apply {
            payload: derivation.payload.clone(),
            children: derivation
                .slot_values
                .iter()
                .map(|s| self.construction_tree(s))
                .collect(),
        }
    }
}

/// Distinct payloads (with their arities) supplied by a source.
fn source_payloads(
    spec: &InstanceSpec,
    source: &PayloadSource,
) -> Result<Vec<(Payload, usize)>, VerifyError> {
    match source {
        PayloadSource::FromGraph(graph) => {
            if graph.instance != *spec {
                return Err(VerifyError::InstanceMismatch {
                    graph: graph.instance.id.to_string(),
                    requested: spec.id.to_string(),
                });
            }
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for state in &graph.states {
                for t in &state.transitions {
                    let key = (t.payload.clone(), t.slots.len());
                    if seen.insert(key.clone()) {
                        out.push(key);
                    }
                }
            }
            Ok(out)
        }
        PayloadSource::Sampler { seed, count } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let mut seen = BTreeSet::new();
            let mut out = Vec::new();
            for _ in 0..*count {
                let drawn = crate::instances::sample_payload(spec, 3, &mut rng);
                if seen.insert(drawn.clone()) {
                    out.push(drawn);
                }
            }
            Ok(out)
        }
        PayloadSource::Analytic => Ok(canonical_payloads(spec)),
    }
}

/// Small fixed payload families, one per instance, for source-free closure
/// enumeration.
fn canonical_payloads(spec: &InstanceSpec) -> Vec<(Payload, usize)> {
    let w = WeightValue::int;
    match spec.id {
        InstanceId::Reach | InstanceId::Uspp | InstanceId::Ulongest => vec![(Payload::Empty, 1)],
        InstanceId::Spp => vec![
            (Payload::Weight(w(0)), 1),
            (Payload::Weight(w(1)), 1),
            (Payload::Weight(w(2)), 1),
        ],
        InstanceId::SppNeg => vec![(Payload::Weight(w(1)), 1), (Payload::Weight(w(-1)), 1)],
        InstanceId::SppInterest => vec![
            (
                Payload::WeightRate {
                    weight: w(0),
                    rate: w(1),
                },
                1,
            ),
            (
                Payload::WeightRate {
                    weight: w(1),
                    rate: w(2),
                },
                1,
            ),
        ],
        InstanceId::SppDiscount => vec![
            (
                Payload::WeightRate {
                    weight: w(1),
                    rate: w(1),
                },
                1,
            ),
            (
                Payload::WeightRate {
                    weight: w(0),
                    rate: w(0),
                },
                1,
            ),
            (
                Payload::WeightRate {
                    weight: w(1),
                    rate: WeightValue::ratio(1, 2),
                },
                1,
            ),
        ],
        InstanceId::Widest => vec![(Payload::Capacity(w(1)), 1), (Payload::Capacity(w(2)), 1)],
        InstanceId::Reliable => vec![
            (Payload::Prob(WeightValue::ratio(1, 2)), 1),
            (Payload::Prob(w(1)), 1),
        ],
        InstanceId::Bintree => {
            let t = match spec.modality.arity {
                crate::modality::ArityPolicy::Fixed(t) => t,
                _ => 2,
            };
            vec![(Payload::Weight(w(0)), t), (Payload::Weight(w(1)), t)]
        }
        InstanceId::BinReachGame => vec![(Payload::Empty, 2)],
        InstanceId::ReachGame => vec![(Payload::Empty, 1), (Payload::Empty, 2)],
        InstanceId::DynGame => vec![
            (Payload::Weights(vec![w(1)]), 1),
            (Payload::Weights(vec![w(1), w(2)]), 2),
        ],
        InstanceId::DynGameDiscount => {
            let InstanceParams::Discount { l0, l, .. } = &spec.params else {
                unreachable!()
            };
            vec![
                (Payload::Weights(vec![l0.clone()]), 1),
                (Payload::Weights(vec![l.clone()]), 1),
            ]
        }
        InstanceId::ProbReach => vec![
            (
                Payload::Probs(vec![WeightValue::ratio(1, 2), WeightValue::ratio(1, 2)]),
                2,
            ),
            (Payload::Probs(vec![w(1)]), 1),
        ],
    }
}

/// Iterated closure of `{xi, top}` under one-step applications.
pub fn omega_sigma(
    spec: &InstanceSpec,
    depth: usize,
    source: &PayloadSource,
    limits: &EnumerationLimits,
) -> Result<OmegaSigmaSample, VerifyError> {
    let payloads = source_payloads(spec, source)?;
    let dom = &spec.domain;
    let mut levels: Vec<BTreeSet<WeightValue>> = Vec::with_capacity(depth + 1);
    levels.push(BTreeSet::from([dom.xi.clone(), dom.top.clone()]));
    let mut derivations = BTreeMap::new();
    let mut capped = false;
    let mut applications = 0usize;

    'depths: for n in 0..depth {
        let prev: Vec<WeightValue> = levels[n].iter().cloned().collect();
        // Tuples entirely over the level before were already applied there;
        // enumerate only tuples whose FIRST fresh component sits at position
        // p, so each new tuple is visited exactly once.
        let fresh_flag: Vec<bool> = if n == 0 {
            vec![true; prev.len()]
        } else {
            prev.iter().map(|v| !levels[n - 1].contains(v)).collect()
        };
        let stale_idx: Vec<usize> = (0..prev.len()).filter(|&i| !fresh_flag[i]).collect();
        let fresh_idx: Vec<usize> = (0..prev.len()).filter(|&i| fresh_flag[i]).collect();
        let all_idx: Vec<usize> = (0..prev.len()).collect();
        let mut next = levels[n].clone();
        for (payload, arity) in &payloads {
            let k = *arity;
            for p in 0..k {
                let slots: Vec<&[usize]> = (0..k)
                    .map(|q| {
                        if q < p {
                            stale_idx.as_slice()
                        } else if q == p {
                            fresh_idx.as_slice()
                        } else {
                            all_idx.as_slice()
                        }
                    })
                    .collect();
                if slots.iter().any(|s| s.is_empty()) {
                    continue;
                }
                let mut idx = vec![0usize; k];
                'tuples: loop {
                    if next.len() >= limits.max_set || applications >= limits.max_applications {
                        capped = true;
                        levels.push(next);
                        break 'depths;
                    }
                    let tuple: Vec<WeightValue> =
                        (0..k).map(|q| prev[slots[q][idx[q]]].clone()).collect();
                    applications += 1;
                    let value = spec.modality.apply(dom, payload, &tuple)?;
                    if !levels[n].contains(&value) && !next.contains(&value) {
                        derivations
                            .entry(value.clone())
                            .or_insert_with(|| Derivation {
                                payload: payload.clone(),
                                slot_values: tuple.clone(),
                            });
                        next.insert(value);
                    }
                    // advance mixed-radix counter
                    let mut pos = 0;
                    loop {
                        if pos == idx.len() {
                            break 'tuples;
                        }
                        idx[pos] += 1;
                        if idx[pos] < slots[pos].len() {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                }
            }
        }
        levels.push(next);
    }
    while levels.len() <= depth {
        levels.push(levels.last().expect("non-empty").clone());
    }
    Ok(OmegaSigmaSample {
        levels,
        capped,
        derivations,
        xi: dom.xi.clone(),
        top: dom.top.clone(),
    })
}

/// A derivation of one closure element: leaves are the base elements, each
/// internal node applies the modality to its children's values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstructionTree {
    Leaf(BaseElement),
    Apply {
        payload: Payload,
        children: Vec<ConstructionTree>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseElement {
    Xi,
    Top,
}

impl ConstructionTree {
    /// The element this tree constructs.
    pub fn value(&self, spec: &InstanceSpec) -> Result<WeightValue, ModalityError> {
        match self {
            ConstructionTree::Leaf(BaseElement::Xi) => Ok(spec.domain.xi.clone()),
            ConstructionTree::Leaf(BaseElement::Top) => Ok(spec.domain.top.clone()),
            ConstructionTree::Apply { payload, children } => {
                let slot_values: Result<Vec<WeightValue>, ModalityError> =
                    children.iter().map(|c| c.value(spec)).collect();
                spec.modality.apply(&spec.domain, payload, &slot_values?)
            }
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ConstructionTree::Leaf(BaseElement::Xi) => serde_json::json!({ "leaf": "xi" }),
            ConstructionTree::Leaf(BaseElement::Top) => serde_json::json!({ "leaf": "top" }),
            ConstructionTree::Apply { payload, children } => serde_json::json!({
                "payload": crate::graph::payload_to_json(payload),
                "children": children.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn from_json(value: &serde_json::Value) -> Result<ConstructionTree, VerifyError> {
        let obj = value.as_object().ok_or_else(|| {
            VerifyError::WitnessParse(format!("tree node must be an object, got {value}"))
        })?;
        if let Some(leaf) = obj.get("leaf") {
            return match leaf.as_str() {
                Some("xi") => Ok(ConstructionTree::Leaf(BaseElement::Xi)),
                Some("top") => Ok(ConstructionTree::Leaf(BaseElement::Top)),
                other => Err(VerifyError::WitnessParse(format!("unknown leaf {other:?}"))),
            };
        }
        let payload = crate::graph::payload_from_json(
            obj.get("payload")
                .ok_or_else(|| VerifyError::WitnessParse("node without payload".into()))?,
            true,
        )
        .map_err(|e| VerifyError::WitnessParse(e.to_string()))?;
        let children = obj
            .get("children")
            .and_then(|c| c.as_array())
            .ok_or_else(|| VerifyError::WitnessParse("node without children".into()))?
            .iter()
            .map(ConstructionTree::from_json)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ConstructionTree::Apply { payload, children })
    }
}

/// A non-expansiveness witness: the root application, with the offending slot
/// whose value is strictly above the root's result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotExpansiveWitness {
    pub tree: ConstructionTree,
    pub offending_slot: usize,
}

impl NotExpansiveWitness {
    /// Re-checks the defining inequality; every consumer validates before
    /// trusting a witness.
    pub fn validate(&self, spec: &InstanceSpec) -> Result<(), VerifyError> {
        let ConstructionTree::Apply { children, .. } = &self.tree else {
            return Err(VerifyError::NotAWitness(
                "witness root must be an application".into(),
            ));
        };
        let child = children.get(self.offending_slot).ok_or_else(|| {
            VerifyError::NotAWitness(format!(
                "offending slot {} out of range",
                self.offending_slot
            ))
        })?;
        let slot_value = child.value(spec)?;
        let sigma = self.tree.value(spec)?;
        if spec.domain.lt(&sigma, &slot_value) {
            Ok(())
        } else {
            Err(VerifyError::NotAWitness(format!(
                "slot value {slot_value} is not strictly above sigma value {sigma}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// No violation found. `depth_checked` is `None` only for closed-form
    /// verdicts; bounded enumeration is always depth-qualified.
    Expansive {
        depth_checked: Option<usize>,
    },
    NotExpansive {
        witness: NotExpansiveWitness,
    },
    Unknown {
        reason: String,
    },
}

#[derive(Debug, Clone)]
pub struct ExpansivenessReport {
    pub instance: InstanceSpec,
    pub verdict: Verdict,
    pub mode: &'static str,
    pub depth: usize,
}

impl ExpansivenessReport {
    pub fn is_expansive(&self) -> bool {
        matches!(self.verdict, Verdict::Expansive { .. })
    }

    pub fn witness(&self) -> Option<&NotExpansiveWitness> {
        match &self.verdict {
            Verdict::NotExpansive { witness } => Some(witness),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        obj.insert(
            "instance".to_string(),
            serde_json::json!({
                "id": self.instance.id.as_str(),
                "params": crate::instances::params_to_json(&self.instance.params),
            }),
        );
        obj.insert("mode".to_string(), serde_json::json!(self.mode));
        obj.insert("depth".to_string(), serde_json::json!(self.depth));
        match &self.verdict {
            Verdict::Expansive { depth_checked } => {
                obj.insert("verdict".to_string(), serde_json::json!("expansive"));
                obj.insert(
                    "depth_checked".to_string(),
                    serde_json::json!(depth_checked),
                );
            }
            Verdict::NotExpansive { witness } => {
                obj.insert("verdict".to_string(), serde_json::json!("not-expansive"));
                obj.insert(
                    "witness".to_string(),
                    serde_json::json!({
                        "offending_slot": witness.offending_slot,
                        "tree": witness.tree.to_json(),
                    }),
                );
            }
            Verdict::Unknown { reason } => {
                obj.insert("verdict".to_string(), serde_json::json!("unknown"));
                obj.insert("reason".to_string(), serde_json::json!(reason));
            }
        }
        serde_json::Value::Object(obj)
    }

    pub fn from_json(value: &serde_json::Value) -> Result<ExpansivenessReport, VerifyError> {
        let id = value
            .pointer("/instance/id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| VerifyError::WitnessParse("missing instance id".into()))?;
        let id = InstanceId::parse(id).map_err(|e| VerifyError::WitnessParse(e.to_string()))?;
        let params = crate::instances::params_from_json(id, value.pointer("/instance/params"))
            .map_err(|e| VerifyError::WitnessParse(e.to_string()))?;
        let spec = instance(id, params).map_err(|e| VerifyError::WitnessParse(e.to_string()))?;
        let depth = value.get("depth").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
        let verdict = match value.get("verdict").and_then(|v| v.as_str()) {
            Some("expansive") => Verdict::Expansive {
                depth_checked: value
                    .get("depth_checked")
                    .and_then(|v| v.as_u64())
                    .map(|d| d as usize),
            },
            Some("not-expansive") => {
                let tree =
                    ConstructionTree::from_json(value.pointer("/witness/tree").ok_or_else(
                        || VerifyError::WitnessParse("missing witness tree".into()),
                    )?)?;
                let offending_slot = value
                    .pointer("/witness/offending_slot")
                    .and_then(|v| v.as_u64())
                    .ok_or_else(|| VerifyError::WitnessParse("missing offending slot".into()))?
                    as usize;
                Verdict::NotExpansive {
                    witness: NotExpansiveWitness {
                        tree,
                        offending_slot,
                    },
                }
            }
            Some("unknown") => Verdict::Unknown {
                reason: value
                    .get("reason")
                    .and_then(|v| v.as_str())
                    .unwrap_or("")
                    .to_string(),
            },
            other => return Err(VerifyError::WitnessParse(format!("bad verdict {other:?}"))),
        };
        Ok(ExpansivenessReport {
            instance: spec,
            verdict,
            mode: "file",
            depth,
        })
    }
}

/// Expansiveness check. Sampled modes enumerate applications with slot values
/// drawn from the depth-bounded closure and report the first violation as a
/// minimal-depth witness; the analytic mode returns the closed-form verdict.
pub fn check_expansive(
    spec: &InstanceSpec,
    depth: usize,
    source: &PayloadSource,
    budget: usize,
) -> Result<ExpansivenessReport, VerifyError> {
    if matches!(source, PayloadSource::Analytic) {
        let verdict = analytic_verdict(spec)?;
        if let Verdict::NotExpansive { witness } = &verdict {
            witness.validate(spec)?;
        }
        return Ok(ExpansivenessReport {
            instance: spec.clone(),
            verdict,
            mode: "analytic",
            depth,
        });
    }

    let limits = EnumerationLimits {
        max_applications: budget,
        ..Default::default()
    };
    let omega = omega_sigma(spec, depth, source, &limits)?;
    let payloads = source_payloads(spec, source)?;
    let dom = &spec.domain;
    let mut applications = 0usize;
    let mut covered = !omega.capped;

    'depths: for n in 0..=depth {
        let level: Vec<WeightValue> = omega.levels[n].iter().cloned().collect();
        if level.is_empty() {
            continue;
        }
        // Tuples already checked at an earlier depth are not revisited: each
        // tuple is enumerated at its first fresh component.
        let fresh_flag: Vec<bool> = if n == 0 {
            vec![true; level.len()]
        } else {
            level
                .iter()
                .map(|v| !omega.levels[n - 1].contains(v))
                .collect()
        };
        let stale_idx: Vec<usize> = (0..level.len()).filter(|&i| !fresh_flag[i]).collect();
        let fresh_idx: Vec<usize> = (0..level.len()).filter(|&i| fresh_flag[i]).collect();
        let all_idx: Vec<usize> = (0..level.len()).collect();
        for (payload, arity) in &payloads {
            let k = *arity;
            for p in 0..k {
                let slots: Vec<&[usize]> = (0..k)
                    .map(|q| {
                        if q < p {
                            stale_idx.as_slice()
                        } else if q == p {
                            fresh_idx.as_slice()
                        } else {
                            all_idx.as_slice()
                        }
                    })
                    .collect();
                if slots.iter().any(|s| s.is_empty()) {
                    continue;
                }
                let mut idx = vec![0usize; k];
                'tuples: loop {
                    if applications >= budget {
                        covered = false;
                        break 'depths;
                    }
                    let tuple: Vec<WeightValue> =
                        (0..k).map(|q| level[slots[q][idx[q]]].clone()).collect();
                    applications += 1;
                    let sigma = spec.modality.apply(dom, payload, &tuple)?;
                    for (slot, b) in tuple.iter().enumerate() {
                        if !dom.le(b, &sigma) {
                            let witness = NotExpansiveWitness {
                                tree: ConstructionTree::Apply {
                                    payload: payload.clone(),
                                    children: tuple
                                        .iter()
                                        .map(|v| omega.construction_tree(v))
                                        .collect(),
                                },
                                offending_slot: slot,
                            };
                            witness.validate(spec)?;
                            return Ok(ExpansivenessReport {
                                instance: spec.clone(),
                                verdict: Verdict::NotExpansive { witness },
                                mode: source.mode_name(),
                                depth: n,
                            });
                        }
                    }
                    let mut pos = 0;
                    loop {
                        if pos == idx.len() {
                            break 'tuples;
                        }
                        idx[pos] += 1;
                        if idx[pos] < slots[pos].len() {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                }
            }
        }
    }

    let verdict = if covered {
        Verdict::Expansive {
            depth_checked: Some(depth),
        }
    } else {
        Verdict::Unknown {
            reason: format!(
                "budget of {budget} applications exhausted before covering depth {depth}"
            ),
        }
    };
    Ok(ExpansivenessReport {
        instance: spec.clone(),
        verdict,
        mode: source.mode_name(),
        depth,
    })
}

/// Closed-form verdict per catalog row, with canonical witnesses for the
/// negative rows.
fn analytic_verdict(spec: &InstanceSpec) -> Result<Verdict, VerifyError> {
    let w = WeightValue::int;
    let leaf_xi = ConstructionTree::Leaf(BaseElement::Xi);
    let apply = |payload: Payload, children: Vec<ConstructionTree>| ConstructionTree::Apply {
        payload,
        children,
    };
    let witness = |tree: ConstructionTree| Verdict::NotExpansive {
        witness: NotExpansiveWitness {
            tree,
            offending_slot: 0,
        },
    };
    Ok(match spec.id {
        InstanceId::Reach
        | InstanceId::Uspp
        | InstanceId::Spp
        | InstanceId::SppInterest
        | InstanceId::Widest
        | InstanceId::Reliable
        | InstanceId::Bintree
        | InstanceId::BinReachGame
        | InstanceId::ReachGame
        | InstanceId::DynGame => Verdict::Expansive {
            depth_checked: None,
        },
        // The final weight 0 is also the top of the reversed order, and one
        // step already exceeds it: 0 is not below 1 + 0.
        InstanceId::Ulongest => witness(apply(Payload::Empty, vec![leaf_xi])),
        // 1 = sigma(1, xi) but sigma(-1, 1) = 0 drops below it.
        InstanceId::SppNeg => witness(apply(
            Payload::Weight(w(-1)),
            vec![apply(Payload::Weight(w(1)), vec![leaf_xi])],
        )),
        // 1 = sigma(1, 1, xi) but sigma(0, 0, 1) = 0 drops below it.
        InstanceId::SppDiscount => witness(apply(
            Payload::WeightRate {
                weight: w(0),
                rate: w(0),
            },
            vec![apply(
                Payload::WeightRate {
                    weight: w(1),
                    rate: w(1),
                },
                vec![leaf_xi],
            )],
        )),
        // The fair coin between a target and a non-target: the top-valued
        // slot is not below the expectation 1/2.
        InstanceId::ProbReach => witness(apply(
            Payload::Probs(vec![WeightValue::ratio(1, 2), WeightValue::ratio(1, 2)]),
            vec![ConstructionTree::Leaf(BaseElement::Top), leaf_xi],
        )),
        InstanceId::DynGameDiscount => {
            if spec.analytic_dijkstra_applies() {
                Verdict::Expansive {
                    depth_checked: None,
                }
            } else {
                let InstanceParams::Discount { l0, l, r, xi } = &spec.params else {
                    unreachable!()
                };
                // Grow b_{n+1} = L + r b_n from xi until the singleton move
                // {(l0, b)} fails: b > l0 + r b.
                let dom = &spec.domain;
                let mut tree = leaf_xi;
                let mut b = xi.clone();
                for _ in 0..100_000usize {
                    let sigma = l0.add(&r.mul_absorbing_inf(&b));
                    if dom.lt(&sigma, &b) {
                        return Ok(witness(apply(
                            Payload::Weights(vec![l0.clone()]),
                            vec![tree],
                        )));
                    }
                    tree = apply(Payload::Weights(vec![l.clone()]), vec![tree]);
                    b = l.add(&r.mul_absorbing_inf(&b));
                }
                Verdict::Unknown {
                    reason: "no violation found within the growth bound".into(),
                }
            }
        }
    })
}

// --- run trees ---

/// An unfolding of the graph from a state. A leaf stops at a target (whose
/// value is the final weight); an internal node picks one transition of its
/// state and has one child per slot. This follows the Bellman operator's
/// reading of targets, which may also continue through their transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTree {
    pub state: StateId,
    /// `None` marks a leaf; otherwise the chosen transition index and the
    /// per-slot children.
    pub step: Option<(usize, Vec<RunTree>)>,
}

impl RunTree {
    pub fn height(&self) -> usize {
        match &self.step {
            None => 0,
            Some((_, children)) => 1 + children.iter().map(RunTree::height).max().unwrap_or(0),
        }
    }

    /// The accumulated weight of this unfolding.
    pub fn sigma_value(&self, graph: &WeightedGraph) -> WeightValue {
        match &self.step {
            None => graph.instance.domain.xi.clone(),
            Some((j, children)) => {
                let t = &graph.states[self.state].transitions[*j];
                let slot_values: Vec<WeightValue> =
                    children.iter().map(|c| c.sigma_value(graph)).collect();
                graph
                    .instance
                    .modality
                    .apply_raw(&graph.instance.domain, &t.payload, &slot_values)
            }
        }
    }
}

/// Materializes every run tree of height at most `max_height` rooted at `x`.
/// Exponential; intended for small regression graphs.
pub fn enumerate_run_trees(
    graph: &WeightedGraph,
    x: StateId,
    max_height: usize,
    budget: usize,
) -> Result<Vec<RunTree>, VerifyError> {
    fn go(
        graph: &WeightedGraph,
        x: StateId,
        height: usize,
        budget: usize,
        count: &mut usize,
    ) -> Result<Vec<RunTree>, VerifyError> {
        let mut out = Vec::new();
        if graph.states[x].target {
            out.push(RunTree {
                state: x,
                step: None,
            });
        }
        if height > 0 {
            for (j, t) in graph.states[x].transitions.iter().enumerate() {
                let mut per_slot: Vec<Vec<RunTree>> = Vec::with_capacity(t.slots.len());
                for &slot in &t.slots {
                    per_slot.push(go(graph, slot, height - 1, budget, count)?);
                }
                if per_slot.iter().any(|s| s.is_empty()) {
                    continue;
                }
                let mut idx = vec![0usize; per_slot.len()];
                'tuples: loop {
                    *count += 1;
                    if *count > budget {
                        return Err(VerifyError::CombinatorialBlowup(budget));
                    }
                    let children: Vec<RunTree> = idx
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| per_slot[i][k].clone())
                        .collect();
                    out.push(RunTree {
                        state: x,
                        step: Some((j, children)),
                    });
                    let mut pos = 0;
                    loop {
                        if pos == idx.len() {
                            break 'tuples;
                        }
                        idx[pos] += 1;
                        if idx[pos] < per_slot[pos].len() {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                }
            }
        }
        Ok(out)
    }
    let mut count = 0usize;
    go(graph, x, max_height, budget, &mut count)
}

/// Per-state, per-height sets of run-tree values, computed bottom-up without
/// materializing trees: the set at `(x, h)` combines the final weight for
/// target leaves with one application over slot-wise choices from `h - 1`.
pub fn run_tree_value_table(
    graph: &WeightedGraph,
    max_height: usize,
    budget: usize,
) -> Result<Vec<Vec<BTreeSet<WeightValue>>>, VerifyError> {
    let v = graph.len();
    let dom = &graph.instance.domain;
    let base: Vec<BTreeSet<WeightValue>> = (0..v)
        .map(|x| {
            if graph.states[x].target {
                BTreeSet::from([dom.xi.clone()])
            } else {
                BTreeSet::new()
            }
        })
        .collect();
    let mut table = vec![base.clone()];
    let mut applications = 0usize;
    for h in 1..=max_height {
        let prev = &table[h - 1];
        let mut next = base.clone();
        for x in 0..v {
            for t in &graph.states[x].transitions {
                let slot_sets: Vec<Vec<WeightValue>> = t
                    .slots
                    .iter()
                    .map(|&s| prev[s].iter().cloned().collect())
                    .collect();
                if slot_sets.iter().any(|s| s.is_empty()) {
                    continue;
                }
                let mut idx = vec![0usize; slot_sets.len()];
                'tuples: loop {
                    applications += 1;
                    if applications > budget {
                        return Err(VerifyError::CombinatorialBlowup(budget));
                    }
                    let tuple: Vec<WeightValue> = idx
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| slot_sets[i][k].clone())
                        .collect();
                    next[x].insert(graph.instance.modality.apply_raw(dom, &t.payload, &tuple));
                    let mut pos = 0;
                    loop {
                        if pos == idx.len() {
                            break 'tuples;
                        }
                        idx[pos] += 1;
                        if idx[pos] < slot_sets[pos].len() {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                }
            }
        }
        table.push(next);
    }
    Ok(table)
}

/// The infimum of run-tree values of height at most `max_height` rooted at
/// `x`; top when no run tree exists.
pub fn run_tree_infimum(
    graph: &WeightedGraph,
    x: StateId,
    max_height: usize,
    budget: usize,
) -> Result<WeightValue, VerifyError> {
    let table = run_tree_value_table(graph, max_height, budget)?;
    let dom = &graph.instance.domain;
    Ok(dom
        .meet(table[max_height][x].iter())
        .expect("carrier values"))
}

// --- contraction coalgebra ---

/// Builds the graph on the witness tree's nodes minus the root; the node for
/// the offending child additionally carries the root's transition. Children
/// with equal values collapse into one state, leaves labelled with the final
/// weight become targets.
pub fn contraction_coalgebra(
    spec: &InstanceSpec,
    witness: &NotExpansiveWitness,
) -> Result<WeightedGraph, VerifyError> {
    witness.validate(spec)?;
    let ConstructionTree::Apply {
        payload: root_payload,
        children: root_children,
    } = &witness.tree
    else {
        unreachable!("validated root is an application");
    };

    let mut states: Vec<StateData> = Vec::new();

    fn build(
        spec: &InstanceSpec,
        node: &ConstructionTree,
        states: &mut Vec<StateData>,
    ) -> Result<StateId, VerifyError> {
        match node {
            ConstructionTree::Leaf(BaseElement::Xi) => {
                states.push(StateData {
                    target: true,
                    transitions: vec![],
                });
                Ok(states.len() - 1)
            }
            ConstructionTree::Leaf(BaseElement::Top) => {
                states.push(StateData {
                    target: false,
                    transitions: vec![],
                });
                Ok(states.len() - 1)
            }
            ConstructionTree::Apply { payload, children } => {
                let slots = build_children(spec, children, None, states)?;
                states.push(StateData {
                    target: false,
                    transitions: vec![Transition::new(payload.clone(), slots)],
                });
                Ok(states.len() - 1)
            }
        }
    }

    /// Builds each distinct child value once and returns the per-slot state
    /// ids. When `last_value` is given, the child carrying that value is
    /// built after all the others.
    fn build_children(
        spec: &InstanceSpec,
        children: &[ConstructionTree],
        last_value: Option<&WeightValue>,
        states: &mut Vec<StateData>,
    ) -> Result<Vec<StateId>, VerifyError> {
        let values: Vec<WeightValue> = children
            .iter()
            .map(|c| c.value(spec))
            .collect::<Result<_, _>>()?;
        let mut state_of: BTreeMap<WeightValue, StateId> = BTreeMap::new();
        let mut order: Vec<usize> = (0..children.len()).collect();
        if let Some(last) = last_value {
            order.sort_by_key(|&i| values[i] == *last);
        }
        for i in order {
            if !state_of.contains_key(&values[i]) {
                let id = build(spec, &children[i], states)?;
                state_of.insert(values[i].clone(), id);
            }
        }
        Ok(values.iter().map(|v| state_of[v]).collect())
    }

    let offending_value = root_children[witness.offending_slot].value(spec)?;
    let root_slots = build_children(spec, root_children, Some(&offending_value), &mut states)?;
    let grafted = root_slots[witness.offending_slot];
    states[grafted]
        .transitions
        .push(Transition::new(root_payload.clone(), root_slots));

    let graph = WeightedGraph::new(spec.clone(), states);
    Ok(graph)
}

// --- cross-checking ---

#[derive(Debug, Clone)]
pub struct CrossCheckConfig {
    pub kleene: KleeneOptions,
    /// Compute the run-tree oracle per state at this height.
    pub run_tree_height: Option<usize>,
    pub run_tree_budget: usize,
    /// Comparison tolerance; `None` compares exactly.
    pub tol: Option<f64>,
    pub expansiveness_depth: usize,
}

impl Default for CrossCheckConfig {
    fn default() -> Self {
        CrossCheckConfig {
            kleene: KleeneOptions::default(),
            run_tree_height: None,
            run_tree_budget: 1_000_000,
            tol: None,
            expansiveness_depth: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Disagreement {
    pub left: &'static str,
    pub right: &'static str,
    pub state: StateId,
    pub left_value: WeightValue,
    pub right_value: WeightValue,
}

/// The monitoring caveat attached to every report: a clean monitored run is
/// not a proof.
pub const MONITOR_CAVEAT: &str =
    "a run without recorded violations does not certify correctness on \
this input: the correctness condition quantifies over all derivable weights, not only the \
applications this run happened to evaluate";

#[derive(Debug, Clone)]
pub struct CrossCheckReport {
    pub dijkstra: SolveResult,
    pub dijkstra_heap: SolveResult,
    pub kleene: SolveResult,
    pub run_tree: Option<Vec<WeightValue>>,
    pub disagreements: Vec<Disagreement>,
    pub expansiveness: Option<ExpansivenessReport>,
    pub monitor_caveat: &'static str,
}

impl CrossCheckReport {
    pub fn agreed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Runs both Dijkstra solvers and Kleene iteration (plus the run-tree oracle
/// when requested), reporting pairwise disagreements and the graph-sourced
/// expansiveness verdict.
pub fn cross_check(graph: &WeightedGraph, config: &CrossCheckConfig) -> CrossCheckReport {
    let (dijkstra, _) = coalg_dijkstra(
        graph,
        &DijkstraOptions {
            monitor: true,
            ..Default::default()
        },
    );
    let dijkstra_heap = coalg_dijkstra_heap(graph, QueueKind::Fibonacci);
    let kleene = kleene_gfp(graph, &config.kleene);

    let tol = config.tol.map(|t| match graph.mode {
        crate::graph::NumericMode::Exact => {
            WeightValue::Rational(BigRational::from_float(t).expect("finite tolerance"))
        }
        crate::graph::NumericMode::Float => WeightValue::float(t),
    });
    let mut disagreements = Vec::new();
    let mut compare = |left: &'static str, a: &Valuation, right: &'static str, b: &Valuation| {
        for x in 0..a.len() {
            let agree = match &tol {
                None => a.0[x] == b.0[x],
                Some(t) => a.0[x].within(&b.0[x], t),
            };
            if !agree {
                disagreements.push(Disagreement {
                    left,
                    right,
                    state: x,
                    left_value: a.0[x].clone(),
                    right_value: b.0[x].clone(),
                });
            }
        }
    };
    compare(
        "dijkstra",
        &dijkstra.valuation,
        "dijkstra-heap",
        &dijkstra_heap.valuation,
    );
    compare("dijkstra", &dijkstra.valuation, "kleene", &kleene.valuation);

    let run_tree = config.run_tree_height.and_then(|h| {
        let table = run_tree_value_table(graph, h, config.run_tree_budget).ok()?;
        let dom = &graph.instance.domain;
        Some(
            (0..graph.len())
                .map(|x| dom.meet(table[h][x].iter()).expect("carrier values"))
                .collect::<Vec<_>>(),
        )
    });
    if let (Some(values), SolveStatus::Stabilized(n)) = (&run_tree, &kleene.status) {
        // The oracle at height h is the (h+1)-st Bellman iterate, so it only
        // equals the fixed point once h has passed the stabilization point.
        if config.run_tree_height.unwrap_or(0) + 2 >= *n {
            let oracle = Valuation(values.clone());
            compare("run-tree", &oracle, "kleene", &kleene.valuation);
        }
    }

    let expansiveness = check_expansive(
        &graph.instance,
        config.expansiveness_depth,
        &PayloadSource::FromGraph(graph),
        200_000,
    )
    .ok();

    CrossCheckReport {
        dijkstra,
        dijkstra_heap,
        kleene,
        run_tree,
        disagreements,
        expansiveness,
        monitor_caveat: MONITOR_CAVEAT,
    }
}

// --- discounted-game condition analysis ---

/// Evaluates the uniform stepwise condition
/// `L * sum_{j<n} r^j + r^n * xi <= l0 / (1 - r)` for all `n` up to a bound
/// plus the limit check, alongside the closed-form expansiveness verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscountConditionReport {
    pub uniform_holds: bool,
    pub first_violation: Option<usize>,
    pub limit_holds: bool,
    pub expansive: bool,
    /// The uniform condition and expansiveness must coincide.
    pub agree: bool,
}

pub fn discount_condition_report(
    l0: &WeightValue,
    l: &WeightValue,
    r: &WeightValue,
    xi: &WeightValue,
    n_bound: usize,
) -> Result<DiscountConditionReport, VerifyError> {
    let as_rat = |v: &WeightValue| match v {
        WeightValue::Rational(x) => Ok(x.clone()),
        _ => Err(VerifyError::InexactParams),
    };
    let spec = instance(
        InstanceId::DynGameDiscount,
        InstanceParams::Discount {
            l0: l0.clone(),
            l: l.clone(),
            r: r.clone(),
            xi: xi.clone(),
        },
    )
    .map_err(|e| VerifyError::WitnessParse(e.to_string()))?;
    let expansive = spec.analytic_dijkstra_applies();

    let (l0, l, r, xi) = (as_rat(l0)?, as_rat(l)?, as_rat(r)?, as_rat(xi)?);
    if r.is_one() {
        // The bound 1/(1-r) degenerates; expansiveness holds outright.
        return Ok(DiscountConditionReport {
            uniform_holds: true,
            first_violation: None,
            limit_holds: true,
            expansive,
            agree: expansive,
        });
    }
    let bound = &l0 / (BigRational::one() - &r);
    let mut geometric = BigRational::from_integer(0.into()); // sum_{j<n} r^j
    let mut r_pow = BigRational::one(); // r^n
    let mut first_violation = None;
    for n in 0..=n_bound {
        let lhs = &l * &geometric + &r_pow * &xi;
        if lhs > bound {
            first_violation = Some(n);
            break;
        }
        geometric += &r_pow;
        r_pow *= &r;
    }
    let limit_holds = l <= l0;
    let uniform_holds = first_violation.is_none() && limit_holds;
    Ok(DiscountConditionReport {
        uniform_holds,
        first_violation,
        limit_holds,
        expansive,
        agree: uniform_holds == expansive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{example_graph, instance_default};

    #[test]
    fn omega_sigma_base_and_one_step() {
        let spec = instance_default(InstanceId::Spp);
        let g = example_graph("fig1_fig2").unwrap();
        let omega = omega_sigma(
            &spec,
            1,
            &PayloadSource::FromGraph(&g),
            &EnumerationLimits::default(),
        )
        .unwrap();
        let expected: BTreeSet<WeightValue> = [0, 1, 2, 3, 6]
            .into_iter()
            .map(WeightValue::int)
            .chain([WeightValue::PlusInf])
            .collect();
        assert_eq!(omega.values(), &expected);
        assert_eq!(
            omega.levels[0],
            BTreeSet::from([WeightValue::int(0), WeightValue::PlusInf])
        );
        assert!(!omega.capped);

        let reach = instance_default(InstanceId::Reach);
        let omega = omega_sigma(
            &reach,
            4,
            &PayloadSource::Analytic,
            &EnumerationLimits::default(),
        )
        .unwrap();
        assert_eq!(
            omega.values(),
            &BTreeSet::from([WeightValue::int(0), WeightValue::PlusInf])
        );
    }

    #[test]
    fn omega_sigma_levels_are_increasing_and_derivable() {
        let limits = EnumerationLimits {
            max_set: 400,
            max_applications: 50_000,
        };
        for id in crate::instances::ALL_INSTANCES {
            let spec = instance_default(id);
            let omega = omega_sigma(
                &spec,
                3,
                &PayloadSource::Sampler { seed: 5, count: 4 },
                &limits,
            )
            .unwrap();
            for n in 1..omega.levels.len() {
                assert!(omega.levels[n].is_superset(&omega.levels[n - 1]), "{id}");
                for v in omega.levels[n].difference(&omega.levels[n - 1]) {
                    let tree = omega.construction_tree(v);
                    assert_eq!(&tree.value(&spec).unwrap(), v, "{id}");
                }
            }
        }
    }

    #[test]
    fn analytic_verdicts_match_catalog() {
        for id in crate::instances::ALL_INSTANCES {
            let spec = instance_default(id);
            let report = check_expansive(&spec, 3, &PayloadSource::Analytic, 100_000).unwrap();
            let expect_yes = spec.analytic_dijkstra_applies();
            assert_eq!(report.is_expansive(), expect_yes, "{id}");
            if let Some(witness) = report.witness() {
                witness.validate(&spec).unwrap();
            }
        }
    }

    #[test]
    fn from_graph_check_finds_negative_edge_witness() {
        let g = example_graph("neg_edges").unwrap();
        let report =
            check_expansive(&g.instance, 3, &PayloadSource::FromGraph(&g), 100_000).unwrap();
        let witness = report.witness().expect("negative edges are not expansive");
        witness.validate(&g.instance).unwrap();
    }

    #[test]
    fn from_graph_check_certifies_spp_to_depth() {
        let g = example_graph("fig1_fig2").unwrap();
        let report =
            check_expansive(&g.instance, 3, &PayloadSource::FromGraph(&g), 500_000).unwrap();
        assert_eq!(
            report.verdict,
            Verdict::Expansive {
                depth_checked: Some(3)
            }
        );
    }

    #[test]
    fn witness_round_trips_through_json() {
        let spec = instance_default(InstanceId::SppNeg);
        let report = check_expansive(&spec, 3, &PayloadSource::Analytic, 1000).unwrap();
        let json = report.to_json();
        let parsed = ExpansivenessReport::from_json(&json).unwrap();
        assert_eq!(parsed.witness(), report.witness());

        let spec = instance_default(InstanceId::Spp);
        let report = check_expansive(&spec, 2, &PayloadSource::Analytic, 1000).unwrap();
        let parsed = ExpansivenessReport::from_json(&report.to_json()).unwrap();
        assert!(matches!(
            parsed.verdict,
            Verdict::Expansive {
                depth_checked: None
            }
        ));

        let unknown = ExpansivenessReport {
            instance: spec,
            verdict: Verdict::Unknown {
                reason: "budget".into(),
            },
            mode: "sampler",
            depth: 2,
        };
        let parsed = ExpansivenessReport::from_json(&unknown.to_json()).unwrap();
        assert!(matches!(parsed.verdict, Verdict::Unknown { .. }));
    }

    #[test]
    fn contraction_collapses_equal_child_values() {
        // Root: a three-way fair coin over (top, top, xi); the two top slots
        // carry the same value and must share one state.
        let spec = instance_default(InstanceId::ProbReach);
        let third = WeightValue::ratio(1, 3);
        let witness = NotExpansiveWitness {
            tree: ConstructionTree::Apply {
                payload: Payload::Probs(vec![third.clone(), third.clone(), third]),
                children: vec![
                    ConstructionTree::Leaf(BaseElement::Top),
                    ConstructionTree::Leaf(BaseElement::Top),
                    ConstructionTree::Leaf(BaseElement::Xi),
                ],
            },
            offending_slot: 0,
        };
        witness.validate(&spec).unwrap();
        let graph = contraction_coalgebra(&spec, &witness).unwrap();
        assert_eq!(graph.len(), 2, "equal slot values collapse into one state");
        assert!(graph.validate().is_empty());
        let t = &graph.states[1].transitions[0];
        assert_eq!(
            t.slots,
            vec![1, 1, 0],
            "both top slots point at the grafted state"
        );
        let report = cross_check(
            &graph,
            &CrossCheckConfig {
                kleene: KleeneOptions {
                    max_iters: Some(400),
                    tol: Some(1e-9),
                },
                tol: Some(1e-6),
                ..Default::default()
            },
        );
        assert!(!report.agreed());
    }

    #[test]
    fn not_a_witness_is_rejected() {
        let spec = instance_default(InstanceId::Spp);
        // A perfectly expansive application is not a witness.
        let bogus = NotExpansiveWitness {
            tree: ConstructionTree::Apply {
                payload: Payload::Weight(WeightValue::int(1)),
                children: vec![ConstructionTree::Leaf(BaseElement::Xi)],
            },
            offending_slot: 0,
        };
        assert!(matches!(
            contraction_coalgebra(&spec, &bogus),
            Err(VerifyError::NotAWitness(_))
        ));
        let leaf_root = NotExpansiveWitness {
            tree: ConstructionTree::Leaf(BaseElement::Xi),
            offending_slot: 0,
        };
        assert!(matches!(
            leaf_root.validate(&spec),
            Err(VerifyError::NotAWitness(_))
        ));
    }

    #[test]
    fn contraction_of_negative_witness_is_the_two_state_graph() {
        let spec = instance_default(InstanceId::SppNeg);
        let report = check_expansive(&spec, 3, &PayloadSource::Analytic, 1000).unwrap();
        let graph = contraction_coalgebra(&spec, report.witness().unwrap()).unwrap();
        let expected = example_graph("neg_edges").unwrap();
        assert_eq!(graph.states, expected.states);
    }

    #[test]
    fn contraction_of_probabilistic_witness_matches_counterexample() {
        let spec = instance_default(InstanceId::ProbReach);
        let report = check_expansive(&spec, 3, &PayloadSource::Analytic, 1000).unwrap();
        let graph = contraction_coalgebra(&spec, report.witness().unwrap()).unwrap();
        assert_eq!(graph.len(), 2);
        assert!(graph.states[0].target);
        assert!(!graph.states[1].target);
        let t = &graph.states[1].transitions[0];
        assert_eq!(
            t.payload,
            Payload::Probs(vec![WeightValue::ratio(1, 2), WeightValue::ratio(1, 2)])
        );
        assert_eq!(t.support(), BTreeSet::from([0, 1]));
    }

    #[test]
    fn run_tree_infimum_examples() {
        let fig2 = example_graph("fig1_fig2").unwrap();
        assert_eq!(
            run_tree_infimum(&fig2, 5, 6, 1_000_000).unwrap(),
            WeightValue::int(4)
        );

        let fig3 = example_graph("fig3").unwrap();
        for h in 0..6 {
            assert_eq!(
                run_tree_infimum(&fig3, 4, h, 1_000_000).unwrap(),
                WeightValue::PlusInf
            );
        }
        assert_eq!(
            run_tree_infimum(&fig3, 0, 0, 1_000_000).unwrap(),
            WeightValue::int(0)
        );
        assert_eq!(
            run_tree_infimum(&fig3, 1, 0, 1_000_000).unwrap(),
            WeightValue::PlusInf
        );
    }

    #[test]
    fn memoized_oracle_matches_materialized_trees() {
        for name in [
            "fig3",
            "neg_edges",
            "reach_game_sample",
            "prob_counterexample",
        ] {
            let g = example_graph(name).unwrap();
            let table = run_tree_value_table(&g, 3, 1_000_000).unwrap();
            for x in 0..g.len() {
                let trees = enumerate_run_trees(&g, x, 3, 1_000_000).unwrap();
                let values: BTreeSet<WeightValue> =
                    trees.iter().map(|t| t.sigma_value(&g)).collect();
                assert_eq!(values, table[3][x], "{name}, state {x}");
            }
        }
    }

    #[test]
    fn run_tree_budget_is_enforced() {
        let g = example_graph("fig3").unwrap();
        assert!(matches!(
            run_tree_value_table(&g, 6, 10),
            Err(VerifyError::CombinatorialBlowup(10))
        ));
    }

    #[test]
    fn cross_check_agrees_on_fig2_and_flags_neg_edges() {
        let fig2 = example_graph("fig1_fig2").unwrap();
        let report = cross_check(
            &fig2,
            &CrossCheckConfig {
                run_tree_height: Some(6),
                ..Default::default()
            },
        );
        assert!(report.agreed(), "{:?}", report.disagreements);

        let neg = example_graph("neg_edges").unwrap();
        let report = cross_check(&neg, &CrossCheckConfig::default());
        assert!(!report.agreed());
        // The two greedy solvers agree with each other and jointly disagree
        // with the iterated fixed point at state 1.
        assert!(!report
            .disagreements
            .iter()
            .any(|d| d.right == "dijkstra-heap"));
        assert!(report
            .disagreements
            .iter()
            .any(|d| d.state == 1 && d.right == "kleene"));

        let empty = WeightedGraph::new(instance_default(InstanceId::Spp), vec![]);
        assert!(cross_check(&empty, &CrossCheckConfig::default()).agreed());
    }

    #[test]
    fn discount_condition_agrees_with_expansiveness() {
        let w = WeightValue::int;
        let half = WeightValue::ratio(1, 2);
        // l0 = L = 1, r = 1/2, xi = 0: uniform condition and expansiveness hold.
        let report = discount_condition_report(&w(1), &w(1), &half, &w(0), 200).unwrap();
        assert!(report.uniform_holds && report.expansive && report.agree);
        // l0 = 1 < L = 2: the limit check fails, matching non-expansiveness.
        let report = discount_condition_report(&w(1), &w(2), &half, &w(0), 200).unwrap();
        assert!(!report.uniform_holds && !report.expansive && report.agree);
        assert!(!report.limit_holds);
        // Constant rewards but an overshooting final weight: violated at n = 0.
        let report = discount_condition_report(&w(1), &w(1), &half, &w(3), 200).unwrap();
        assert_eq!(report.first_violation, Some(0));
        assert!(report.agree);
        // r = 1 is the degenerate regime.
        let report = discount_condition_report(&w(1), &w(2), &w(1), &w(0), 200).unwrap();
        assert!(report.uniform_holds && report.expansive && report.agree);
    }
}
