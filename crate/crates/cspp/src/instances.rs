//! The instance catalog: one registered (domain, modality, payload schema,
//! expected verdict) bundle per problem family, plus builders for the bundled
//! example graphs and seeded random graph samplers.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;
use rand::Rng;
use thiserror::Error;

use crate::domain::{DomainId, WeightDomain, WeightValue};
use crate::graph::{StateData, WeightedGraph};
use crate::modality::{Modality, ModalityId, Payload, Transition};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("unknown instance id {0:?}")]
    UnknownInstance(String),
    #[error("unknown example graph {0:?}")]
    UnknownExample(String),
    #[error("parameter out of range: {0}")]
    ParamRange(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum InstanceId {
    Reach,
    Uspp,
    Ulongest,
    Spp,
    SppNeg,
    SppInterest,
    SppDiscount,
    Widest,
    Reliable,
    Bintree,
    BinReachGame,
    ReachGame,
    DynGame,
    DynGameDiscount,
    ProbReach,
}

pub const ALL_INSTANCES: [InstanceId; 15] = [
    InstanceId::Reach,
    InstanceId::Uspp,
    InstanceId::Ulongest,
    InstanceId::Spp,
    InstanceId::SppNeg,
    InstanceId::SppInterest,
    InstanceId::SppDiscount,
    InstanceId::Widest,
    InstanceId::Reliable,
    InstanceId::Bintree,
    InstanceId::BinReachGame,
    InstanceId::ReachGame,
    InstanceId::DynGame,
    InstanceId::DynGameDiscount,
    InstanceId::ProbReach,
];

impl InstanceId {
    pub fn as_str(&self) -> &'static str {
        match self {
            InstanceId::Reach => "reach",
            InstanceId::Uspp => "uspp",
            InstanceId::Ulongest => "ulongest",
            InstanceId::Spp => "spp",
            InstanceId::SppNeg => "spp-neg",
            InstanceId::SppInterest => "spp-interest",
            InstanceId::SppDiscount => "spp-discount",
            InstanceId::Widest => "widest",
            InstanceId::Reliable => "reliable",
            InstanceId::Bintree => "bintree",
            InstanceId::BinReachGame => "bin-reach-game",
            InstanceId::ReachGame => "reach-game",
            InstanceId::DynGame => "dyn-game",
            InstanceId::DynGameDiscount => "dyn-game-discount",
            InstanceId::ProbReach => "prob-reach",
        }
    }

    pub fn parse(s: &str) -> Result<InstanceId, InstanceError> {
        ALL_INSTANCES
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| InstanceError::UnknownInstance(s.to_string()))
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-family parameters. Everything else in the table is parameter-free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceParams {
    None,
    /// Tree arity `t >= 1`.
    Bintree {
        t: usize,
    },
    /// Reward bounds `0 < l0 <= l`, discount `r` in `(0, 1]`, final weight.
    Discount {
        l0: WeightValue,
        l: WeightValue,
        r: WeightValue,
        xi: WeightValue,
    },
}

impl InstanceParams {
    pub fn discount_default(l0: WeightValue, l: WeightValue, r: WeightValue) -> InstanceParams {
        InstanceParams::Discount {
            l0,
            l,
            r,
            xi: WeightValue::int(0),
        }
    }

    /// Parses `key=value` pairs as given on the command line.
    pub fn from_pairs(
        id: InstanceId,
        pairs: &BTreeMap<String, String>,
    ) -> Result<InstanceParams, InstanceError> {
        let get = |key: &str| -> Result<Option<WeightValue>, InstanceError> {
            pairs
                .get(key)
                .map(|raw| {
                    WeightValue::parse(raw, true)
                        .map_err(|e| InstanceError::ParamRange(e.to_string()))
                })
                .transpose()
        };
        match id {
            InstanceId::Bintree => {
                let t = match pairs.get("t") {
                    Some(raw) => raw
                        .parse::<usize>()
                        .map_err(|_| InstanceError::ParamRange(format!("t={raw}")))?,
                    None => 2,
                };
                Ok(InstanceParams::Bintree { t })
            }
            InstanceId::DynGameDiscount => {
                let l0 =
                    get("l0")?.ok_or_else(|| InstanceError::ParamRange("missing l0".into()))?;
                let l = get("L")?.ok_or_else(|| InstanceError::ParamRange("missing L".into()))?;
                let r = get("r")?.ok_or_else(|| InstanceError::ParamRange("missing r".into()))?;
                let xi = get("xi")?.unwrap_or_else(|| WeightValue::int(0));
                Ok(InstanceParams::Discount { l0, l, r, xi })
            }
            _ => Ok(InstanceParams::None),
        }
    }
}

/// The "Dijkstra applies?" column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DijkstraApplies {
    Yes,
    No,
    /// Depends on the parameters; see [`InstanceSpec::analytic_dijkstra_applies`].
    Conditional,
}

/// A fully wired problem family, usable by every solver and verifier.
#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub id: InstanceId,
    pub params: InstanceParams,
    pub domain: WeightDomain,
    pub modality: Modality,
    pub expected_dijkstra: DijkstraApplies,
}

impl PartialEq for InstanceSpec {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.params == other.params
    }
}

pub fn instance(id: InstanceId, params: InstanceParams) -> Result<InstanceSpec, InstanceError> {
    use DijkstraApplies::*;
    let (domain, modality, expected) = match (id, &params) {
        (InstanceId::Reach, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::ZeroInf),
            Modality::new(ModalityId::Identity),
            Yes,
        ),
        (InstanceId::Uspp, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::NaturalsAsc),
            Modality::new(ModalityId::Successor),
            Yes,
        ),
        (InstanceId::Ulongest, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::NaturalsDesc),
            Modality::new(ModalityId::Successor),
            No,
        ),
        (InstanceId::Spp, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::NonnegRealsAsc),
            Modality::new(ModalityId::Add),
            Yes,
        ),
        (InstanceId::SppNeg, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::SignedReals),
            Modality::new(ModalityId::Add),
            No,
        ),
        (InstanceId::SppInterest, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::NonnegRealsAsc),
            Modality::new(ModalityId::Rate),
            Yes,
        ),
        (InstanceId::SppDiscount, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::NonnegRealsAsc),
            Modality::new(ModalityId::Rate),
            No,
        ),
        (InstanceId::Widest, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::NonnegRealsDesc),
            Modality::new(ModalityId::Cap),
            Yes,
        ),
        (InstanceId::Reliable, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::UnitIntervalDesc),
            Modality::new(ModalityId::Mult),
            Yes,
        ),
        (InstanceId::Bintree, InstanceParams::Bintree { t }) => {
            if *t < 1 {
                return Err(InstanceError::ParamRange(
                    "bintree arity t must be >= 1".into(),
                ));
            }
            (
                WeightDomain::builtin(DomainId::NonnegRealsAsc),
                Modality::tree_add(*t),
                Yes,
            )
        }
        (InstanceId::BinReachGame, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::ZeroInf),
            Modality::new(ModalityId::PairJoin),
            Yes,
        ),
        (InstanceId::ReachGame, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::ZeroInf),
            Modality::new(ModalityId::SetJoin),
            Yes,
        ),
        (InstanceId::DynGame, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::NonnegRealsAsc),
            Modality::new(ModalityId::GameMax),
            Yes,
        ),
        (InstanceId::DynGameDiscount, InstanceParams::Discount { l0, l, r, xi }) => {
            let zero = WeightValue::int(0);
            let one = WeightValue::int(1);
            if !(l0.is_finite()
                && l.is_finite()
                && zero.numeric_cmp(l0).is_lt()
                && l0.numeric_cmp(l).is_le())
            {
                return Err(InstanceError::ParamRange(
                    "need 0 < l0 <= L, both finite".into(),
                ));
            }
            if !(r.is_finite() && zero.numeric_cmp(r).is_lt() && r.numeric_cmp(&one).is_le()) {
                return Err(InstanceError::ParamRange("need r in (0, 1]".into()));
            }
            let domain = WeightDomain::with_final_weight(DomainId::NonnegRealsAsc, xi.clone())
                .map_err(|e| InstanceError::ParamRange(e.to_string()))?;
            (domain, Modality::discounted_game(r.clone()), Conditional)
        }
        (InstanceId::ProbReach, InstanceParams::None) => (
            WeightDomain::builtin(DomainId::UnitIntervalDesc),
            Modality::new(ModalityId::Expectation),
            No,
        ),
        (id, params) => {
            return Err(InstanceError::ParamRange(format!(
                "{id} does not accept parameters {params:?}"
            )));
        }
    };
    Ok(InstanceSpec {
        id,
        params,
        domain,
        modality,
        expected_dijkstra: expected,
    })
}

pub fn instance_default(id: InstanceId) -> InstanceSpec {
    let params = match id {
        InstanceId::Bintree => InstanceParams::Bintree { t: 2 },
        InstanceId::DynGameDiscount => InstanceParams::discount_default(
            WeightValue::int(1),
            WeightValue::int(2),
            WeightValue::ratio(1, 2),
        ),
        _ => InstanceParams::None,
    };
    instance(id, params).expect("default parameters are valid")
}

impl InstanceSpec {
    /// The closed-form verdict, resolving the conditional discounted-game
    /// row: correct iff `r = 1`, or the rewards are constant (`l0 = L`) and
    /// the final weight satisfies `xi <= L + r*xi`.
    pub fn analytic_dijkstra_applies(&self) -> bool {
        match self.expected_dijkstra {
            DijkstraApplies::Yes => true,
            DijkstraApplies::No => false,
            DijkstraApplies::Conditional => {
                let InstanceParams::Discount { l0, l, r, xi } = &self.params else {
                    unreachable!("conditional verdicts only arise for the discounted game");
                };
                if r == &WeightValue::int(1) {
                    return true;
                }
                l0 == l && xi.numeric_cmp(&l.add(&r.mul_absorbing_inf(xi))).is_le()
            }
        }
    }

    /// Value-range diagnostics for one payload, beyond the shape checks the
    /// modality performs. Returns human-readable findings.
    pub fn payload_diagnostics(&self, payload: &Payload) -> Vec<String> {
        let mut out = Vec::new();
        let zero = WeightValue::int(0);
        let one = WeightValue::int(1);
        let nonneg = |out: &mut Vec<String>, v: &WeightValue, what: &str| {
            if v.approx_cmp(&zero).is_lt() {
                out.push(format!("{what} {v} must be nonnegative"));
            }
        };
        match (self.id, payload) {
            (InstanceId::Spp, Payload::Weight(w)) => nonneg(&mut out, w, "weight"),
            (InstanceId::Bintree, Payload::Weight(w)) => nonneg(&mut out, w, "weight"),
            (InstanceId::SppNeg, Payload::Weight(_)) => {}
            (InstanceId::SppInterest, Payload::WeightRate { weight, rate }) => {
                nonneg(&mut out, weight, "weight");
                if rate.approx_cmp(&one).is_lt() {
                    out.push(format!("interest rate {rate} must be >= 1"));
                }
            }
            (InstanceId::SppDiscount, Payload::WeightRate { weight, rate }) => {
                nonneg(&mut out, weight, "weight");
                if rate.approx_cmp(&zero).is_lt() || rate.approx_cmp(&one).is_gt() {
                    out.push(format!("discount rate {rate} must lie in [0, 1]"));
                }
            }
            (InstanceId::Widest, Payload::Capacity(c)) => nonneg(&mut out, c, "capacity"),
            (InstanceId::Reliable, Payload::Prob(p)) => {
                if p.approx_cmp(&zero).is_lt() || p.approx_cmp(&one).is_gt() {
                    out.push(format!("probability {p} must lie in [0, 1]"));
                }
            }
            (InstanceId::DynGame, Payload::Weights(ws)) => {
                for w in ws {
                    nonneg(&mut out, w, "reward");
                }
            }
            (InstanceId::DynGameDiscount, Payload::Weights(ws)) => {
                let InstanceParams::Discount { l0, l, .. } = &self.params else {
                    unreachable!()
                };
                for w in ws {
                    if w.approx_cmp(l0).is_lt() || w.approx_cmp(l).is_gt() {
                        out.push(format!("reward {w} must lie in [{l0}, {l}]"));
                    }
                }
            }
            (InstanceId::ProbReach, Payload::Probs(ps)) => {
                let mut sum: Option<WeightValue> = None;
                for p in ps {
                    if p.approx_cmp(&zero).is_le() {
                        out.push(format!("probability {p} must be positive"));
                    }
                    sum = Some(match sum {
                        None => p.clone(),
                        Some(acc) => acc.add(p),
                    });
                }
                let sum = sum.unwrap_or(zero);
                let sum_ok = if sum.is_exact() {
                    matches!(&sum, WeightValue::Rational(r) if r.is_one())
                } else {
                    sum.within(&WeightValue::float(1.0), &WeightValue::float(1e-9))
                };
                if !sum_ok {
                    out.push(format!("ProbSum: probabilities sum to {sum}, expected 1"));
                }
            }
            _ => {}
        }
        out
    }

    /// True when the underlying functor uses the non-empty power set, so the
    /// empty slot list is a structural violation.
    pub fn requires_nonempty_support(&self) -> bool {
        matches!(
            self.id,
            InstanceId::ReachGame | InstanceId::DynGame | InstanceId::DynGameDiscount
        )
    }
}

// --- parameter (de)serialization used by the graph file header ---

pub fn params_to_json(params: &InstanceParams) -> serde_json::Value {
    match params {
        InstanceParams::None => serde_json::json!({}),
        InstanceParams::Bintree { t } => serde_json::json!({ "t": t }),
        InstanceParams::Discount { l0, l, r, xi } => serde_json::json!({
            "l0": l0.render(),
            "L": l.render(),
            "r": r.render(),
            "xi": xi.render(),
        }),
    }
}

pub fn params_from_json(
    id: InstanceId,
    value: Option<&serde_json::Value>,
) -> Result<InstanceParams, InstanceError> {
    let mut pairs = BTreeMap::new();
    if let Some(serde_json::Value::Object(map)) = value {
        for (k, v) in map {
            let raw = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                other => {
                    return Err(InstanceError::ParamRange(format!(
                        "bad parameter {k}: {other}"
                    )))
                }
            };
            pairs.insert(k.clone(), raw);
        }
    }
    InstanceParams::from_pairs(id, &pairs)
}

// --- bundled example graphs ---

pub const EXAMPLE_NAMES: [&str; 15] = [
    "fig1_fig2",
    "reach_fig2_unweighted",
    "fig3",
    "neg_edges",
    "prob_counterexample",
    "uspp_sample",
    "ulongest_sample",
    "spp_interest_sample",
    "spp_discount_sample",
    "widest_sample",
    "reliable_sample",
    "bin_reach_game_sample",
    "reach_game_sample",
    "dyn_game_sample",
    "dyn_game_discount_sample",
];

/// Builds a bundled example graph by name.
pub fn example_graph(name: &str) -> Result<WeightedGraph, InstanceError> {
    let w = WeightValue::int;
    let weight = |n: i64, slots: Vec<usize>| Transition::new(Payload::Weight(w(n)), slots);
    let step = |slot: usize| Transition::new(Payload::Empty, vec![slot]);
    let state = |target: bool, transitions: Vec<Transition>| StateData {
        target,
        transitions,
    };

    let graph = match name {
        // The six-state weighted graph solved step by step in the text.
        "fig1_fig2" => WeightedGraph::new(
            instance_default(InstanceId::Spp),
            vec![
                state(true, vec![]),
                state(false, vec![weight(1, vec![0]), weight(1, vec![3])]),
                state(
                    false,
                    vec![weight(6, vec![0]), weight(2, vec![3]), weight(1, vec![4])],
                ),
                state(false, vec![weight(2, vec![1])]),
                state(false, vec![weight(1, vec![2])]),
                state(false, vec![weight(1, vec![3]), weight(3, vec![4])]),
            ],
        ),
        // Its unweighted companion, as a reachability instance.
        "reach_fig2_unweighted" => WeightedGraph::new(
            instance_default(InstanceId::Reach),
            vec![
                state(true, vec![]),
                state(false, vec![step(0), step(3)]),
                state(false, vec![step(4)]),
                state(false, vec![step(1)]),
                state(false, vec![step(2)]),
            ],
        ),
        // The five-state binary-tree graph.
        "fig3" => WeightedGraph::new(
            instance_default(InstanceId::Bintree),
            vec![
                state(true, vec![]),
                state(false, vec![weight(1, vec![2, 0])]),
                state(false, vec![weight(3, vec![0, 0])]),
                state(false, vec![weight(2, vec![4, 2]), weight(2, vec![2, 1])]),
                state(false, vec![weight(1, vec![2, 4])]),
            ],
        ),
        // Two states, a unit edge to the target and a -1 self-loop.
        "neg_edges" => WeightedGraph::new(
            instance_default(InstanceId::SppNeg),
            vec![
                state(true, vec![]),
                state(false, vec![weight(1, vec![0]), weight(-1, vec![1])]),
            ],
        ),
        // Two states, a fair coin between staying and reaching the target.
        "prob_counterexample" => WeightedGraph::new(
            instance_default(InstanceId::ProbReach),
            vec![
                state(true, vec![]),
                state(
                    false,
                    vec![Transition::new(
                        Payload::Probs(vec![WeightValue::ratio(1, 2), WeightValue::ratio(1, 2)]),
                        vec![0, 1],
                    )],
                ),
            ],
        ),
        "uspp_sample" => WeightedGraph::new(
            instance_default(InstanceId::Uspp),
            vec![
                state(true, vec![]),
                state(false, vec![step(0), step(3)]),
                state(false, vec![step(4)]),
                state(false, vec![step(1)]),
                state(false, vec![step(2)]),
            ],
        ),
        "ulongest_sample" => WeightedGraph::new(
            instance_default(InstanceId::Ulongest),
            vec![
                state(true, vec![]),
                state(false, vec![step(0)]),
                state(false, vec![step(0), step(1)]),
                state(false, vec![step(1), step(2)]),
            ],
        ),
        "spp_interest_sample" => WeightedGraph::new(
            instance_default(InstanceId::SppInterest),
            vec![
                state(true, vec![]),
                state(false, vec![rate_edge(1, (2, 1), 0)]),
                state(
                    false,
                    vec![rate_edge(1, (2, 1), 1), rate_edge(4, (1, 1), 0)],
                ),
            ],
        ),
        "spp_discount_sample" => WeightedGraph::new(
            instance_default(InstanceId::SppDiscount),
            vec![
                state(true, vec![]),
                state(false, vec![rate_edge(5, (1, 2), 0)]),
                state(false, vec![rate_edge(2, (1, 2), 1)]),
            ],
        ),
        "widest_sample" => WeightedGraph::new(
            instance_default(InstanceId::Widest),
            vec![
                state(true, vec![]),
                state(
                    false,
                    vec![Transition::new(Payload::Capacity(w(3)), vec![0])],
                ),
                state(
                    false,
                    vec![
                        Transition::new(Payload::Capacity(w(1)), vec![0]),
                        Transition::new(Payload::Capacity(w(2)), vec![1]),
                    ],
                ),
            ],
        ),
        "reliable_sample" => WeightedGraph::new(
            instance_default(InstanceId::Reliable),
            vec![
                state(true, vec![]),
                state(
                    false,
                    vec![Transition::new(
                        Payload::Prob(WeightValue::ratio(1, 2)),
                        vec![0],
                    )],
                ),
                state(
                    false,
                    vec![
                        Transition::new(Payload::Prob(WeightValue::ratio(1, 2)), vec![1]),
                        Transition::new(Payload::Prob(WeightValue::ratio(1, 3)), vec![0]),
                    ],
                ),
            ],
        ),
        "bin_reach_game_sample" => WeightedGraph::new(
            instance_default(InstanceId::BinReachGame),
            vec![
                state(true, vec![]),
                state(false, vec![Transition::new(Payload::Empty, vec![0, 0])]),
                state(false, vec![Transition::new(Payload::Empty, vec![1, 3])]),
                state(false, vec![Transition::new(Payload::Empty, vec![3, 3])]),
            ],
        ),
        "reach_game_sample" => WeightedGraph::new(
            instance_default(InstanceId::ReachGame),
            vec![
                state(true, vec![]),
                state(false, vec![Transition::new(Payload::Empty, vec![0])]),
                state(
                    false,
                    vec![
                        Transition::new(Payload::Empty, vec![1, 3]),
                        Transition::new(Payload::Empty, vec![1]),
                    ],
                ),
                state(false, vec![Transition::new(Payload::Empty, vec![3])]),
            ],
        ),
        "dyn_game_sample" => WeightedGraph::new(
            instance_default(InstanceId::DynGame),
            vec![
                state(true, vec![]),
                state(
                    false,
                    vec![Transition::new(Payload::Weights(vec![w(1)]), vec![0])],
                ),
                state(
                    false,
                    vec![
                        Transition::new(Payload::Weights(vec![w(1), w(2)]), vec![1, 0]),
                        Transition::new(Payload::Weights(vec![w(5)]), vec![0]),
                    ],
                ),
            ],
        ),
        "dyn_game_discount_sample" => WeightedGraph::new(
            instance_default(InstanceId::DynGameDiscount),
            vec![
                state(true, vec![]),
                state(
                    false,
                    vec![Transition::new(
                        Payload::Weights(vec![w(1), w(2)]),
                        vec![0, 0],
                    )],
                ),
                state(
                    false,
                    vec![Transition::new(Payload::Weights(vec![w(1)]), vec![1])],
                ),
            ],
        ),
        other => return Err(InstanceError::UnknownExample(other.to_string())),
    };
    Ok(graph)
}

fn rate_edge(weight: i64, rate: (i64, i64), slot: usize) -> Transition {
    Transition::new(
        Payload::WeightRate {
            weight: WeightValue::int(weight),
            rate: WeightValue::ratio(rate.0, rate.1),
        },
        vec![slot],
    )
}

/// The bundled sample graph used by graph-sourced verification for each
/// instance.
pub fn default_sample_graph(id: InstanceId) -> WeightedGraph {
    let name = match id {
        InstanceId::Reach => "reach_fig2_unweighted",
        InstanceId::Uspp => "uspp_sample",
        InstanceId::Ulongest => "ulongest_sample",
        InstanceId::Spp => "fig1_fig2",
        InstanceId::SppNeg => "neg_edges",
        InstanceId::SppInterest => "spp_interest_sample",
        InstanceId::SppDiscount => "spp_discount_sample",
        InstanceId::Widest => "widest_sample",
        InstanceId::Reliable => "reliable_sample",
        InstanceId::Bintree => "fig3",
        InstanceId::BinReachGame => "bin_reach_game_sample",
        InstanceId::ReachGame => "reach_game_sample",
        InstanceId::DynGame => "dyn_game_sample",
        InstanceId::DynGameDiscount => "dyn_game_discount_sample",
        InstanceId::ProbReach => "prob_counterexample",
    };
    example_graph(name).expect("bundled example exists")
}

// --- seeded random sampling ---

/// Shape parameters for random graphs.
#[derive(Debug, Clone)]
pub struct SampleConfig {
    pub states: usize,
    pub max_transitions: usize,
    pub max_arity: usize,
    pub target_prob: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            states: 8,
            max_transitions: 3,
            max_arity: 3,
            target_prob: 0.3,
        }
    }
}

/// Draws one payload from the instance's declared payload distribution,
/// together with its slot arity. All scalars are small exact rationals.
pub fn sample_payload<R: Rng>(
    spec: &InstanceSpec,
    max_arity: usize,
    rng: &mut R,
) -> (Payload, usize) {
    let small = |rng: &mut R, lo: i64, hi: i64| -> WeightValue {
        let num = rng.random_range(lo..=hi);
        if rng.random_bool(0.25) {
            WeightValue::ratio(num, 2)
        } else {
            WeightValue::int(num)
        }
    };
    match spec.id {
        InstanceId::Reach | InstanceId::Uspp | InstanceId::Ulongest => (Payload::Empty, 1),
        InstanceId::Spp => (Payload::Weight(small(rng, 0, 8)), 1),
        InstanceId::SppNeg => (Payload::Weight(small(rng, -6, 6)), 1),
        InstanceId::SppInterest => {
            let rate = WeightValue::ratio(rng.random_range(2..=4), 2);
            (
                Payload::WeightRate {
                    weight: small(rng, 0, 6),
                    rate,
                },
                1,
            )
        }
        InstanceId::SppDiscount => {
            let rate = WeightValue::ratio(rng.random_range(0..=2), 2);
            (
                Payload::WeightRate {
                    weight: small(rng, 0, 6),
                    rate,
                },
                1,
            )
        }
        InstanceId::Widest => (Payload::Capacity(small(rng, 0, 8)), 1),
        InstanceId::Reliable => (
            Payload::Prob(WeightValue::ratio(rng.random_range(0..=4), 4)),
            1,
        ),
        InstanceId::Bintree => {
            let Modality {
                arity: crate::modality::ArityPolicy::Fixed(t),
                ..
            } = spec.modality
            else {
                unreachable!()
            };
            (Payload::Weight(small(rng, 0, 6)), t)
        }
        InstanceId::BinReachGame => (Payload::Empty, 2),
        InstanceId::ReachGame => (Payload::Empty, rng.random_range(1..=max_arity.max(1))),
        InstanceId::DynGame => {
            let k = rng.random_range(1..=max_arity.max(1));
            (
                Payload::Weights((0..k).map(|_| small(rng, 0, 6)).collect()),
                k,
            )
        }
        InstanceId::DynGameDiscount => {
            let InstanceParams::Discount { l0, l, .. } = &spec.params else {
                unreachable!()
            };
            let k = rng.random_range(1..=max_arity.max(1));
            let span = l.add(&l0.mul_absorbing_inf(&WeightValue::int(-1)));
            let weights = (0..k)
                .map(|_| {
                    let frac = WeightValue::ratio(rng.random_range(0..=2), 2);
                    l0.add(&frac.mul_finite(&span))
                })
                .collect();
            (Payload::Weights(weights), k)
        }
        InstanceId::ProbReach => {
            let k = rng.random_range(1..=max_arity.max(1));
            let parts: Vec<i64> = (0..k).map(|_| rng.random_range(1..=4)).collect();
            let total: i64 = parts.iter().sum();
            (
                Payload::Probs(
                    parts
                        .into_iter()
                        .map(|p| WeightValue::ratio(p, total))
                        .collect(),
                ),
                k,
            )
        }
    }
}

/// Generates a random well-formed graph of the given instance.
pub fn sample_graph<R: Rng>(spec: &InstanceSpec, cfg: &SampleConfig, rng: &mut R) -> WeightedGraph {
    let mut states = Vec::with_capacity(cfg.states);
    for _ in 0..cfg.states {
        let target = rng.random_bool(cfg.target_prob);
        let n_transitions = rng.random_range(0..=cfg.max_transitions);
        let mut transitions = Vec::with_capacity(n_transitions);
        for _ in 0..n_transitions {
            let (payload, arity) = sample_payload(spec, cfg.max_arity, rng);
            let slots = (0..arity)
                .map(|_| rng.random_range(0..cfg.states))
                .collect();
            transitions.push(Transition::new(payload, slots));
        }
        states.push(StateData {
            target,
            transitions,
        });
    }
    WeightedGraph::new(spec.clone(), states)
}
