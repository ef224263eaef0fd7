//! Solvers for the greatest fixed point of the Bellman operator: plain Kleene
//! iteration from the top valuation, and the coalgebraic Dijkstra algorithm
//! in its basic and heap-accelerated forms.

pub mod queue;

use std::collections::{BTreeMap, BTreeSet};

use crate::domain::{WeightDomain, WeightValue};
use crate::graph::{predecessors, ReverseIndex, WeightedGraph};
use crate::modality::{check_expansive_on, ExpansiveCheck, ExpansivenessWitness};
use crate::solve::queue::{new_queue, QueueKind};
use crate::StateId;

/// A map from states to weights, dense by state id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation(pub Vec<WeightValue>);

impl Valuation {
    pub fn top(graph: &WeightedGraph) -> Valuation {
        Valuation(vec![graph.instance.domain.top.clone(); graph.len()])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, x: StateId) -> &WeightValue {
        &self.0[x]
    }

    /// Pointwise equality, exact or within an absolute tolerance.
    pub fn agrees_with(&self, other: &Valuation, tol: Option<&WeightValue>) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| match tol {
                None => a == b,
                Some(t) => a.within(b, t),
            })
    }

    pub fn render(&self) -> Vec<String> {
        self.0.iter().map(WeightValue::render).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    /// Kleene iteration reached a fixed point after the reported number of
    /// Bellman applications.
    Stabilized(usize),
    /// Kleene iteration hit the iteration cap without stabilizing.
    IterationCapped,
    /// A Dijkstra solver froze every state.
    Frozen,
}

/// Outcome of one solver invocation.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub valuation: Valuation,
    pub status: SolveStatus,
    /// Main-loop iterations (Dijkstra) or Bellman applications (Kleene).
    pub iterations: usize,
    /// States whose value strictly descended in each of the last `V`
    /// iterations of a capped Kleene run; the divergence heuristic.
    pub divergent: Vec<StateId>,
    /// Expansiveness violations observed by the run-time monitor.
    pub witnesses: Option<Vec<MonitorWitness>>,
}

/// An expansiveness violation seen while solving: either some slot value was
/// not below the `σ` result, or the result dropped below the final weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonitorWitness {
    pub state: StateId,
    pub transition: usize,
    pub check: ExpansivenessWitness,
    /// True when the violation is `σ(t) ⊏ ξ` rather than a slot violation.
    pub below_final_weight: bool,
}

/// The per-iteration history of a Dijkstra run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub n: usize,
    pub valuation: Valuation,
    pub frozen: BTreeSet<StateId>,
    pub newly_frozen: BTreeSet<StateId>,
    pub active: BTreeSet<StateId>,
}

fn render_set(set: &BTreeSet<StateId>) -> String {
    let items: Vec<String> = set.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", items.join(","))
}

impl Trace {
    /// Tab-separated table, one row per iteration: n, d(x) per state, S, Y.
    pub fn render(&self) -> String {
        let states = self.rows.first().map(|r| r.valuation.len()).unwrap_or(0);
        let mut out = String::from("n");
        for x in 0..states {
            out.push_str(&format!("\td({x})"));
        }
        out.push_str("\tS\tY\n");
        for row in &self.rows {
            out.push_str(&row.n.to_string());
            for v in &row.valuation.0 {
                out.push('\t');
                out.push_str(&v.render());
            }
            out.push('\t');
            out.push_str(&render_set(&row.frozen));
            out.push('\t');
            out.push_str(&render_set(&row.newly_frozen));
            out.push('\n');
        }
        out
    }
}

/// The Bellman operator value at one state: the meet over transitions of the
/// modality applied to the slot values, with the final weight folded in at
/// targets.
fn bellman_at(
    graph: &WeightedGraph,
    d: &Valuation,
    x: StateId,
    slot_buf: &mut Vec<WeightValue>,
) -> WeightValue {
    let dom = &graph.instance.domain;
    let modality = &graph.instance.modality;
    let state = &graph.states[x];
    let mut acc: Option<WeightValue> = None;
    for t in &state.transitions {
        slot_buf.clear();
        slot_buf.extend(t.slots.iter().map(|&y| d.0[y].clone()));
        let v = modality.apply_raw(dom, &t.payload, slot_buf);
        acc = Some(match acc {
            None => v,
            Some(cur) => dom.meet2(&cur, &v),
        });
    }
    let base = acc.unwrap_or_else(|| dom.top.clone());
    if state.target {
        dom.meet2(&dom.xi, &base)
    } else {
        base
    }
}

/// One full Bellman update; the input valuation is unchanged.
pub fn bellman_apply(graph: &WeightedGraph, d: &Valuation) -> Valuation {
    let mut buf = Vec::new();
    Valuation(
        (0..graph.len())
            .map(|x| bellman_at(graph, d, x, &mut buf))
            .collect(),
    )
}

/// Bellman update restricted to the active states; everywhere else the input
/// value is kept.
pub fn selective_bellman(
    graph: &WeightedGraph,
    d: &Valuation,
    active: &BTreeSet<StateId>,
) -> Valuation {
    let mut buf = Vec::new();
    let mut out = d.clone();
    for &x in active {
        out.0[x] = bellman_at(graph, d, x, &mut buf);
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct KleeneOptions {
    /// Defaults to `10 V + 100`.
    pub max_iters: Option<usize>,
    /// Stabilization tolerance; `None` means exact pointwise equality.
    pub tol: Option<f64>,
}

fn tol_value(graph: &WeightedGraph, tol: f64) -> WeightValue {
    match graph.mode {
        crate::graph::NumericMode::Exact => WeightValue::Rational(
            num_rational::BigRational::from_float(tol).expect("finite tolerance"),
        ),
        crate::graph::NumericMode::Float => WeightValue::float(tol),
    }
}

/// Kleene iteration of the Bellman operator from the top valuation. The
/// returned iterate is always above the greatest fixed point; divergence
/// (negative cycles, unbounded growth) is reported rather than looped on.
pub fn kleene_gfp(graph: &WeightedGraph, opts: &KleeneOptions) -> SolveResult {
    let v = graph.len();
    let max_iters = opts.max_iters.unwrap_or(10 * v + 100).max(1);
    let tol = opts.tol.map(|t| tol_value(graph, t));
    let dom = &graph.instance.domain;

    let mut d = Valuation::top(graph);
    let mut descent_streak = vec![0usize; v];
    for n in 1..=max_iters {
        let next = bellman_apply(graph, &d);
        for x in 0..v {
            if dom.lt(&next.0[x], &d.0[x]) {
                descent_streak[x] += 1;
            } else {
                descent_streak[x] = 0;
            }
        }
        let stabilized = next.agrees_with(&d, tol.as_ref());
        d = next;
        if stabilized {
            return SolveResult {
                valuation: d,
                status: SolveStatus::Stabilized(n),
                iterations: n,
                divergent: vec![],
                witnesses: None,
            };
        }
    }
    let divergent = (0..v)
        .filter(|&x| v > 0 && descent_streak[x] >= v)
        .collect();
    SolveResult {
        valuation: d,
        status: SolveStatus::IterationCapped,
        iterations: max_iters,
        divergent,
        witnesses: None,
    }
}

#[derive(Debug, Clone, Default)]
pub struct DijkstraOptions {
    pub want_trace: bool,
    /// Pass every `σ` application through the expansiveness check and sweep
    /// the final valuation once more.
    pub monitor: bool,
    /// Optional tie grouping for float graphs; minimal freezing uses exact
    /// equality by default.
    pub tie_epsilon: Option<f64>,
}

struct Monitor {
    witnesses: Vec<MonitorWitness>,
}

impl Monitor {
    fn observe(
        &mut self,
        graph: &WeightedGraph,
        x: StateId,
        j: usize,
        slot_values: &[WeightValue],
        sigma: &WeightValue,
    ) {
        let dom = &graph.instance.domain;
        let payload = &graph.states[x].transitions[j].payload;
        match check_expansive_on(&graph.instance.modality, dom, payload, slot_values) {
            Ok(ExpansiveCheck::Ok) => {}
            Ok(ExpansiveCheck::Witness(w)) => {
                self.witnesses.push(MonitorWitness {
                    state: x,
                    transition: j,
                    check: w,
                    below_final_weight: false,
                });
            }
            Err(_) => {}
        }
        if dom.lt(sigma, &dom.xi) {
            self.witnesses.push(MonitorWitness {
                state: x,
                transition: j,
                check: ExpansivenessWitness {
                    payload: payload.clone(),
                    slot_values: slot_values.to_vec(),
                    offending_slot: 0,
                    slot_value: dom.xi.clone(),
                    sigma_value: sigma.clone(),
                },
                below_final_weight: true,
            });
        }
    }

    /// Re-evaluates every transition against the final valuation; violations
    /// that only show up after freezing are caught here.
    fn final_sweep(&mut self, graph: &WeightedGraph, d: &Valuation) {
        let dom = &graph.instance.domain;
        let modality = &graph.instance.modality;
        let mut buf = Vec::new();
        for (x, state) in graph.states.iter().enumerate() {
            for (j, t) in state.transitions.iter().enumerate() {
                buf.clear();
                buf.extend(t.slots.iter().map(|&y| d.0[y].clone()));
                let sigma = modality.apply_raw(dom, &t.payload, &buf);
                self.observe(graph, x, j, &buf, &sigma);
            }
        }
        self.witnesses.dedup();
    }
}

/// Collects the `⊑`-minimal unfrozen states, as one tie group.
fn minimal_group(
    dom: &WeightDomain,
    d: &Valuation,
    frozen: &[bool],
    tie_epsilon: Option<&WeightValue>,
) -> BTreeSet<StateId> {
    let mut best: Option<&WeightValue> = None;
    for (x, value) in d.0.iter().enumerate() {
        if frozen[x] {
            continue;
        }
        best = Some(match best {
            None => value,
            Some(b) => {
                if dom.lt(value, b) {
                    value
                } else {
                    b
                }
            }
        });
    }
    let Some(best) = best else {
        return BTreeSet::new();
    };
    d.0.iter()
        .enumerate()
        .filter(|&(x, value)| {
            !frozen[x]
                && match tie_epsilon {
                    None => value == best,
                    Some(eps) => value.within(best, eps),
                }
        })
        .map(|(x, _)| x)
        .collect()
}

/// The coalgebraic Dijkstra algorithm: selective Bellman updates on the
/// predecessors of the last frozen group, then minimal freezing of the whole
/// `⊑`-minimal tie group, until every state is frozen.
pub fn coalg_dijkstra(
    graph: &WeightedGraph,
    opts: &DijkstraOptions,
) -> (SolveResult, Option<Trace>) {
    let v = graph.len();
    let dom = graph.instance.domain.clone();
    let index = ReverseIndex::build(graph);
    let tie_eps = opts.tie_epsilon.map(|e| tol_value(graph, e));
    let mut monitor = opts.monitor.then(|| Monitor {
        witnesses: Vec::new(),
    });

    let mut trace = opts.want_trace.then(|| Trace { rows: Vec::new() });
    let push_row = |trace: &mut Option<Trace>,
                    d: &Valuation,
                    frozen_set: &BTreeSet<StateId>,
                    newly: &BTreeSet<StateId>,
                    active: &BTreeSet<StateId>| {
        if let Some(t) = trace {
            let n = t.rows.len();
            t.rows.push(TraceRow {
                n,
                valuation: d.clone(),
                frozen: frozen_set.clone(),
                newly_frozen: newly.clone(),
                active: active.clone(),
            });
        }
    };

    let top = Valuation::top(graph);
    push_row(
        &mut trace,
        &top,
        &BTreeSet::new(),
        &BTreeSet::new(),
        &BTreeSet::new(),
    );

    let targets = graph.target_states();
    let mut frozen = vec![false; v];
    for &x in &targets {
        frozen[x] = true;
    }
    let mut frozen_set = targets.clone();
    let mut newly = targets.clone();
    let mut d = top;
    for &x in &targets {
        d.0[x] = dom.xi.clone();
    }
    push_row(&mut trace, &d, &frozen_set, &newly, &BTreeSet::new());

    let mut buf = Vec::new();
    let mut iterations = 0;
    while frozen_set.len() < v {
        let preds = predecessors(graph, &index, &newly).expect("states in range");
        let active: BTreeSet<StateId> = preds.into_iter().filter(|&x| !frozen[x]).collect();
        // Simultaneous selective update from the round-start valuation.
        let mut updates: Vec<(StateId, WeightValue)> = Vec::with_capacity(active.len());
        for &x in &active {
            if let Some(mon) = monitor.as_mut() {
                for (j, t) in graph.states[x].transitions.iter().enumerate() {
                    buf.clear();
                    buf.extend(t.slots.iter().map(|&y| d.0[y].clone()));
                    let sigma = graph.instance.modality.apply_raw(&dom, &t.payload, &buf);
                    mon.observe(graph, x, j, &buf, &sigma);
                }
            }
            updates.push((x, bellman_at(graph, &d, x, &mut buf)));
        }
        for (x, value) in updates {
            d.0[x] = value;
        }
        newly = minimal_group(&dom, &d, &frozen, tie_eps.as_ref());
        for &x in &newly {
            frozen[x] = true;
        }
        frozen_set.extend(newly.iter().copied());
        iterations += 1;
        push_row(&mut trace, &d, &frozen_set, &newly, &active);
    }

    let witnesses = monitor.map(|mut m| {
        m.final_sweep(graph, &d);
        m.witnesses
    });
    let result = SolveResult {
        valuation: d,
        status: SolveStatus::Frozen,
        iterations,
        divergent: vec![],
        witnesses,
    };
    (result, trace)
}

/// Heap-accelerated coalgebraic Dijkstra. Per iteration only the transitions
/// whose support meets the newly frozen group are re-evaluated, combined by
/// meet with the previous value; frozen groups come off the priority queue
/// via pop-all-minimal.
pub fn coalg_dijkstra_heap(graph: &WeightedGraph, kind: QueueKind) -> SolveResult {
    let v = graph.len();
    let dom = graph.instance.domain.clone();
    let index = ReverseIndex::build(graph);

    let targets = graph.target_states();
    let mut frozen = vec![false; v];
    let mut d = Valuation::top(graph);
    for &x in &targets {
        frozen[x] = true;
        d.0[x] = dom.xi.clone();
    }
    let mut queue = new_queue(kind, v, dom.direction);
    for x in 0..v {
        if !frozen[x] {
            queue.insert(x, dom.top.clone());
        }
    }

    let mut newly: Vec<StateId> = targets.iter().copied().collect();
    let mut frozen_count = targets.len();
    let mut buf = Vec::new();
    let mut iterations = 0;
    while frozen_count < v {
        // Transitions touching the newly frozen group, per unfrozen owner.
        let mut touched: BTreeMap<StateId, Vec<usize>> = BTreeMap::new();
        for &y in &newly {
            for &(x, j) in index.incoming(y) {
                if !frozen[x] {
                    touched.entry(x).or_default().push(j);
                }
            }
        }
        let mut updates: Vec<(StateId, WeightValue)> = Vec::with_capacity(touched.len());
        for (&x, transition_ids) in touched.iter_mut() {
            transition_ids.sort_unstable();
            transition_ids.dedup();
            let mut acc = d.0[x].clone();
            for &j in transition_ids.iter() {
                let t = &graph.states[x].transitions[j];
                buf.clear();
                buf.extend(t.slots.iter().map(|&y| d.0[y].clone()));
                let sigma = graph.instance.modality.apply_raw(&dom, &t.payload, &buf);
                acc = dom.meet2(&acc, &sigma);
            }
            updates.push((x, acc));
        }
        for (x, value) in updates {
            if dom.lt(&value, &d.0[x]) {
                d.0[x] = value.clone();
                queue.decrease(x, value);
            }
        }
        newly = queue.pop_all_minimal();
        for &x in &newly {
            frozen[x] = true;
        }
        frozen_count += newly.len();
        iterations += 1;
    }

    SolveResult {
        valuation: d,
        status: SolveStatus::Frozen,
        iterations,
        divergent: vec![],
        witnesses: None,
    }
}
