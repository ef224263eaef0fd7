//! Solvers and verifiers for shortest-path-style optimization problems on
//! weighted G-graphs: greatest fixed points of Bellman operators, computed by
//! Kleene iteration or by the coalgebraic Dijkstra algorithm, together with
//! the expansiveness condition that decides when Dijkstra is correct and the
//! counterexample construction for when it is not.

pub mod cli;
pub mod domain;
pub mod graph;
pub mod instances;
pub mod modality;
pub mod solve;
pub mod verify;

/// Dense state identifier, `0..V`.
pub type StateId = usize;

pub use domain::{DomainId, OrderDirection, WeightDomain, WeightValue};
pub use graph::{load_graph, predecessors, save_graph, ReverseIndex, StateData, WeightedGraph};
pub use instances::{
    example_graph, instance, instance_default, InstanceId, InstanceParams, InstanceSpec,
};
pub use modality::{Modality, ModalityId, Payload, Transition};
pub use solve::{
    bellman_apply, coalg_dijkstra, coalg_dijkstra_heap, kleene_gfp, selective_bellman,
    DijkstraOptions, KleeneOptions, SolveResult, SolveStatus, Trace, Valuation,
};
pub use verify::{
    check_expansive, contraction_coalgebra, cross_check, omega_sigma, run_tree_infimum,
    ConstructionTree, CrossCheckConfig, CrossCheckReport, ExpansivenessReport, PayloadSource,
    Verdict,
};
