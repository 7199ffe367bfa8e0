//! Multi-cascade information diffusion on directed probabilistic graphs,
//! with per-node cascade priorities, and seed selection for containing
//! misinformation by launching a competing positive cascade.
//!
//! The crate provides:
//! - [`graph`]: CSR graphs, edge-list ingestion, probability assignment;
//! - [`cascade`]: cascade systems, priority profiles, induced bounds;
//! - [`diffusion`]: the exact step process, live-edge sampling, and
//!   distance-based evaluators for the special priority classes;
//! - [`estimate`]: Monte Carlo and exact objective estimation;
//! - [`solve`]: greedy, sandwich, baselines, and brute force;
//! - [`hardness`]: the executable partial-set-cover reduction;
//! - [`synth`]: synthetic graph generators;
//! - [`verify`]: randomized and exhaustive verification suites.

pub mod cascade;
pub mod diffusion;
pub mod error;
pub mod estimate;
pub mod graph;
pub mod hardness;
pub mod rng;
pub mod solve;
pub mod synth;
pub mod verify;

pub use cascade::{
    induce_lower_priority, induce_upper_priority, make_priority_profile, CascadeGroup, CascadeId,
    CascadeSystem, PriorityKind, PriorityProfile, ProfileClass,
};
pub use diffusion::{
    evaluate_on_live_graph_fast, sample_live_edge_graph, simulate, DiffusionOutcome, FastOutcome,
    LiveEdgeGraph, Randomness,
};
pub use error::{Error, Result};
pub use estimate::{
    estimate, exact_f, exact_f_batch, single_node_influence, Estimate, EstimatorConfig,
    EvaluatorKind, ExactObjective, MonteCarloObjective,
};
pub use graph::{load_edge_list, parse_edge_list, DirectedGraph, Edge, NodeId, ProbabilityMode};
pub use hardness::{
    build_reduction, pspc_cost, verify_reduction_identity, IdentityCheck, NodeRole, PspcInstance,
    PspcSet, ReducedInstance,
};
pub use solve::{
    baseline_high_weight, baseline_proximity, baseline_random, brute_force_opt, greedy, sandwich,
    SandwichOutcome, SetFunction, SolveResult, TraceStep,
};
