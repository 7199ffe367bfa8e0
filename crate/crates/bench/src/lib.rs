//! Shared fixtures for the benchmarks.

use mc_core::cascade::{CascadeGroup, CascadeSystem, PriorityKind, PriorityProfile};
use mc_core::graph::{DirectedGraph, ProbabilityMode};
use mc_core::{make_priority_profile, synth};

/// A mid-sized synthetic instance: preferential-attachment graph under the
/// uniform probability setting, one misinformation and one positive cascade.
pub fn bench_instance(nodes: usize) -> (DirectedGraph, CascadeSystem, PriorityProfile) {
    let graph = synth::preferential_attachment(nodes, 3, 42)
        .assign_probabilities(&ProbabilityMode::Uniform(0.1))
        .unwrap();
    let influence = mc_core::single_node_influence(&graph, 50, 7);
    let mut ranked: Vec<u32> = (0..nodes as u32).collect();
    ranked.sort_by(|&a, &b| {
        influence[b as usize]
            .partial_cmp(&influence[a as usize])
            .unwrap()
            .then(a.cmp(&b))
    });
    let system = CascadeSystem::new(
        vec![
            (CascadeGroup::Misinformation, ranked[..10].to_vec()),
            (CascadeGroup::Positive, ranked[10..20].to_vec()),
            (CascadeGroup::Positive, vec![]),
        ],
        2,
    )
    .unwrap();
    let profile =
        make_priority_profile(&PriorityKind::Random { seed: 11 }, &system, nodes).unwrap();
    (graph, system, profile)
}
