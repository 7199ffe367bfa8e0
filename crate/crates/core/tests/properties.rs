//! Property tests over randomly generated instances. Instances are derived
//! deterministically from a proptest-chosen seed, so shrinking stays
//! meaningful.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use mc_core::cascade::{
    induce_lower_priority, induce_upper_priority, make_priority_profile, CascadeGroup,
    CascadeSystem, PriorityKind, PriorityProfile, ProfileClass,
};
use mc_core::diffusion::{
    evaluate_on_live_graph_fast, simulate, LiveEdgeGraph, Randomness,
};
use mc_core::estimate::{estimate, EstimatorConfig, ExactObjective};
use mc_core::graph::{DirectedGraph, Edge, NodeId, ProbabilityMode};
use mc_core::rng::substream;
use mc_core::solve::greedy;

fn rng_for(seed: u64) -> ChaCha8Rng {
    substream(seed, 0x70726f70, 0)
}

fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, max_edges: usize) -> DirectedGraph {
    let n = rng.random_range(2..=max_nodes);
    let mut pairs = Vec::new();
    for u in 0..n as NodeId {
        for v in 0..n as NodeId {
            if u != v {
                pairs.push((u, v));
            }
        }
    }
    pairs.shuffle(rng);
    let e = rng.random_range(0..=max_edges.min(pairs.len()));
    let edges = pairs[..e]
        .iter()
        .map(|&(u, v)| {
            let p = [0.0, 0.3, 0.5, 1.0][rng.random_range(0..4)];
            let mut edge = Edge::new(u, v, p);
            edge.activity = Some(rng.random_range(0..20u64));
            edge
        })
        .collect();
    DirectedGraph::new(n, edges).unwrap()
}

fn random_system(rng: &mut ChaCha8Rng, n: usize) -> CascadeSystem {
    let m = rng.random_range(1..=2usize);
    let p = rng.random_range(0..=2usize);
    let mut cascades = Vec::new();
    for _ in 0..m {
        cascades.push((
            CascadeGroup::Misinformation,
            vec![rng.random_range(0..n) as NodeId],
        ));
    }
    for _ in 0..p {
        cascades.push((
            CascadeGroup::Positive,
            vec![rng.random_range(0..n) as NodeId],
        ));
    }
    cascades.push((CascadeGroup::Positive, vec![]));
    let star = (cascades.len() - 1) as u32;
    CascadeSystem::new(cascades, star).unwrap()
}

fn random_profile(rng: &mut ChaCha8Rng, system: &CascadeSystem, n: usize) -> PriorityProfile {
    make_priority_profile(&PriorityKind::Random { seed: rng.random() }, system, n).unwrap()
}

/// Plain BFS written independently of the library's traversal code.
fn reference_distances(graph: &DirectedGraph, live: &LiveEdgeGraph, sources: &[NodeId]) -> Vec<u32> {
    let mut dist = vec![u32::MAX; graph.node_count()];
    let mut queue = std::collections::VecDeque::new();
    for &s in sources {
        if dist[s as usize] == u32::MAX {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let base = dist[u as usize];
        for (i, e) in graph.out_edge_range(u).enumerate() {
            let v = graph.out_neighbors(u)[i];
            if live.kept(e) && dist[v as usize] == u32::MAX {
                dist[v as usize] = base + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn induced_profiles_are_dominant_idempotent_and_order_preserving(seed: u64) {
        let mut rng = rng_for(seed);
        let n = rng.random_range(1..=6usize);
        let system = random_system(&mut rng, n.max(1));
        let profile = random_profile(&mut rng, &system, n);

        let upper = induce_upper_priority(&profile, &system);
        let lower = induce_lower_priority(&profile, &system);
        prop_assert!(upper.is_p_dominant(&system));
        prop_assert!(lower.is_m_dominant(&system));
        prop_assert_eq!(&induce_upper_priority(&upper, &system), &upper);
        prop_assert_eq!(&induce_lower_priority(&lower, &system), &lower);

        // relative order within each group is preserved
        let cc = system.cascade_count() as u32;
        for v in 0..n as NodeId {
            for a in 0..cc {
                for b in 0..cc {
                    if system.group(a) == system.group(b) {
                        let before = profile.rank(v, a) < profile.rank(v, b);
                        prop_assert_eq!(before, upper.rank(v, a) < upper.rank(v, b));
                        prop_assert_eq!(before, lower.rank(v, a) < lower.rank(v, b));
                    }
                }
            }
        }
    }

    #[test]
    fn probability_assignment_is_idempotent(seed: u64) {
        let mut rng = rng_for(seed);
        let graph = random_graph(&mut rng, 8, 16);
        let has_positive_activity =
            (0..graph.edge_count()).any(|e| graph.edge_activity(e).unwrap_or(0) > 0);
        let modes = [
            ProbabilityMode::Uniform(0.25),
            ProbabilityMode::WeightedCascade,
            ProbabilityMode::ActivityBased { p_max: 0.3, p_base: 0.1 },
        ];
        for mode in modes {
            if matches!(mode, ProbabilityMode::ActivityBased { .. }) && !has_positive_activity {
                continue;
            }
            let once = graph.clone().assign_probabilities(&mode).unwrap();
            let twice = once.clone().assign_probabilities(&mode).unwrap();
            prop_assert_eq!(once.probs(), twice.probs());
        }
    }

    #[test]
    fn simulate_is_deterministic_and_consistent(seed: u64) {
        let mut rng = rng_for(seed);
        let graph = random_graph(&mut rng, 8, 16);
        let n = graph.node_count();
        let system = random_system(&mut rng, n);
        let profile = random_profile(&mut rng, &system, n);
        let star: Vec<NodeId> = (0..rng.random_range(0..=2))
            .map(|_| rng.random_range(0..n) as NodeId)
            .collect();

        let a = simulate(&graph, &system, &profile, &star, Randomness::Seed(seed)).unwrap();
        let b = simulate(&graph, &system, &profile, &star, Randomness::Seed(seed)).unwrap();
        prop_assert_eq!(&a, &b);

        prop_assert_eq!(a.m_active_count + a.not_m_active_count, n);
        for v in 0..n {
            prop_assert_eq!(a.state[v].is_none(), a.activation_time[v].is_none());
        }
        for c in 0..system.cascade_count() as u32 {
            for &s in system.seeds(c) {
                prop_assert_eq!(a.activation_time[s as usize], Some(0));
            }
        }
        for &s in &star {
            prop_assert_eq!(a.activation_time[s as usize], Some(0));
        }
    }

    #[test]
    fn activation_times_equal_seed_union_distances(seed: u64) {
        let mut rng = rng_for(seed);
        let graph = random_graph(&mut rng, 8, 14);
        let n = graph.node_count();
        let system = random_system(&mut rng, n);
        let profile = random_profile(&mut rng, &system, n);
        let star: Vec<NodeId> = vec![rng.random_range(0..n) as NodeId];
        let mask: u64 = rng.random();
        let live = LiveEdgeGraph::from_bitmask(&graph, mask);

        let out = simulate(&graph, &system, &profile, &star, Randomness::Live(&live)).unwrap();
        let mut sources = system.all_fixed_seeds();
        sources.extend_from_slice(&star);
        let dist = reference_distances(&graph, &live, &sources);
        for v in 0..n {
            let expected = if dist[v] == u32::MAX { None } else { Some(dist[v]) };
            prop_assert_eq!(out.activation_time[v], expected, "node {}", v);
        }
    }

    #[test]
    fn fast_evaluator_matches_simulation_on_random_live_graphs(seed: u64) {
        let mut rng = rng_for(seed);
        let graph = random_graph(&mut rng, 7, 12);
        let n = graph.node_count();
        let system = random_system(&mut rng, n);
        let star: Vec<NodeId> = vec![rng.random_range(0..n) as NodeId];
        let mask: u64 = rng.random();
        let live = LiveEdgeGraph::from_bitmask(&graph, mask);

        let general = random_profile(&mut rng, &system, n);
        for (class, profile) in [
            (ProfileClass::MDominant, induce_lower_priority(&general, &system)),
            (ProfileClass::PDominant, induce_upper_priority(&general, &system)),
        ] {
            let fast =
                evaluate_on_live_graph_fast(&graph, &live, &system, class, &profile, &star)
                    .unwrap();
            let sim =
                simulate(&graph, &system, &profile, &star, Randomness::Live(&live)).unwrap();
            prop_assert_eq!(fast.m_active_count, sim.m_active_count);
            for v in 0..n as NodeId {
                prop_assert_eq!(
                    !fast.not_m_active[v as usize],
                    sim.is_m_active(&system, v)
                );
            }
        }
    }

    #[test]
    fn estimate_preserves_the_partition_identity(seed: u64) {
        let mut rng = rng_for(seed);
        let graph = random_graph(&mut rng, 8, 12);
        let n = graph.node_count();
        let system = random_system(&mut rng, n);
        let profile = random_profile(&mut rng, &system, n);
        let est = estimate(
            &graph,
            &system,
            &profile,
            &[0],
            &EstimatorConfig::new(64, seed),
        )
        .unwrap();
        prop_assert_eq!(est.mean_m_active + est.mean_not_m_active, n as f64);
        prop_assert!(est.std_error >= 0.0);
    }

    #[test]
    fn greedy_never_returns_less_than_doing_nothing(seed: u64) {
        let mut rng = rng_for(seed);
        let graph = random_graph(&mut rng, 8, 12);
        let n = graph.node_count();
        let system = random_system(&mut rng, n);
        let profile = random_profile(&mut rng, &system, n);
        let mut f = ExactObjective::new(&graph, &system, &profile).unwrap();
        let candidates: Vec<NodeId> = (0..n as NodeId).collect();
        let res = greedy(&mut f, &candidates, 2);
        let empty = mc_core::estimate::exact_f(&graph, &system, &profile, &[]).unwrap().1;
        prop_assert!(res.objective_value.unwrap() >= empty - 1e-12);
    }
}
