//! Synthetic graph generators, so experiments and verification runs need no
//! external downloads. Probabilities are left unset; apply a
//! [`crate::graph::ProbabilityMode`] afterwards.

use rand::Rng;

use crate::graph::{DirectedGraph, Edge, NodeId};
use crate::rng::substream;

const SALT_SYNTH: u64 = 0x7379_6e74;

/// Directed Erdős–Rényi graph: every ordered pair becomes an arc
/// independently with probability `edge_prob`.
pub fn erdos_renyi(node_count: usize, edge_prob: f64, seed: u64) -> DirectedGraph {
    let mut rng = substream(seed, SALT_SYNTH, 0);
    let mut edges = Vec::new();
    for u in 0..node_count as NodeId {
        for v in 0..node_count as NodeId {
            if u != v && rng.random::<f64>() < edge_prob {
                edges.push(Edge::new(u, v, 0.0));
            }
        }
    }
    DirectedGraph::new(node_count, edges).expect("generated edges are valid")
}

/// Preferential-attachment graph: each new node attaches to
/// `edges_per_node` distinct earlier nodes chosen proportionally to degree,
/// and every undirected attachment becomes two arcs.
pub fn preferential_attachment(node_count: usize, edges_per_node: usize, seed: u64) -> DirectedGraph {
    let m = edges_per_node.max(1);
    assert!(
        node_count > m,
        "preferential attachment needs more than {m} nodes"
    );
    let mut rng = substream(seed, SALT_SYNTH, 1);
    let mut endpoints: Vec<NodeId> = Vec::new();
    let mut edges = Vec::new();
    let attach = |u: NodeId, v: NodeId, edges: &mut Vec<Edge>, endpoints: &mut Vec<NodeId>| {
        edges.push(Edge::new(u, v, 0.0));
        edges.push(Edge::new(v, u, 0.0));
        endpoints.push(u);
        endpoints.push(v);
    };

    // bootstrap: node m connects to all earlier nodes
    for v in 0..m as NodeId {
        attach(m as NodeId, v, &mut edges, &mut endpoints);
    }
    let mut targets: Vec<NodeId> = Vec::with_capacity(m);
    for u in (m + 1)..node_count {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for i in 0..m {
            attach(u as NodeId, targets[i], &mut edges, &mut endpoints);
        }
    }
    DirectedGraph::new(node_count, edges).expect("generated edges are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erdos_renyi_is_reproducible_with_plausible_density() {
        let a = erdos_renyi(50, 0.1, 3);
        let b = erdos_renyi(50, 0.1, 3);
        assert_eq!(a.edge_count(), b.edge_count());
        // 2450 ordered pairs at p = 0.1; allow a wide deterministic band
        assert!(a.edge_count() > 150 && a.edge_count() < 350, "{}", a.edge_count());
    }

    #[test]
    fn preferential_attachment_has_expected_edge_count() {
        let g = preferential_attachment(100, 3, 9);
        // (100 - 3) incoming nodes each add 3 undirected edges = 2 arcs
        assert_eq!(g.edge_count(), 2 * 3 * 97);
        let h = preferential_attachment(100, 3, 9);
        let edges_g: Vec<_> = (0..g.edge_count()).map(|e| g.edge_endpoints(e)).collect();
        let edges_h: Vec<_> = (0..h.edge_count()).map(|e| h.edge_endpoints(e)).collect();
        assert_eq!(edges_g, edges_h);
    }
}
