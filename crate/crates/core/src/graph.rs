//! Directed probabilistic graphs: CSR storage, edge-list ingestion, and the
//! propagation-probability assignment modes.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

pub type NodeId = u32;

/// One arc of an input graph, prior to CSR packing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub prob: f64,
    pub activity: Option<u64>,
}

impl Edge {
    pub fn new(source: NodeId, target: NodeId, prob: f64) -> Self {
        Edge {
            source,
            target,
            prob,
            activity: None,
        }
    }
}

/// A directed graph with a propagation probability per arc.
///
/// Node ids are dense `0..node_count`. Arcs are stored in CSR form sorted by
/// `(source, target)`, so edge indices are stable and independent of input
/// order. Self-loops and duplicate arcs are rejected at construction.
#[derive(Debug, Clone)]
pub struct DirectedGraph {
    node_count: usize,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    sources: Vec<NodeId>,
    probs: Vec<f64>,
    activities: Vec<Option<u64>>,
    /// Maps dense node id back to the id used in the input file, when the
    /// graph was loaded from one.
    external_ids: Option<Vec<u64>>,
}

impl DirectedGraph {
    pub fn new(node_count: usize, mut edges: Vec<Edge>) -> Result<Self> {
        edges.sort_by_key(|e| (e.source, e.target));
        let mut offsets = vec![0usize; node_count + 1];
        let mut targets = Vec::with_capacity(edges.len());
        let mut sources = Vec::with_capacity(edges.len());
        let mut probs = Vec::with_capacity(edges.len());
        let mut activities = Vec::with_capacity(edges.len());

        for (i, e) in edges.iter().enumerate() {
            if e.source as usize >= node_count || e.target as usize >= node_count {
                return Err(Error::invalid(format!(
                    "edge ({}, {}) endpoint outside node range 0..{}",
                    e.source, e.target, node_count
                )));
            }
            if e.source == e.target {
                return Err(Error::invalid(format!("self-loop at node {}", e.source)));
            }
            if i > 0 && edges[i - 1].source == e.source && edges[i - 1].target == e.target {
                return Err(Error::invalid(format!(
                    "duplicate edge ({}, {})",
                    e.source, e.target
                )));
            }
            if !(0.0..=1.0).contains(&e.prob) {
                return Err(Error::invalid(format!(
                    "edge ({}, {}) probability {} outside [0, 1]",
                    e.source, e.target, e.prob
                )));
            }
            offsets[e.source as usize + 1] += 1;
            targets.push(e.target);
            sources.push(e.source);
            probs.push(e.prob);
            activities.push(e.activity);
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        Ok(DirectedGraph {
            node_count,
            offsets,
            targets,
            sources,
            probs,
            activities,
            external_ids: None,
        })
    }

    /// Convenience constructor for tests: arcs without probabilities.
    pub fn from_arcs(node_count: usize, arcs: &[(NodeId, NodeId)]) -> Result<Self> {
        Self::new(
            node_count,
            arcs.iter().map(|&(u, v)| Edge::new(u, v, 0.0)).collect(),
        )
    }

    /// Convenience constructor: arcs with probabilities.
    pub fn from_weighted_arcs(node_count: usize, arcs: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        Self::new(
            node_count,
            arcs.iter().map(|&(u, v, p)| Edge::new(u, v, p)).collect(),
        )
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    /// Range of edge indices leaving `u`.
    pub fn out_edge_range(&self, u: NodeId) -> std::ops::Range<usize> {
        self.offsets[u as usize]..self.offsets[u as usize + 1]
    }

    pub fn edge_endpoints(&self, edge: usize) -> (NodeId, NodeId) {
        (self.sources[edge], self.targets[edge])
    }

    pub fn edge_prob(&self, edge: usize) -> f64 {
        self.probs[edge]
    }

    pub fn edge_activity(&self, edge: usize) -> Option<u64> {
        self.activities[edge]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Sum of out-edge probabilities; the node weight used by the
    /// high-weight and proximity baselines.
    pub fn node_weight(&self, u: NodeId) -> f64 {
        self.out_edge_range(u).map(|e| self.probs[e]).sum()
    }

    pub fn in_degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.node_count];
        for &t in &self.targets {
            deg[t as usize] += 1;
        }
        deg
    }

    /// The input-file id for a dense node id; identity when the graph was
    /// built programmatically.
    pub fn external_id(&self, u: NodeId) -> u64 {
        match &self.external_ids {
            Some(map) => map[u as usize],
            None => u as u64,
        }
    }

    /// Resolves an input-file node id to its dense id.
    pub fn resolve_external(&self, ext: u64) -> Option<NodeId> {
        match &self.external_ids {
            Some(map) => map
                .iter()
                .position(|&e| e == ext)
                .map(|i| i as NodeId),
            None => {
                if ext < self.node_count as u64 {
                    Some(ext as NodeId)
                } else {
                    None
                }
            }
        }
    }

    /// Applies a probability assignment mode, consuming the graph.
    pub fn assign_probabilities(mut self, mode: &ProbabilityMode) -> Result<DirectedGraph> {
        match mode {
            ProbabilityMode::Uniform(p) => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::invalid(format!(
                        "uniform probability {p} outside [0, 1]"
                    )));
                }
                for slot in self.probs.iter_mut() {
                    *slot = *p;
                }
            }
            ProbabilityMode::WeightedCascade => {
                let indeg = self.in_degrees();
                for (e, slot) in self.probs.iter_mut().enumerate() {
                    // every stored edge gives its target in-degree >= 1
                    *slot = 1.0 / f64::from(indeg[self.targets[e] as usize]);
                }
            }
            ProbabilityMode::ActivityBased { p_max, p_base } => {
                if p_base + p_max > 1.0 + 1e-12 || *p_max < 0.0 || *p_base < 0.0 {
                    return Err(Error::invalid(format!(
                        "activity-based parameters p_max={p_max}, p_base={p_base} must be \
                         non-negative with p_base + p_max <= 1"
                    )));
                }
                let mut a_max = 0u64;
                for (e, a) in self.activities.iter().enumerate() {
                    match a {
                        Some(a) => a_max = a_max.max(*a),
                        None => {
                            let (u, v) = self.edge_endpoints(e);
                            return Err(Error::invalid(format!(
                                "activity-based mode requires an activity on every edge; \
                                 edge ({u}, {v}) has none"
                            )));
                        }
                    }
                }
                if a_max == 0 {
                    return Err(Error::invalid(
                        "activity-based mode requires at least one positive activity",
                    ));
                }
                for (e, slot) in self.probs.iter_mut().enumerate() {
                    let a = self.activities[e].unwrap() as f64;
                    *slot = a / a_max as f64 * p_max + p_base;
                }
            }
            ProbabilityMode::FromFile => {
                for (e, &p) in self.probs.iter().enumerate() {
                    if p <= 0.0 {
                        let (u, v) = self.edge_endpoints(e);
                        return Err(Error::invalid(format!(
                            "from-file mode requires a positive probability on every edge; \
                             edge ({u}, {v}) has {p}"
                        )));
                    }
                }
            }
        }
        Ok(self)
    }
}

/// How edge propagation probabilities are assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbabilityMode {
    Uniform(f64),
    /// `p_(u,v) = 1 / indegree(v)`.
    WeightedCascade,
    /// `p_(u,v) = (a / a_max) * p_max + p_base` from per-edge activities.
    ActivityBased { p_max: f64, p_base: f64 },
    /// Keep the probabilities carried by the input file.
    FromFile,
}

impl fmt::Display for ProbabilityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbabilityMode::Uniform(p) => write!(f, "uniform({p})"),
            ProbabilityMode::WeightedCascade => write!(f, "weighted-cascade"),
            ProbabilityMode::ActivityBased { p_max, p_base } => {
                write!(f, "activity({p_max}, {p_base})")
            }
            ProbabilityMode::FromFile => write!(f, "from-file"),
        }
    }
}

/// Parses edge-list text: one arc per line, `u v`, optionally followed by an
/// integer activity and/or a probability. A third column containing a `.`,
/// `e` or `E` is read as a probability, otherwise as an activity; a fourth
/// column is always a probability. Lines starting with `#` are skipped.
///
/// Node ids may be sparse; they are compacted to `0..n` in order of first
/// appearance and the original ids are retained for reporting. With
/// `directed = false` every line is expanded into both arcs.
pub fn parse_edge_list(text: &str, directed: bool) -> Result<DirectedGraph> {
    let mut ids: HashMap<u64, NodeId> = HashMap::new();
    let mut external: Vec<u64> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();

    let intern = |ext: u64, external: &mut Vec<u64>, ids: &mut HashMap<u64, NodeId>| {
        *ids.entry(ext).or_insert_with(|| {
            external.push(ext);
            (external.len() - 1) as NodeId
        })
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.len() < 2 || tokens.len() > 4 {
            return Err(Error::parse(
                line,
                format!("expected 2-4 columns, found {}", tokens.len()),
            ));
        }
        let u_ext: u64 = tokens[0]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad source id {:?}", tokens[0])))?;
        let v_ext: u64 = tokens[1]
            .parse()
            .map_err(|_| Error::parse(line, format!("bad target id {:?}", tokens[1])))?;
        if u_ext == v_ext {
            return Err(Error::invalid(format!(
                "self-loop {u_ext} -> {v_ext} at line {line}"
            )));
        }

        let mut activity = None;
        let mut prob = 0.0f64;
        if tokens.len() >= 3 {
            let t = tokens[2];
            let looks_float = t.contains(['.', 'e', 'E']);
            if looks_float {
                if tokens.len() == 4 {
                    return Err(Error::parse(
                        line,
                        "probability column must come after the activity column",
                    ));
                }
                prob = t
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad probability {t:?}")))?;
            } else {
                let a: i64 = t
                    .parse()
                    .map_err(|_| Error::parse(line, format!("bad activity {t:?}")))?;
                if a < 0 {
                    return Err(Error::invalid(format!(
                        "negative activity {a} at line {line}"
                    )));
                }
                activity = Some(a as u64);
            }
        }
        if tokens.len() == 4 {
            prob = tokens[3]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad probability {:?}", tokens[3])))?;
        }
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::invalid(format!(
                "probability {prob} outside [0, 1] at line {line}"
            )));
        }

        let u = intern(u_ext, &mut external, &mut ids);
        let v = intern(v_ext, &mut external, &mut ids);
        edges.push(Edge {
            source: u,
            target: v,
            prob,
            activity,
        });
        if !directed {
            edges.push(Edge {
                source: v,
                target: u,
                prob,
                activity,
            });
        }
    }

    let mut graph = DirectedGraph::new(external.len(), edges)?;
    graph.external_ids = Some(external);
    Ok(graph)
}

/// Loads an edge list from disk; see [`parse_edge_list`] for the format.
pub fn load_edge_list(path: &Path, directed: bool) -> Result<DirectedGraph> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text, directed)
}
