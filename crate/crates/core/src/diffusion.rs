//! The time-stepped multi-cascade diffusion process, live-edge sampling, and
//! distance-based evaluators for the dominant and homogeneous priority
//! classes.
//!
//! Randomized simulation is factored as: sample a live-edge graph (each edge
//! kept independently with its propagation probability), then run the
//! deterministic process on it. This makes the live-edge decomposition of
//! the objective literally the implementation and lets callers reuse one set
//! of live graphs across different seed sets.

use rand::Rng;

use crate::cascade::{CascadeId, CascadeSystem, PriorityProfile, ProfileClass};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::rng::substream;

pub(crate) const INF: u32 = u32::MAX;

const SALT_LIVE: u64 = 0x6c69_7665;

/// One deterministic realization of the graph's edge randomness: `kept[e]`
/// says whether edge `e` survives. Kept edges propagate with certainty.
#[derive(Debug, Clone)]
pub struct LiveEdgeGraph {
    kept: Box<[bool]>,
}

impl LiveEdgeGraph {
    pub fn from_kept(graph: &DirectedGraph, kept: Vec<bool>) -> Result<Self> {
        if kept.len() != graph.edge_count() {
            return Err(Error::invalid(format!(
                "kept mask has {} entries for {} edges",
                kept.len(),
                graph.edge_count()
            )));
        }
        Ok(LiveEdgeGraph {
            kept: kept.into_boxed_slice(),
        })
    }

    /// Keeps every edge; the deterministic graph.
    pub fn all_kept(graph: &DirectedGraph) -> Self {
        LiveEdgeGraph {
            kept: vec![true; graph.edge_count()].into_boxed_slice(),
        }
    }

    /// Builds the mask from the low bits of `mask`; edge `e` is kept iff bit
    /// `e` is set. Handy for exhaustive enumeration in tests.
    pub fn from_bitmask(graph: &DirectedGraph, mask: u64) -> Self {
        let kept: Vec<bool> = (0..graph.edge_count()).map(|e| mask >> e & 1 == 1).collect();
        LiveEdgeGraph {
            kept: kept.into_boxed_slice(),
        }
    }

    #[inline]
    pub fn kept(&self, edge: usize) -> bool {
        self.kept[edge]
    }

    pub fn kept_mask(&self) -> &[bool] {
        &self.kept
    }

    pub fn kept_count(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }
}

/// Samples a live-edge graph, keeping each edge independently with its
/// probability. Reproducible from the seed.
pub fn sample_live_edge_graph(graph: &DirectedGraph, seed: u64) -> LiveEdgeGraph {
    let mut rng = substream(seed, SALT_LIVE, 0);
    let mut kept = Vec::with_capacity(graph.edge_count());
    sample_kept_into(graph, &mut rng, &mut kept);
    LiveEdgeGraph {
        kept: kept.into_boxed_slice(),
    }
}

/// One uniform variate per edge, in edge-index order.
pub(crate) fn sample_kept_into(graph: &DirectedGraph, rng: &mut impl Rng, kept: &mut Vec<bool>) {
    kept.clear();
    for &p in graph.probs() {
        kept.push(rng.random::<f64>() < p);
    }
}

/// Read-only out-neighbor access shared by the full graph, live views and
/// compacted live adjacencies.
pub(crate) trait Neighbors {
    fn node_count(&self) -> usize;
    fn for_each_out<F: FnMut(NodeId)>(&self, u: NodeId, f: F);
}

/// A live-edge graph viewed through the parent CSR without copying.
pub(crate) struct LiveView<'a> {
    graph: &'a DirectedGraph,
    kept: &'a [bool],
}

impl<'a> LiveView<'a> {
    pub fn new(graph: &'a DirectedGraph, live: &'a LiveEdgeGraph) -> Self {
        LiveView {
            graph,
            kept: &live.kept,
        }
    }

    pub fn from_mask(graph: &'a DirectedGraph, kept: &'a [bool]) -> Self {
        debug_assert_eq!(kept.len(), graph.edge_count());
        LiveView { graph, kept }
    }
}

impl Neighbors for LiveView<'_> {
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    #[inline]
    fn for_each_out<F: FnMut(NodeId)>(&self, u: NodeId, mut f: F) {
        let range = self.graph.out_edge_range(u);
        let targets = self.graph.out_neighbors(u);
        for (i, e) in range.enumerate() {
            if self.kept[e] {
                f(targets[i]);
            }
        }
    }
}

/// Compact adjacency of one live graph; the representation used when the
/// same live graph is evaluated many times.
#[derive(Debug, Clone)]
pub(crate) struct Adjacency {
    offsets: Vec<u32>,
    targets: Vec<NodeId>,
}

impl Adjacency {
    pub fn from_live_mask(graph: &DirectedGraph, kept: &[bool]) -> Self {
        let n = graph.node_count();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for u in 0..n as NodeId {
            let range = graph.out_edge_range(u);
            let outs = graph.out_neighbors(u);
            for (i, e) in range.enumerate() {
                if kept[e] {
                    targets.push(outs[i]);
                }
            }
            offsets.push(targets.len() as u32);
        }
        Adjacency { offsets, targets }
    }

    #[inline]
    pub fn out(&self, u: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[u as usize] as usize..self.offsets[u as usize + 1] as usize]
    }
}

impl Neighbors for Adjacency {
    fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    fn for_each_out<F: FnMut(NodeId)>(&self, u: NodeId, mut f: F) {
        for &v in self.out(u) {
            f(v);
        }
    }
}

/// Multi-source BFS hop distances; `INF` marks unreachable nodes. `queue` is
/// scratch storage.
pub(crate) fn distances_into<G: Neighbors>(
    g: &G,
    sources: impl IntoIterator<Item = NodeId>,
    dist: &mut Vec<u32>,
    queue: &mut Vec<NodeId>,
) {
    dist.clear();
    dist.resize(g.node_count(), INF);
    queue.clear();
    for s in sources {
        if dist[s as usize] != 0 {
            dist[s as usize] = 0;
            queue.push(s);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        let next = dist[u as usize] + 1;
        g.for_each_out(u, |v| {
            if dist[v as usize] == INF {
                dist[v as usize] = next;
                queue.push(v);
            }
        });
    }
}

/// Exact diffusion process on a live graph, with reusable buffers.
///
/// Time 0 activates every seeded node with its highest-priority seeding
/// cascade. At step `t` every node activated at `t - 1` attempts each
/// still-inactive out-neighbor along kept edges; a node hit by several
/// activators adopts the hitting cascade with the highest rank at that node.
/// Activated nodes never change state.
pub(crate) struct Simulator {
    state: Vec<u32>, // cascade id + 1; valid only where seen == epoch
    seen: Vec<u32>,
    time: Vec<u32>,
    best: Vec<u32>, // pending hit this step; valid where hit_seen == epoch
    hit_seen: Vec<u32>,
    frontier: Vec<NodeId>,
    pending: Vec<NodeId>,
    touched: Vec<NodeId>,
    epoch: u32,
}

pub(crate) struct SimCounts {
    pub m_active: usize,
    pub not_m_active: usize,
}

impl Simulator {
    pub fn new() -> Self {
        Simulator {
            state: Vec::new(),
            seen: Vec::new(),
            time: Vec::new(),
            best: Vec::new(),
            hit_seen: Vec::new(),
            frontier: Vec::new(),
            pending: Vec::new(),
            touched: Vec::new(),
            epoch: 0,
        }
    }

    fn next_epoch(&mut self, n: usize) {
        if self.state.len() < n {
            self.state.resize(n, 0);
            self.seen.resize(n, 0);
            self.time.resize(n, 0);
            self.best.resize(n, 0);
            self.hit_seen.resize(n, 0);
        }
        if self.epoch == u32::MAX {
            self.seen.iter_mut().for_each(|s| *s = 0);
            self.hit_seen.iter_mut().for_each(|s| *s = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
    }

    pub fn run<G: Neighbors>(
        &mut self,
        g: &G,
        system: &CascadeSystem,
        profile: &PriorityProfile,
        star_seeds: &[NodeId],
    ) -> SimCounts {
        let n = g.node_count();
        self.next_epoch(n);
        let epoch = self.epoch;
        self.frontier.clear();
        self.pending.clear();
        self.touched.clear();

        let hit = |v: NodeId,
                       c: CascadeId,
                       best: &mut Vec<u32>,
                       hit_seen: &mut Vec<u32>,
                       pending: &mut Vec<NodeId>| {
            let vi = v as usize;
            if hit_seen[vi] != epoch {
                hit_seen[vi] = epoch;
                best[vi] = c + 1;
                pending.push(v);
            } else if profile.rank(v, c) > profile.rank(v, best[vi] - 1) {
                best[vi] = c + 1;
            }
        };

        // time 0: seeded nodes adopt their highest-priority seeding cascade
        for c in 0..system.cascade_count() as CascadeId {
            for &v in system.seeds(c) {
                hit(v, c, &mut self.best, &mut self.hit_seen, &mut self.pending);
            }
        }
        for &v in star_seeds {
            hit(
                v,
                system.star(),
                &mut self.best,
                &mut self.hit_seen,
                &mut self.pending,
            );
        }

        let mut t = 0u32;
        while !self.pending.is_empty() {
            for &v in &self.pending {
                let vi = v as usize;
                self.state[vi] = self.best[vi];
                self.seen[vi] = epoch;
                self.time[vi] = t;
                self.touched.push(v);
            }
            std::mem::swap(&mut self.frontier, &mut self.pending);
            self.pending.clear();

            for i in 0..self.frontier.len() {
                let u = self.frontier[i];
                let cu = self.state[u as usize] - 1;
                g.for_each_out(u, |v| {
                    if self.seen[v as usize] != epoch {
                        let vi = v as usize;
                        if self.hit_seen[vi] != epoch {
                            self.hit_seen[vi] = epoch;
                            self.best[vi] = cu + 1;
                            self.pending.push(v);
                        } else if profile.rank(v, cu) > profile.rank(v, self.best[vi] - 1) {
                            self.best[vi] = cu + 1;
                        }
                    }
                });
            }
            t += 1;
        }

        let mut m_active = 0;
        for &v in &self.touched {
            if system.is_misinformation(self.state[v as usize] - 1) {
                m_active += 1;
            }
        }
        SimCounts {
            m_active,
            not_m_active: n - m_active,
        }
    }

    /// Activated nodes of the last run, in activation order.
    pub fn touched(&self) -> &[NodeId] {
        &self.touched
    }

    pub fn state_of(&self, v: NodeId) -> Option<CascadeId> {
        if self.seen[v as usize] == self.epoch {
            Some(self.state[v as usize] - 1)
        } else {
            None
        }
    }

    pub fn time_of(&self, v: NodeId) -> Option<u32> {
        if self.seen[v as usize] == self.epoch {
            Some(self.time[v as usize])
        } else {
            None
        }
    }
}

/// Final activation state of one diffusion run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffusionOutcome {
    /// `None` is the never-activated state.
    pub state: Vec<Option<CascadeId>>,
    /// Activation step per node; `None` for never-activated nodes.
    pub activation_time: Vec<Option<u32>>,
    pub m_active_count: usize,
    /// Nodes activated by a positive cascade plus never-activated nodes.
    pub not_m_active_count: usize,
}

impl DiffusionOutcome {
    pub fn is_m_active(&self, system: &CascadeSystem, v: NodeId) -> bool {
        matches!(self.state[v as usize], Some(c) if system.is_misinformation(c))
    }
}

/// Source of edge randomness for [`simulate`].
pub enum Randomness<'a> {
    /// Sample a live-edge graph from this seed, then run deterministically.
    Seed(u64),
    /// Run deterministically on the given live-edge graph.
    Live(&'a LiveEdgeGraph),
}

fn validate_instance(
    graph: &DirectedGraph,
    system: &CascadeSystem,
    profile: &PriorityProfile,
    star_seeds: &[NodeId],
) -> Result<()> {
    system.validate_against(graph.node_count())?;
    if profile.cascade_count() != system.cascade_count() {
        return Err(Error::invalid(format!(
            "priority profile covers {} cascades, system has {}",
            profile.cascade_count(),
            system.cascade_count()
        )));
    }
    if profile.node_count() != graph.node_count() {
        return Err(Error::invalid(format!(
            "priority profile covers {} nodes, graph has {}",
            profile.node_count(),
            graph.node_count()
        )));
    }
    for &v in star_seeds {
        if v as usize >= graph.node_count() {
            return Err(Error::invalid(format!(
                "star seed {v} outside node range 0..{}",
                graph.node_count()
            )));
        }
    }
    Ok(())
}

/// Runs one diffusion and returns the full activation state.
pub fn simulate(
    graph: &DirectedGraph,
    system: &CascadeSystem,
    profile: &PriorityProfile,
    star_seeds: &[NodeId],
    randomness: Randomness<'_>,
) -> Result<DiffusionOutcome> {
    validate_instance(graph, system, profile, star_seeds)?;
    let sampled;
    let live = match randomness {
        Randomness::Seed(seed) => {
            sampled = sample_live_edge_graph(graph, seed);
            &sampled
        }
        Randomness::Live(lg) => {
            if lg.kept.len() != graph.edge_count() {
                return Err(Error::invalid(
                    "live-edge graph does not match the graph's edge count",
                ));
            }
            lg
        }
    };

    let view = LiveView::new(graph, live);
    let mut sim = Simulator::new();
    let counts = sim.run(&view, system, profile, star_seeds);

    let n = graph.node_count();
    let mut state = vec![None; n];
    let mut activation_time = vec![None; n];
    for &v in sim.touched() {
        state[v as usize] = sim.state_of(v);
        activation_time[v as usize] = sim.time_of(v);
    }
    Ok(DiffusionOutcome {
        state,
        activation_time,
        m_active_count: counts.m_active,
        not_m_active_count: counts.not_m_active,
    })
}

/// Result of a distance-based evaluation: the misinformation partition, and
/// for the homogeneous class also the exact winning cascade per node.
#[derive(Debug, Clone)]
pub struct FastOutcome {
    pub not_m_active: Vec<bool>,
    pub m_active_count: usize,
    pub not_m_active_count: usize,
    /// Exact activation states; populated for the homogeneous class, where
    /// the seed distances and the global order determine the winner.
    pub state: Option<Vec<Option<CascadeId>>>,
}

/// Scratch buffers for the distance evaluators.
pub(crate) struct FastScratch {
    pub d_m: Vec<u32>,
    pub d_pos: Vec<u32>,
    pub d_c: Vec<u32>,
    pub winner: Vec<u32>, // cascade + 1; 0 = unreached
    pub queue: Vec<NodeId>,
}

impl FastScratch {
    pub fn new() -> Self {
        FastScratch {
            d_m: Vec::new(),
            d_pos: Vec::new(),
            d_c: Vec::new(),
            winner: Vec::new(),
            queue: Vec::new(),
        }
    }
}

/// Counts the misinformation partition of one live graph without running the
/// step process. `count_not_m` receives each node's membership.
pub(crate) fn fast_partition<G: Neighbors>(
    g: &G,
    system: &CascadeSystem,
    class: ProfileClass,
    profile: &PriorityProfile,
    star_seeds: &[NodeId],
    scratch: &mut FastScratch,
    mut per_node: impl FnMut(NodeId, bool),
) -> SimCounts {
    let n = g.node_count();
    match class {
        ProfileClass::MDominant | ProfileClass::PDominant => {
            let m_sources = system.m_seed_union();
            distances_into(g, m_sources.iter().copied(), &mut scratch.d_m, &mut scratch.queue);
            let pos_sources = system.fixed_positive_seed_union();
            distances_into(
                g,
                pos_sources.iter().copied().chain(star_seeds.iter().copied()),
                &mut scratch.d_pos,
                &mut scratch.queue,
            );
            let strict = class == ProfileClass::MDominant;
            let mut not_m = 0;
            for v in 0..n {
                let dm = scratch.d_m[v];
                let dp = scratch.d_pos[v];
                // misinformation wins distance ties under an M-dominant
                // profile and loses them under a P-dominant one; doubly
                // unreachable nodes stay inactive and count as not-M
                let is_not_m = if strict { dp < dm || dm == INF } else { dp <= dm };
                if is_not_m {
                    not_m += 1;
                }
                per_node(v as NodeId, is_not_m);
            }
            SimCounts {
                m_active: n - not_m,
                not_m_active: not_m,
            }
        }
        ProfileClass::Homogeneous => {
            scratch.d_m.clear();
            scratch.d_m.resize(n, INF); // best distance so far
            scratch.winner.clear();
            scratch.winner.resize(n, 0);
            for c in 0..system.cascade_count() as CascadeId {
                let star_extra: &[NodeId] = if c == system.star() { star_seeds } else { &[] };
                distances_into(
                    g,
                    system.seeds(c).iter().copied().chain(star_extra.iter().copied()),
                    &mut scratch.d_c,
                    &mut scratch.queue,
                );
                for v in 0..n {
                    let d = scratch.d_c[v];
                    if d == INF {
                        continue;
                    }
                    let best = scratch.d_m[v];
                    if d < best
                        || (d == best
                            && profile.rank(0, c) > profile.rank(0, scratch.winner[v] - 1))
                    {
                        scratch.d_m[v] = d;
                        scratch.winner[v] = c + 1;
                    }
                }
            }
            let mut not_m = 0;
            for v in 0..n {
                let is_not_m = match scratch.winner[v] {
                    0 => true,
                    w => !system.is_misinformation(w - 1),
                };
                if is_not_m {
                    not_m += 1;
                }
                per_node(v as NodeId, is_not_m);
            }
            SimCounts {
                m_active: n - not_m,
                not_m_active: not_m,
            }
        }
        ProfileClass::General => unreachable!("checked by callers"),
    }
}

/// Evaluates the final misinformation partition on one live graph from seed
/// distances alone, for the three special priority classes. The declared
/// class is checked against the profile. Equals the step simulation in the
/// M-active / not-M-active partition.
pub fn evaluate_on_live_graph_fast(
    graph: &DirectedGraph,
    live: &LiveEdgeGraph,
    system: &CascadeSystem,
    class: ProfileClass,
    profile: &PriorityProfile,
    star_seeds: &[NodeId],
) -> Result<FastOutcome> {
    validate_instance(graph, system, profile, star_seeds)?;
    if class == ProfileClass::General {
        return Err(Error::invalid(
            "the fast evaluator handles only the homogeneous, m-dominant and p-dominant classes",
        ));
    }
    if !profile.is_class(system, class) {
        return Err(Error::invalid(format!(
            "priority profile is not {class}"
        )));
    }
    if live.kept.len() != graph.edge_count() {
        return Err(Error::invalid(
            "live-edge graph does not match the graph's edge count",
        ));
    }

    let view = LiveView::new(graph, live);
    let mut scratch = FastScratch::new();
    let mut not_m_active = vec![false; graph.node_count()];
    let counts = fast_partition(
        &view,
        system,
        class,
        profile,
        star_seeds,
        &mut scratch,
        |v, is_not_m| not_m_active[v as usize] = is_not_m,
    );

    let state = if class == ProfileClass::Homogeneous {
        Some(
            scratch
                .winner
                .iter()
                .map(|&w| if w == 0 { None } else { Some(w - 1) })
                .collect(),
        )
    } else {
        None
    };

    Ok(FastOutcome {
        not_m_active,
        m_active_count: counts.m_active,
        not_m_active_count: counts.not_m_active,
        state,
    })
}
