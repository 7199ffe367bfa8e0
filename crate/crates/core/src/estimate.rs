//! Estimators of the misinformation objective: Monte Carlo over sampled
//! live-edge graphs, and an exact oracle that enumerates every live graph
//! over the uncertain edges.
//!
//! For a seed set `S` of the new cascade, `f_not_m(S)` is the expected number
//! of nodes that end up positive-activated or never activated, and
//! `f_m(S) = node_count - f_not_m(S)`.

use crate::cascade::{CascadeId, CascadeSystem, PriorityProfile, ProfileClass};
use crate::diffusion::{
    distances_into, fast_partition, sample_kept_into, FastScratch, LiveView, Simulator,
    INF,
};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::rng::{hash_nodes, substream};
use crate::solve::SetFunction;

pub(crate) const SALT_REPLICATION: u64 = 0x7265_706c;

/// Exhaustive enumeration is guarded to keep the oracle a desk tool.
pub const MAX_UNCERTAIN_EDGES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluatorKind {
    /// Fast distance evaluation when the profile class permits, otherwise
    /// step simulation.
    Auto,
    StepSimulation,
    FastBfs,
}

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    pub replications: usize,
    pub base_seed: u64,
    /// Reuse the same live graphs for every evaluated seed set; replication
    /// streams then depend only on `(base_seed, r)`.
    pub common_random_numbers: bool,
    pub evaluator: EvaluatorKind,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            replications: 5000,
            base_seed: 0,
            common_random_numbers: true,
            evaluator: EvaluatorKind::Auto,
        }
    }
}

impl EstimatorConfig {
    pub fn new(replications: usize, base_seed: u64) -> Self {
        EstimatorConfig {
            replications,
            base_seed,
            ..Default::default()
        }
    }

    pub fn with_evaluator(mut self, evaluator: EvaluatorKind) -> Self {
        self.evaluator = evaluator;
        self
    }
}

/// A Monte Carlo estimate of the objective pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean_not_m_active: f64,
    pub mean_m_active: f64,
    /// Standard error of the not-M mean.
    pub std_error: f64,
    pub replications: usize,
}

enum Evaluation {
    Fast(ProfileClass),
    Sim,
}

fn pick_evaluator(
    cfg: EvaluatorKind,
    system: &CascadeSystem,
    profile: &PriorityProfile,
) -> Result<Evaluation> {
    let class = profile.class(system);
    match cfg {
        EvaluatorKind::Auto => Ok(if class == ProfileClass::General {
            Evaluation::Sim
        } else {
            Evaluation::Fast(class)
        }),
        EvaluatorKind::StepSimulation => Ok(Evaluation::Sim),
        EvaluatorKind::FastBfs => {
            if class == ProfileClass::General {
                Err(Error::invalid(
                    "fast evaluator requested but the priority profile is in no special class",
                ))
            } else {
                Ok(Evaluation::Fast(class))
            }
        }
    }
}

fn check_instance(
    graph: &DirectedGraph,
    system: &CascadeSystem,
    profile: &PriorityProfile,
    star_seeds: &[NodeId],
) -> Result<()> {
    system.validate_against(graph.node_count())?;
    if profile.node_count() != graph.node_count()
        || profile.cascade_count() != system.cascade_count()
    {
        return Err(Error::invalid("priority profile does not match the instance"));
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

/// Monte Carlo estimate of `(f_not_m, f_m)` at `star_seeds`. Replication `r`
/// draws its live graph from a stream determined by `(base_seed, r)` (and,
/// with common random numbers off, the seed set), so estimates are exactly
/// reproducible and comparable across seed sets.
pub fn estimate(
    graph: &DirectedGraph,
    system: &CascadeSystem,
    profile: &PriorityProfile,
    star_seeds: &[NodeId],
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    check_instance(graph, system, profile, star_seeds)?;
    if cfg.replications == 0 {
        return Err(Error::invalid("estimator needs at least one replication"));
    }
    let evaluation = pick_evaluator(cfg.evaluator, system, profile)?;
    let salt = if cfg.common_random_numbers {
        SALT_REPLICATION
    } else {
        SALT_REPLICATION ^ hash_nodes(star_seeds)
    };

    let n = graph.node_count() as f64;
    let mut kept: Vec<bool> = Vec::new();
    let mut sim = Simulator::new();
    let mut scratch = FastScratch::new();
    let mut sum = 0.0f64;
    let mut sumsq = 0.0f64;
    for r in 0..cfg.replications {
        let mut rng = substream(cfg.base_seed, salt, r as u64);
        sample_kept_into(graph, &mut rng, &mut kept);
        let view = LiveView::from_mask(graph, &kept);
        let not_m = match &evaluation {
            Evaluation::Sim => sim.run(&view, system, profile, star_seeds).not_m_active,
            Evaluation::Fast(class) => {
                fast_partition(&view, system, *class, profile, star_seeds, &mut scratch, |_, _| {})
                    .not_m_active
            }
        } as f64;
        sum += not_m;
        sumsq += not_m * not_m;
    }

    let r = cfg.replications as f64;
    let mean = sum / r;
    let std_error = if cfg.replications > 1 {
        let var = ((sumsq - sum * sum / r) / (r - 1.0)).max(0.0);
        (var / r).sqrt()
    } else {
        0.0
    };
    Ok(Estimate {
        mean_not_m_active: mean,
        mean_m_active: n - mean,
        std_error,
        replications: cfg.replications,
    })
}

/// Exact `(f_m, f_not_m)` by enumerating all live graphs over the uncertain
/// edges, each weighted by its product probability.
pub fn exact_f(
    graph: &DirectedGraph,
    system: &CascadeSystem,
    profile: &PriorityProfile,
    star_seeds: &[NodeId],
) -> Result<(f64, f64)> {
    Ok(exact_f_batch(graph, system, profile, &[star_seeds])?[0])
}

/// Exact values for several seed sets in one enumeration pass.
pub fn exact_f_batch(
    graph: &DirectedGraph,
    system: &CascadeSystem,
    profile: &PriorityProfile,
    subsets: &[&[NodeId]],
) -> Result<Vec<(f64, f64)>> {
    for s in subsets {
        check_instance(graph, system, profile, s)?;
    }
    if subsets.is_empty() {
        return Ok(Vec::new());
    }

    let uncertain: Vec<usize> = (0..graph.edge_count())
        .filter(|&e| {
            let p = graph.edge_prob(e);
            p > 0.0 && p < 1.0
        })
        .collect();
    if uncertain.len() > MAX_UNCERTAIN_EDGES {
        return Err(Error::Capacity(format!(
            "exact enumeration supports at most {MAX_UNCERTAIN_EDGES} uncertain edges, \
             the graph has {}",
            uncertain.len()
        )));
    }

    let class = profile.class(system);
    let n = graph.node_count();
    let mut kept: Vec<bool> = graph.probs().iter().map(|&p| p >= 1.0).collect();
    let mut not_m_sums = vec![0.0f64; subsets.len()];
    let mut total_weight = 0.0f64;

    // the candidate universe of the subsets, for the shared-distance path
    let mut universe: Vec<NodeId> = subsets.iter().flat_map(|s| s.iter().copied()).collect();
    universe.sort_unstable();
    universe.dedup();
    let tallied = class != ProfileClass::General && universe.len() <= 16;
    let subset_masks: Vec<u32> = if tallied {
        subsets
            .iter()
            .map(|s| {
                let mut m = 0u32;
                for c in s.iter() {
                    m |= 1 << universe.binary_search(c).unwrap();
                }
                m
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut sim = Simulator::new();
    let mut scratch = FastScratch::new();
    let mut cand_dist: Vec<Vec<u32>> = vec![Vec::new(); universe.len()];
    let mut queue: Vec<NodeId> = Vec::new();
    let mut best_rank: Vec<u32> = Vec::new();
    let mut best_is_m: Vec<bool> = Vec::new();
    let m_union = system.m_seed_union();
    let pos_union = system.fixed_positive_seed_union();
    let global_rank: Vec<u32> = (0..system.cascade_count() as CascadeId)
        .map(|c| profile.rank(0, c))
        .collect();
    let star_rank = global_rank[system.star() as usize];
    let mut tally = vec![0u32; if tallied { 1usize << universe.len() } else { 0 }];

    for mask in 0u64..1u64 << uncertain.len() {
        let mut weight = 1.0f64;
        for (bit, &e) in uncertain.iter().enumerate() {
            let p = graph.edge_prob(e);
            if mask >> bit & 1 == 1 {
                kept[e] = true;
                weight *= p;
            } else {
                kept[e] = false;
                weight *= 1.0 - p;
            }
        }
        total_weight += weight;
        let view = LiveView::from_mask(graph, &kept);

        if !tallied {
            // general priorities: one step simulation per subset
            for (i, s) in subsets.iter().enumerate() {
                let counts = sim.run(&view, system, profile, s);
                not_m_sums[i] += weight * counts.not_m_active as f64;
            }
            continue;
        }

        // Per node, decide the no-new-seed membership and which candidates
        // would flip it to the positive side; a subset then scores
        // base + |{v : flip_mask(v) ∩ subset ≠ ∅}|.
        for (ci, &c) in universe.iter().enumerate() {
            distances_into(&view, std::iter::once(c), &mut cand_dist[ci], &mut queue);
        }
        tally.fill(0);
        let mut base_count = 0u32;
        match class {
            ProfileClass::MDominant | ProfileClass::PDominant => {
                distances_into(&view, m_union.iter().copied(), &mut scratch.d_m, &mut queue);
                distances_into(&view, pos_union.iter().copied(), &mut scratch.d_pos, &mut queue);
                let strict = class == ProfileClass::MDominant;
                for v in 0..n {
                    let dm = scratch.d_m[v];
                    let dp = scratch.d_pos[v];
                    let base = if strict { dp < dm || dm == INF } else { dp <= dm };
                    if base {
                        base_count += 1;
                        continue;
                    }
                    let mut flips = 0u32;
                    for ci in 0..universe.len() {
                        let dc = cand_dist[ci][v];
                        if if strict { dc < dm } else { dc <= dm } {
                            flips |= 1 << ci;
                        }
                    }
                    tally[flips as usize] += 1;
                }
            }
            ProfileClass::Homogeneous => {
                // winner among the existing cascades only
                scratch.d_m.clear();
                scratch.d_m.resize(n, INF);
                best_rank.clear();
                best_rank.resize(n, 0);
                best_is_m.clear();
                best_is_m.resize(n, false);
                for c in 0..system.cascade_count() as CascadeId {
                    distances_into(
                        &view,
                        system.seeds(c).iter().copied(),
                        &mut scratch.d_pos,
                        &mut queue,
                    );
                    for v in 0..n {
                        let d = scratch.d_pos[v];
                        if d == INF {
                            continue;
                        }
                        if d < scratch.d_m[v]
                            || (d == scratch.d_m[v] && global_rank[c as usize] > best_rank[v])
                        {
                            scratch.d_m[v] = d;
                            best_rank[v] = global_rank[c as usize];
                            best_is_m[v] = system.is_misinformation(c);
                        }
                    }
                }
                for v in 0..n {
                    // unreached nodes and positive winners stay on the
                    // positive side no matter where the new cascade seeds
                    if !best_is_m[v] {
                        base_count += 1;
                        continue;
                    }
                    let d0 = scratch.d_m[v];
                    let mut flips = 0u32;
                    for ci in 0..universe.len() {
                        let dc = cand_dist[ci][v];
                        if dc < d0 || (dc == d0 && star_rank > best_rank[v]) {
                            flips |= 1 << ci;
                        }
                    }
                    tally[flips as usize] += 1;
                }
            }
            ProfileClass::General => unreachable!(),
        }

        for (i, &smask) in subset_masks.iter().enumerate() {
            let mut count = base_count;
            for (w, &t) in tally.iter().enumerate().skip(1) {
                if t > 0 && w as u32 & smask != 0 {
                    count += t;
                }
            }
            not_m_sums[i] += weight * f64::from(count);
        }
    }

    if (total_weight - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "live-graph weights sum to {total_weight}, expected 1"
        )));
    }
    Ok(not_m_sums
        .into_iter()
        .map(|fnm| (n as f64 - fnm, fnm))
        .collect())
}

/// Expected number of nodes one cascade would activate when seeded alone at
/// each node, estimated over `replications` live graphs shared across
/// nodes. Used to rank seed candidates for the existing cascades.
pub fn single_node_influence(
    graph: &DirectedGraph,
    replications: usize,
    base_seed: u64,
) -> Vec<f64> {
    let n = graph.node_count();
    let mut totals = vec![0u64; n];
    let mut kept: Vec<bool> = Vec::new();
    let mut mark = vec![0u64; n];
    let mut epoch = 0u64;
    let mut queue: Vec<NodeId> = Vec::new();
    for r in 0..replications {
        let mut rng = substream(base_seed, SALT_REPLICATION ^ 0x696e_666c, r as u64);
        sample_kept_into(graph, &mut rng, &mut kept);
        let adj = crate::diffusion::Adjacency::from_live_mask(graph, &kept);
        for v in 0..n {
            epoch += 1;
            queue.clear();
            queue.push(v as NodeId);
            mark[v] = epoch;
            let mut head = 0;
            while head < queue.len() {
                let u = queue[head];
                head += 1;
                for &w in adj.out(u) {
                    if mark[w as usize] != epoch {
                        mark[w as usize] = epoch;
                        queue.push(w);
                    }
                }
            }
            totals[v] += queue.len() as u64;
        }
    }
    totals
        .into_iter()
        .map(|t| t as f64 / replications.max(1) as f64)
        .collect()
}

/// Exact-oracle objective: evaluates `f_not_m` by live-graph enumeration.
pub struct ExactObjective<'a> {
    graph: &'a DirectedGraph,
    system: &'a CascadeSystem,
    profile: &'a PriorityProfile,
}

impl<'a> ExactObjective<'a> {
    pub fn new(
        graph: &'a DirectedGraph,
        system: &'a CascadeSystem,
        profile: &'a PriorityProfile,
    ) -> Result<Self> {
        check_instance(graph, system, profile, &[])?;
        let uncertain = graph
            .probs()
            .iter()
            .filter(|&&p| p > 0.0 && p < 1.0)
            .count();
        if uncertain > MAX_UNCERTAIN_EDGES {
            return Err(Error::Capacity(format!(
                "exact objective supports at most {MAX_UNCERTAIN_EDGES} uncertain edges, \
                 the graph has {uncertain}"
            )));
        }
        Ok(ExactObjective {
            graph,
            system,
            profile,
        })
    }
}

impl SetFunction for ExactObjective<'_> {
    fn value(&mut self, seeds: &[NodeId]) -> f64 {
        exact_f(self.graph, self.system, self.profile, seeds)
            .expect("instance checked at construction")
            .1
    }
}

enum ObjectiveMode {
    /// Strict inequality for the M-dominant class, non-strict for P-dominant.
    Distance { strict: bool },
    Sim,
}

/// Estimate-backed objective over one fixed ensemble of live graphs (common
/// random numbers across every evaluated seed set), with incremental
/// marginal-gain evaluation under the dominant priority classes.
pub struct MonteCarloObjective<'a> {
    graph: &'a DirectedGraph,
    system: &'a CascadeSystem,
    profile: &'a PriorityProfile,
    mode: ObjectiveMode,
    adjacencies: Vec<crate::diffusion::Adjacency>,
    // distance mode, per replication
    d_m: Vec<Vec<u32>>,
    covered: Vec<Vec<bool>>,
    covered_counts: Vec<u64>,
    // scratch
    dist: Vec<u32>,
    queue: Vec<NodeId>,
    mark: Vec<u32>,
    mark_epoch: u32,
    frontier: Vec<NodeId>,
    next_frontier: Vec<NodeId>,
    sim: Simulator,
    ext: Vec<NodeId>,
}

impl<'a> MonteCarloObjective<'a> {
    pub fn new(
        graph: &'a DirectedGraph,
        system: &'a CascadeSystem,
        profile: &'a PriorityProfile,
        replications: usize,
        base_seed: u64,
    ) -> Result<Self> {
        check_instance(graph, system, profile, &[])?;
        if replications == 0 {
            return Err(Error::invalid("objective needs at least one replication"));
        }
        let mode = match profile.class(system) {
            ProfileClass::MDominant => ObjectiveMode::Distance { strict: true },
            ProfileClass::PDominant => ObjectiveMode::Distance { strict: false },
            _ => ObjectiveMode::Sim,
        };

        let mut kept: Vec<bool> = Vec::new();
        let mut adjacencies = Vec::with_capacity(replications);
        for r in 0..replications {
            let mut rng = substream(base_seed, SALT_REPLICATION, r as u64);
            sample_kept_into(graph, &mut rng, &mut kept);
            adjacencies.push(crate::diffusion::Adjacency::from_live_mask(graph, &kept));
        }

        let mut obj = MonteCarloObjective {
            graph,
            system,
            profile,
            mode,
            adjacencies,
            d_m: Vec::new(),
            covered: Vec::new(),
            covered_counts: Vec::new(),
            dist: Vec::new(),
            queue: Vec::new(),
            mark: vec![0; graph.node_count()],
            mark_epoch: 0,
            frontier: Vec::new(),
            next_frontier: Vec::new(),
            sim: Simulator::new(),
            ext: Vec::new(),
        };
        if let ObjectiveMode::Distance { .. } = obj.mode {
            let m_union = obj.system.m_seed_union();
            obj.d_m = obj
                .adjacencies
                .iter()
                .map(|adj| {
                    let mut d = Vec::new();
                    distances_into(adj, m_union.iter().copied(), &mut d, &mut obj.queue);
                    d
                })
                .collect();
            obj.covered = vec![vec![false; graph.node_count()]; obj.adjacencies.len()];
            obj.covered_counts = vec![0; obj.adjacencies.len()];
            obj.rebase(&[]);
        }
        Ok(obj)
    }

    pub fn replications(&self) -> usize {
        self.adjacencies.len()
    }

    fn not_m_by_distance(&mut self, seeds: &[NodeId], r: usize, strict: bool) -> u64 {
        let pos_union = self.system.fixed_positive_seed_union();
        distances_into(
            &self.adjacencies[r],
            pos_union.iter().copied().chain(seeds.iter().copied()),
            &mut self.dist,
            &mut self.queue,
        );
        let mut not_m = 0u64;
        for v in 0..self.graph.node_count() {
            let dm = self.d_m[r][v];
            let dp = self.dist[v];
            let is_not_m = if strict { dp < dm || dm == INF } else { dp <= dm };
            if is_not_m {
                not_m += 1;
            }
        }
        not_m
    }

    /// Nodes newly covered by seeding `x` on replication `r`: BFS from `x`
    /// counting uncovered nodes whose distance from `x` beats the
    /// misinformation distance.
    fn marginal_on(&mut self, r: usize, x: NodeId, strict: bool) -> u64 {
        self.mark_epoch += 1;
        let epoch = self.mark_epoch;
        let adj = &self.adjacencies[r];
        let d_m = &self.d_m[r];
        let covered = &self.covered[r];
        let mut gain = 0u64;
        self.frontier.clear();
        self.frontier.push(x);
        self.mark[x as usize] = epoch;
        let mut depth = 0u32;
        loop {
            for &u in &self.frontier {
                let dm = d_m[u as usize];
                let wins = if strict { depth < dm } else { depth <= dm };
                if wins && !covered[u as usize] {
                    gain += 1;
                }
            }
            self.next_frontier.clear();
            for &u in &self.frontier {
                for &v in adj.out(u) {
                    if self.mark[v as usize] != epoch {
                        self.mark[v as usize] = epoch;
                        self.next_frontier.push(v);
                    }
                }
            }
            if self.next_frontier.is_empty() {
                break;
            }
            std::mem::swap(&mut self.frontier, &mut self.next_frontier);
            depth += 1;
        }
        gain
    }
}

impl SetFunction for MonteCarloObjective<'_> {
    fn value(&mut self, seeds: &[NodeId]) -> f64 {
        let reps = self.adjacencies.len();
        let mut sum = 0u64;
        match self.mode {
            ObjectiveMode::Distance { strict } => {
                for r in 0..reps {
                    sum += self.not_m_by_distance(seeds, r, strict);
                }
            }
            ObjectiveMode::Sim => {
                for r in 0..reps {
                    sum += self
                        .sim
                        .run(&self.adjacencies[r], self.system, self.profile, seeds)
                        .not_m_active as u64;
                }
            }
        }
        sum as f64 / reps as f64
    }

    fn rebase(&mut self, base: &[NodeId]) {
        match self.mode {
            ObjectiveMode::Distance { strict } => {
                let pos_union = self.system.fixed_positive_seed_union();
                for r in 0..self.adjacencies.len() {
                    distances_into(
                        &self.adjacencies[r],
                        pos_union.iter().copied().chain(base.iter().copied()),
                        &mut self.dist,
                        &mut self.queue,
                    );
                    let covered = &mut self.covered[r];
                    let mut count = 0u64;
                    for v in 0..self.graph.node_count() {
                        let dm = self.d_m[r][v];
                        let dp = self.dist[v];
                        let is_not_m = if strict { dp < dm || dm == INF } else { dp <= dm };
                        covered[v] = is_not_m;
                        if is_not_m {
                            count += 1;
                        }
                    }
                    self.covered_counts[r] = count;
                }
            }
            ObjectiveMode::Sim => {}
        }
    }

    fn value_with(&mut self, base: &[NodeId], extra: NodeId) -> f64 {
        let reps = self.adjacencies.len();
        match self.mode {
            ObjectiveMode::Distance { strict } => {
                // `rebase(base)` has prepared the covered masks
                let mut sum = 0u64;
                for r in 0..reps {
                    sum += self.covered_counts[r] + self.marginal_on(r, extra, strict);
                }
                sum as f64 / reps as f64
            }
            ObjectiveMode::Sim => {
                let mut ext = std::mem::take(&mut self.ext);
                ext.clear();
                ext.extend_from_slice(base);
                ext.push(extra);
                let mut sum = 0u64;
                for r in 0..reps {
                    sum += self
                        .sim
                        .run(&self.adjacencies[r], self.system, self.profile, &ext)
                        .not_m_active as u64;
                }
                self.ext = ext;
                sum as f64 / reps as f64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{make_priority_profile, CascadeGroup, PriorityKind};
    use crate::solve::SetFunction;
    use CascadeGroup::{Misinformation as M, Positive as P};

    fn star_only_system() -> CascadeSystem {
        CascadeSystem::new(vec![(P, vec![])], 0).unwrap()
    }

    #[test]
    fn edgeless_graph_estimates_exactly() {
        let g = DirectedGraph::from_arcs(4, &[]).unwrap();
        let system = star_only_system();
        let profile = make_priority_profile(
            &PriorityKind::Homogeneous { order: vec![0] },
            &system,
            4,
        )
        .unwrap();
        let est = estimate(
            &g,
            &system,
            &profile,
            &[2],
            &EstimatorConfig::new(16, 1),
        )
        .unwrap();
        assert_eq!(est.mean_not_m_active, 4.0);
        assert_eq!(est.mean_m_active, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    /// Single edge u -> v with p = 0.5, misinformation seeded at u: the two
    /// equally likely outcomes have 2 and 1 M-active nodes, so f_m = 1.5.
    fn coin_flip_instance() -> (DirectedGraph, CascadeSystem, PriorityProfile) {
        let g = DirectedGraph::from_weighted_arcs(2, &[(0, 1, 0.5)]).unwrap();
        let system = CascadeSystem::new(vec![(M, vec![0]), (P, vec![])], 1).unwrap();
        let profile = make_priority_profile(
            &PriorityKind::Homogeneous { order: vec![0, 1] },
            &system,
            2,
        )
        .unwrap();
        (g, system, profile)
    }

    #[test]
    fn exact_f_matches_two_outcome_enumeration() {
        let (g, system, profile) = coin_flip_instance();
        let (f_m, f_not_m) = exact_f(&g, &system, &profile, &[]).unwrap();
        assert!((f_m - 1.5).abs() < 1e-12);
        assert!((f_not_m - 0.5).abs() < 1e-12);
    }

    #[test]
    fn estimate_converges_to_exact_within_three_standard_errors() {
        let (g, system, profile) = coin_flip_instance();
        let est = estimate(
            &g,
            &system,
            &profile,
            &[],
            &EstimatorConfig::new(100_000, 42),
        )
        .unwrap();
        assert!(est.std_error > 0.0);
        assert!(
            (est.mean_m_active - 1.5).abs() <= 3.0 * est.std_error,
            "mean {} se {}",
            est.mean_m_active,
            est.std_error
        );
    }

    #[test]
    fn deterministic_graph_estimate_equals_exact_for_any_replication_count() {
        let g = DirectedGraph::from_weighted_arcs(4, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let system = CascadeSystem::new(vec![(M, vec![0]), (P, vec![])], 1).unwrap();
        let profile = make_priority_profile(
            &PriorityKind::Homogeneous { order: vec![0, 1] },
            &system,
            4,
        )
        .unwrap();
        let (f_m, f_not_m) = exact_f(&g, &system, &profile, &[3]).unwrap();
        for reps in [1, 2, 7] {
            let est = estimate(
                &g,
                &system,
                &profile,
                &[3],
                &EstimatorConfig::new(reps, reps as u64),
            )
            .unwrap();
            assert_eq!(est.mean_m_active, f_m);
            assert_eq!(est.mean_not_m_active, f_not_m);
            assert_eq!(est.std_error, 0.0);
        }
    }

    #[test]
    fn partition_identity_holds_per_estimate() {
        let (g, system, profile) = coin_flip_instance();
        let est = estimate(&g, &system, &profile, &[1], &EstimatorConfig::new(999, 3)).unwrap();
        assert_eq!(est.mean_m_active + est.mean_not_m_active, 2.0);
    }

    /// An isolated misinformation seed flipped by the star cascade changes
    /// the count by exactly one on every live graph, so with common random
    /// numbers the marginal estimate is noise-free.
    #[test]
    fn common_random_numbers_make_isolated_marginals_exact() {
        let g = DirectedGraph::from_weighted_arcs(4, &[(0, 1, 0.5), (1, 2, 0.5)]).unwrap();
        let system = CascadeSystem::new(vec![(M, vec![0, 3]), (P, vec![])], 1).unwrap();
        // star outranks misinformation everywhere
        let profile = make_priority_profile(
            &PriorityKind::Homogeneous { order: vec![0, 1] },
            &system,
            4,
        )
        .unwrap();
        // power-of-two replication count keeps the means exact in f64
        let cfg = EstimatorConfig::new(512, 11);
        let base = estimate(&g, &system, &profile, &[], &cfg).unwrap();
        // node 3 is isolated and M-seeded: seeding the star there flips it
        let with = estimate(&g, &system, &profile, &[3], &cfg).unwrap();
        assert_eq!(with.mean_not_m_active - base.mean_not_m_active, 1.0);
        // a second star seed on an already-positive node adds exactly zero
        let again = estimate(&g, &system, &profile, &[3, 3], &cfg).unwrap();
        assert_eq!(again.mean_not_m_active, with.mean_not_m_active);
    }

    #[test]
    fn exact_rejects_too_many_uncertain_edges() {
        let arcs: Vec<(NodeId, NodeId, f64)> = (0..21).map(|i| (i, i + 1, 0.5)).collect();
        let g = DirectedGraph::from_weighted_arcs(22, &arcs).unwrap();
        let system = CascadeSystem::new(vec![(M, vec![0]), (P, vec![])], 1).unwrap();
        let profile = make_priority_profile(
            &PriorityKind::Homogeneous { order: vec![0, 1] },
            &system,
            22,
        )
        .unwrap();
        assert!(matches!(
            exact_f(&g, &system, &profile, &[]),
            Err(Error::Capacity(_))
        ));
    }

    /// Independent oracle: enumerate live graphs by hand and run the step
    /// simulator on each.
    fn exact_by_simulation(
        g: &DirectedGraph,
        system: &CascadeSystem,
        profile: &PriorityProfile,
        seeds: &[NodeId],
    ) -> f64 {
        use crate::diffusion::{simulate, LiveEdgeGraph, Randomness};
        let mut total = 0.0;
        for mask in 0u64..1 << g.edge_count() {
            let mut weight = 1.0;
            for e in 0..g.edge_count() {
                let p = g.edge_prob(e);
                weight *= if mask >> e & 1 == 1 { p } else { 1.0 - p };
            }
            if weight == 0.0 {
                continue;
            }
            let live = LiveEdgeGraph::from_bitmask(g, mask);
            let out = simulate(g, system, profile, seeds, Randomness::Live(&live)).unwrap();
            total += weight * out.not_m_active_count as f64;
        }
        total
    }

    #[test]
    fn batch_agrees_with_simulation_enumeration_across_classes() {
        let g = DirectedGraph::from_weighted_arcs(
            6,
            &[(0, 2, 0.7), (2, 3, 0.3), (1, 3, 0.7), (3, 4, 1.0), (1, 5, 0.3)],
        )
        .unwrap();
        let system = CascadeSystem::new(vec![(M, vec![0]), (P, vec![1]), (P, vec![])], 2).unwrap();
        let subsets: Vec<Vec<NodeId>> = vec![vec![], vec![4], vec![2, 5]];
        let refs: Vec<&[NodeId]> = subsets.iter().map(|s| s.as_slice()).collect();
        for kind in [
            PriorityKind::MDominant {
                order: PriorityKind::identity_order(3),
            },
            PriorityKind::PDominant {
                order: PriorityKind::identity_order(3),
            },
            PriorityKind::Homogeneous {
                order: vec![1, 0, 2],
            },
            PriorityKind::Random { seed: 5 },
        ] {
            let profile = make_priority_profile(&kind, &system, 6).unwrap();
            let batch = exact_f_batch(&g, &system, &profile, &refs).unwrap();
            for (i, s) in refs.iter().enumerate() {
                let reference = exact_by_simulation(&g, &system, &profile, s);
                assert!(
                    (batch[i].1 - reference).abs() < 1e-9,
                    "subset {i} under {kind:?}: batch {} vs sim {}",
                    batch[i].1,
                    reference
                );
                let single = exact_f(&g, &system, &profile, s).unwrap();
                assert!((batch[i].1 - single.1).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn monte_carlo_objective_matches_streaming_estimates() {
        let g = DirectedGraph::from_weighted_arcs(
            7,
            &[(0, 2, 0.5), (2, 3, 0.5), (1, 3, 0.5), (3, 4, 0.5), (5, 6, 0.5)],
        )
        .unwrap();
        let system = CascadeSystem::new(vec![(M, vec![0]), (P, vec![1]), (P, vec![])], 2).unwrap();
        for kind in [
            PriorityKind::MDominant {
                order: PriorityKind::identity_order(3),
            },
            PriorityKind::PDominant {
                order: PriorityKind::identity_order(3),
            },
            PriorityKind::Random { seed: 8 },
        ] {
            let profile = make_priority_profile(&kind, &system, 7).unwrap();
            let mut obj = MonteCarloObjective::new(&g, &system, &profile, 200, 17).unwrap();
            for seeds in [vec![], vec![5], vec![4, 5]] {
                let est = estimate(
                    &g,
                    &system,
                    &profile,
                    &seeds,
                    &EstimatorConfig::new(200, 17),
                )
                .unwrap();
                assert_eq!(obj.value(&seeds), est.mean_not_m_active, "{kind:?} {seeds:?}");
            }
            // incremental evaluation agrees with from-scratch evaluation
            obj.rebase(&[5]);
            let inc = obj.value_with(&[5], 4);
            let full = obj.value(&[4, 5]);
            assert_eq!(inc, full);
        }
    }
}
