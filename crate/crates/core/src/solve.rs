//! Seed-selection algorithms: greedy with the best-prefix rule, the
//! sandwich strategy over the induced upper/lower objectives, the weight
//! and proximity baselines, and a guarded brute-force optimum.

use crate::cascade::CascadeSystem;
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId};
use crate::rng::substream;

const SALT_RANDOM_BASELINE: u64 = 0x7262_6173;

/// A set function over node sets, evaluated by the solvers.
///
/// `rebase` announces the committed base set of the current greedy
/// iteration; `value_with` evaluates `base ∪ {extra}` and may exploit state
/// prepared by the preceding `rebase` call. The defaults fall back to plain
/// `value` evaluation.
pub trait SetFunction {
    fn value(&mut self, seeds: &[NodeId]) -> f64;

    fn rebase(&mut self, base: &[NodeId]) {
        let _ = base;
    }

    fn value_with(&mut self, base: &[NodeId], extra: NodeId) -> f64 {
        let mut s = Vec::with_capacity(base.len() + 1);
        s.extend_from_slice(base);
        s.push(extra);
        self.value(&s)
    }
}

impl<F: FnMut(&[NodeId]) -> f64> SetFunction for F {
    fn value(&mut self, seeds: &[NodeId]) -> f64 {
        self(seeds)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceStep {
    pub node: NodeId,
    pub gain: f64,
    /// Objective value of the prefix ending at this step.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub seeds: Vec<NodeId>,
    /// Objective value of `seeds`; `None` for heuristics that do not
    /// evaluate the objective themselves.
    pub objective_value: Option<f64>,
    pub trace: Vec<TraceStep>,
    /// For sandwich results, the computable certificate factor.
    pub bound_ratio: Option<f64>,
}

impl SolveResult {
    fn bare(seeds: Vec<NodeId>) -> Self {
        SolveResult {
            seeds,
            objective_value: None,
            trace: Vec::new(),
            bound_ratio: None,
        }
    }
}

fn sorted_candidates(candidates: &[NodeId]) -> Vec<NodeId> {
    let mut c = candidates.to_vec();
    c.sort_unstable();
    c.dedup();
    c
}

/// Greedy maximization: repeatedly add the candidate with the largest
/// marginal gain (ties to the smallest node id), then return the best prefix
/// of the produced chain, which may be the empty set when the function is
/// not monotone.
pub fn greedy<H: SetFunction + ?Sized>(
    h: &mut H,
    candidates: &[NodeId],
    budget: usize,
) -> SolveResult {
    let cands = sorted_candidates(candidates);
    let mut used = vec![false; cands.len()];
    let mut chain: Vec<NodeId> = Vec::new();
    let mut values = vec![h.value(&[])];
    let mut trace = Vec::new();

    for _ in 0..budget.min(cands.len()) {
        h.rebase(&chain);
        let mut best: Option<(usize, f64)> = None;
        for (ci, &x) in cands.iter().enumerate() {
            if used[ci] {
                continue;
            }
            let v = h.value_with(&chain, x);
            // strict comparison keeps the smallest id on ties
            if best.map_or(true, |(_, bv)| v > bv) {
                best = Some((ci, v));
            }
        }
        let (ci, v) = best.expect("candidates remain");
        used[ci] = true;
        chain.push(cands[ci]);
        trace.push(TraceStep {
            node: cands[ci],
            gain: v - values.last().unwrap(),
            value: v,
        });
        values.push(v);
    }

    // best prefix; ties prefer the shorter one
    let mut best_len = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best_len] {
            best_len = i;
        }
    }
    SolveResult {
        seeds: chain[..best_len].to_vec(),
        objective_value: Some(values[best_len]),
        trace,
        bound_ratio: None,
    }
}

/// The three greedy runs of the sandwich strategy plus the selected answer.
#[derive(Debug, Clone)]
pub struct SandwichOutcome {
    /// The set maximizing `f` among the three candidates, carrying the
    /// certificate ratio `f(upper seeds) / f_upper(upper seeds)`.
    pub result: SolveResult,
    pub upper: SolveResult,
    pub lower: SolveResult,
    pub base: SolveResult,
}

/// Runs greedy on the upper bound, the lower bound and the objective itself,
/// and keeps whichever of the three seed sets scores best under the
/// objective.
pub fn sandwich<F, U, L>(
    f: &mut F,
    f_upper: &mut U,
    f_lower: &mut L,
    candidates: &[NodeId],
    budget: usize,
) -> SandwichOutcome
where
    F: SetFunction + ?Sized,
    U: SetFunction + ?Sized,
    L: SetFunction + ?Sized,
{
    let upper = greedy(f_upper, candidates, budget);
    let lower = greedy(f_lower, candidates, budget);
    let base = greedy(f, candidates, budget);

    let f_of_upper = f.value(&upper.seeds);
    let f_of_lower = f.value(&lower.seeds);
    let f_of_base = base
        .objective_value
        .expect("greedy always reports a value");

    let mut chosen = &upper;
    let mut chosen_value = f_of_upper;
    if f_of_lower > chosen_value {
        chosen = &lower;
        chosen_value = f_of_lower;
    }
    if f_of_base > chosen_value {
        chosen = &base;
        chosen_value = f_of_base;
    }

    let upper_bound_value = upper
        .objective_value
        .expect("greedy always reports a value");
    let bound_ratio = if upper_bound_value > 0.0 {
        Some(f_of_upper / upper_bound_value)
    } else {
        None
    };

    let result = SolveResult {
        seeds: chosen.seeds.clone(),
        objective_value: Some(chosen_value),
        trace: chosen.trace.clone(),
        bound_ratio,
    };
    SandwichOutcome {
        result,
        upper,
        lower,
        base,
    }
}

fn top_k_by_weight(
    graph: &DirectedGraph,
    pool: &[NodeId],
    k: usize,
    exclude: &[NodeId],
) -> Vec<NodeId> {
    let mut ranked: Vec<NodeId> = pool
        .iter()
        .copied()
        .filter(|v| !exclude.contains(v))
        .collect();
    ranked.sort_by(|&a, &b| {
        graph
            .node_weight(b)
            .partial_cmp(&graph.node_weight(a))
            .unwrap()
            .then(a.cmp(&b))
    });
    ranked.truncate(k);
    ranked
}

/// Top-k candidates by node weight (the sum of out-edge probabilities),
/// ties to the smallest id.
pub fn baseline_high_weight(
    graph: &DirectedGraph,
    candidates: &[NodeId],
    k: usize,
) -> SolveResult {
    let cands = sorted_candidates(candidates);
    let mut seeds = top_k_by_weight(graph, &cands, k, &[]);
    seeds.sort_unstable();
    SolveResult::bare(seeds)
}

/// Picks heavy out-neighbors of the misinformation seeds, filling any
/// shortfall with high-weight candidates.
pub fn baseline_proximity(
    graph: &DirectedGraph,
    system: &CascadeSystem,
    candidates: &[NodeId],
    k: usize,
) -> SolveResult {
    let cands = sorted_candidates(candidates);
    let existing = system.all_fixed_seeds();
    let mut pool: Vec<NodeId> = system
        .m_seed_union()
        .iter()
        .flat_map(|&u| graph.out_neighbors(u).iter().copied())
        .filter(|v| cands.binary_search(v).is_ok() && !existing.contains(v))
        .collect();
    pool.sort_unstable();
    pool.dedup();

    let mut seeds = top_k_by_weight(graph, &pool, k, &[]);
    if seeds.len() < k {
        let fill = top_k_by_weight(graph, &cands, k - seeds.len(), &seeds);
        seeds.extend(fill);
    }
    seeds.sort_unstable();
    SolveResult::bare(seeds)
}

/// One uniform k-subset of the candidates, reproducible from the seed.
/// Averaging the objective over repeated draws is the harness's job.
pub fn baseline_random(candidates: &[NodeId], k: usize, seed: u64) -> SolveResult {
    let cands = sorted_candidates(candidates);
    if k >= cands.len() {
        return SolveResult::bare(cands);
    }
    let mut rng = substream(seed, SALT_RANDOM_BASELINE, 0);
    let picked = rand::seq::index::sample(&mut rng, cands.len(), k);
    let mut seeds: Vec<NodeId> = picked.iter().map(|i| cands[i]).collect();
    seeds.sort_unstable();
    SolveResult::bare(seeds)
}

/// Advances `idx` to the next size-`|idx|` combination of `0..n`; false when
/// exhausted.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] != i + n - k {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn subsets_up_to(n: usize, k: usize) -> Option<u64> {
    let mut total = 0u64;
    let mut binom = 1u64;
    for i in 0..=k.min(n) {
        if i > 0 {
            binom = binom.checked_mul((n - i + 1) as u64)? / i as u64;
        }
        total = total.checked_add(binom)?;
    }
    Some(total)
}

/// Exhaustive maximization of `h` over candidate subsets of size at most
/// `k`. Guarded at one million subsets.
pub fn brute_force_opt<H: SetFunction + ?Sized>(
    h: &mut H,
    candidates: &[NodeId],
    k: usize,
) -> Result<SolveResult> {
    const LIMIT: u64 = 1_000_000;
    let cands = sorted_candidates(candidates);
    match subsets_up_to(cands.len(), k) {
        Some(total) if total <= LIMIT => {}
        _ => {
            return Err(Error::Capacity(format!(
                "brute force over {} candidates up to size {k} exceeds {LIMIT} subsets",
                cands.len()
            )))
        }
    }

    let mut best_seeds: Vec<NodeId> = Vec::new();
    let mut best_value = h.value(&[]);
    let mut subset: Vec<NodeId> = Vec::new();
    for size in 1..=k.min(cands.len()) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            subset.clear();
            subset.extend(idx.iter().map(|&i| cands[i]));
            let v = h.value(&subset);
            if v > best_value {
                best_value = v;
                best_seeds = subset.clone();
            }
            if !next_combination(&mut idx, cands.len()) {
                break;
            }
        }
    }
    Ok(SolveResult {
        seeds: best_seeds,
        objective_value: Some(best_value),
        trace: Vec::new(),
        bound_ratio: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{make_priority_profile, CascadeGroup, PriorityKind};
    use crate::estimate::{exact_f, ExactObjective};
    use CascadeGroup::{Misinformation as M, Positive as P};

    #[test]
    fn greedy_cardinality_breaks_ties_by_smallest_id() {
        let mut h = |s: &[NodeId]| s.len() as f64;
        let res = greedy(&mut h, &[2, 0, 1], 2);
        assert_eq!(res.seeds, vec![0, 1]);
        assert_eq!(res.objective_value, Some(2.0));
        assert_eq!(res.trace.len(), 2);
        assert_eq!(res.trace[0].gain, 1.0);
    }

    #[test]
    fn greedy_returns_empty_prefix_when_seeding_hurts() {
        let mut h = |s: &[NodeId]| if s.is_empty() { 5.0 } else { 4.0 };
        let res = greedy(&mut h, &[0, 1, 2], 2);
        assert!(res.seeds.is_empty());
        assert_eq!(res.objective_value, Some(5.0));
    }

    /// Weighted coverage: candidate i covers `sets[i]`, elements carry
    /// weights; monotone and submodular, so greedy is (1 - 1/e)-good.
    fn coverage(sets: &'static [&'static [usize]], weights: &'static [f64]) -> impl FnMut(&[NodeId]) -> f64 {
        move |s: &[NodeId]| {
            let mut covered = vec![false; weights.len()];
            for &c in s {
                for &e in sets[c as usize] {
                    covered[e] = true;
                }
            }
            covered
                .iter()
                .zip(weights)
                .filter(|(c, _)| **c)
                .map(|(_, w)| w)
                .sum()
        }
    }

    #[test]
    fn greedy_meets_the_guarantee_on_weighted_coverage() {
        static SETS: [&[usize]; 4] = [&[0, 1], &[1, 2, 3], &[3], &[0, 4]];
        static WEIGHTS: [f64; 5] = [3.0, 1.0, 2.0, 2.5, 1.5];
        let mut h = coverage(&SETS, &WEIGHTS);
        let res = greedy(&mut h, &[0, 1, 2, 3], 2);
        let mut h2 = coverage(&SETS, &WEIGHTS);
        let opt = brute_force_opt(&mut h2, &[0, 1, 2, 3], 2).unwrap();
        let bound = (1.0 - (-1.0f64).exp()) * opt.objective_value.unwrap();
        assert!(res.objective_value.unwrap() >= bound - 1e-9);
    }

    fn tiny_instance(
        priority: PriorityKind,
    ) -> (
        DirectedGraph,
        CascadeSystem,
        crate::cascade::PriorityProfile,
    ) {
        let g = DirectedGraph::from_weighted_arcs(
            6,
            &[(0, 2, 0.7), (2, 3, 0.3), (1, 3, 0.7), (3, 4, 1.0), (4, 5, 0.3)],
        )
        .unwrap();
        let system = CascadeSystem::new(vec![(M, vec![0]), (P, vec![1]), (P, vec![])], 2).unwrap();
        let profile = make_priority_profile(&priority, &system, 6).unwrap();
        (g, system, profile)
    }

    #[test]
    fn sandwich_collapses_without_misinformation() {
        let g = DirectedGraph::from_weighted_arcs(4, &[(0, 1, 0.5), (1, 2, 0.5)]).unwrap();
        let system = CascadeSystem::new(vec![(P, vec![0]), (P, vec![])], 1).unwrap();
        let profile =
            make_priority_profile(&PriorityKind::Random { seed: 2 }, &system, 4).unwrap();
        let mut f = ExactObjective::new(&g, &system, &profile).unwrap();
        let upper_profile = crate::cascade::induce_upper_priority(&profile, &system);
        let lower_profile = crate::cascade::induce_lower_priority(&profile, &system);
        assert_eq!(upper_profile, profile);
        assert_eq!(lower_profile, profile);
        let mut fu = ExactObjective::new(&g, &system, &upper_profile).unwrap();
        let mut fl = ExactObjective::new(&g, &system, &lower_profile).unwrap();
        let out = sandwich(&mut f, &mut fu, &mut fl, &[1, 2, 3], 2);
        assert_eq!(out.upper.seeds, out.lower.seeds);
        assert_eq!(out.upper.seeds, out.base.seeds);
        assert_eq!(out.result.bound_ratio, Some(1.0));
    }

    #[test]
    fn sandwich_lower_run_equals_base_under_m_dominant_input() {
        let (g, system, profile) = tiny_instance(PriorityKind::MDominant {
            order: PriorityKind::identity_order(3),
        });
        let lower_profile = crate::cascade::induce_lower_priority(&profile, &system);
        assert_eq!(lower_profile, profile, "M-dominant input is a fixed point");
        let upper_profile = crate::cascade::induce_upper_priority(&profile, &system);
        let mut f = ExactObjective::new(&g, &system, &profile).unwrap();
        let mut fu = ExactObjective::new(&g, &system, &upper_profile).unwrap();
        let mut fl = ExactObjective::new(&g, &system, &lower_profile).unwrap();
        let out = sandwich(&mut f, &mut fu, &mut fl, &[2, 3, 4, 5], 2);
        assert_eq!(out.lower.seeds, out.base.seeds);
        assert_eq!(out.lower.objective_value, out.base.objective_value);
        // the chosen set is at least as good as plain greedy on f
        assert!(
            out.result.objective_value.unwrap() >= out.base.objective_value.unwrap() - 1e-12
        );
        let ratio = out.result.bound_ratio.unwrap();
        assert!(ratio > 0.0 && ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn high_weight_prefers_the_star_center() {
        // node 0 fans out with total weight 1.0; leaves have weight 0
        let g = DirectedGraph::from_weighted_arcs(
            6,
            &[(0, 1, 0.2), (0, 2, 0.2), (0, 3, 0.2), (0, 4, 0.2), (0, 5, 0.2)],
        )
        .unwrap();
        let res = baseline_high_weight(&g, &[0, 1, 2, 3, 4, 5], 1);
        assert_eq!(res.seeds, vec![0]);
        assert!(res.objective_value.is_none());
    }

    #[test]
    fn high_weight_tie_break_takes_smallest_ids() {
        let g = DirectedGraph::from_arcs(5, &[]).unwrap();
        let res = baseline_high_weight(&g, &[4, 3, 2, 1, 0], 3);
        assert_eq!(res.seeds, vec![0, 1, 2]);
    }

    #[test]
    fn uniform_probabilities_rank_by_out_degree() {
        let g = DirectedGraph::from_arcs(
            5,
            &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        )
        .unwrap();
        let g = g
            .assign_probabilities(&crate::graph::ProbabilityMode::Uniform(0.1))
            .unwrap();
        let res = baseline_high_weight(&g, &[0, 1, 2, 3, 4], 3);
        // out-degrees: 3, 2, 1, 0, 0
        assert_eq!(res.seeds, vec![0, 1, 2]);
    }

    #[test]
    fn proximity_prefers_heavy_misinformation_neighbors() {
        // M seed 0 points at 1, 2, 3; node weights 2 > 3 > 1
        let g = DirectedGraph::from_weighted_arcs(
            6,
            &[
                (0, 1, 1.0),
                (0, 2, 1.0),
                (0, 3, 1.0),
                (2, 4, 1.0),
                (2, 5, 1.0),
                (3, 4, 1.0),
            ],
        )
        .unwrap();
        let system = CascadeSystem::new(vec![(M, vec![0]), (P, vec![])], 1).unwrap();
        let res = baseline_proximity(&g, &system, &[1, 2, 3, 4, 5], 2);
        assert_eq!(res.seeds, vec![2, 3]);
    }

    #[test]
    fn proximity_falls_back_to_high_weight() {
        let g = DirectedGraph::from_weighted_arcs(4, &[(1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        // the misinformation seed has no out-neighbors
        let system = CascadeSystem::new(vec![(M, vec![0]), (P, vec![])], 1).unwrap();
        let res = baseline_proximity(&g, &system, &[1, 2, 3], 2);
        let hw = baseline_high_weight(&g, &[1, 2, 3], 2);
        assert_eq!(res.seeds, hw.seeds);
    }

    #[test]
    fn proximity_fills_a_short_pool() {
        let g = DirectedGraph::from_weighted_arcs(
            5,
            &[(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)],
        )
        .unwrap();
        let system = CascadeSystem::new(vec![(M, vec![0]), (P, vec![])], 1).unwrap();
        let res = baseline_proximity(&g, &system, &[1, 2, 3, 4], 3);
        // pool is {1}; the two heaviest remaining candidates follow
        assert_eq!(res.seeds.len(), 3);
        assert!(res.seeds.contains(&1));
        assert!(res.seeds.contains(&2));
        assert!(res.seeds.contains(&3));
    }

    #[test]
    fn random_baseline_is_reproducible_and_total_at_full_budget() {
        let cands = [5, 1, 9, 3];
        assert_eq!(baseline_random(&cands, 4, 0).seeds, vec![1, 3, 5, 9]);
        assert_eq!(baseline_random(&cands, 9, 0).seeds, vec![1, 3, 5, 9]);
        let a = baseline_random(&cands, 2, 7);
        let b = baseline_random(&cands, 2, 7);
        assert_eq!(a.seeds, b.seeds);
        assert_eq!(a.seeds.len(), 2);
    }

    #[test]
    fn random_baseline_mean_matches_full_enumeration() {
        let (g, system, profile) = tiny_instance(PriorityKind::MDominant {
            order: PriorityKind::identity_order(3),
        });
        let cands: Vec<NodeId> = vec![2, 3, 4, 5];
        // exact expectation of a uniform single seed
        let values: Vec<f64> = cands
            .iter()
            .map(|&c| exact_f(&g, &system, &profile, &[c]).unwrap().1)
            .collect();
        let expect: f64 = values.iter().sum::<f64>() / values.len() as f64;
        let sd: f64 = (values
            .iter()
            .map(|v| (v - expect) * (v - expect))
            .sum::<f64>()
            / values.len() as f64)
            .sqrt();

        let trials = 1000;
        let mut mean = 0.0;
        for t in 0..trials {
            let draw = baseline_random(&cands, 1, t);
            mean += exact_f(&g, &system, &profile, &draw.seeds).unwrap().1;
        }
        mean /= f64::from(trials as u32);
        let tol = 3.0 * sd / f64::from(trials as u32).sqrt();
        assert!(
            (mean - expect).abs() <= tol,
            "mean {mean}, expect {expect}, tol {tol}"
        );
    }

    #[test]
    fn brute_force_handles_zero_budget_and_monotone_functions() {
        let mut h = |s: &[NodeId]| s.len() as f64;
        let res = brute_force_opt(&mut h, &[0, 1, 2, 3], 0).unwrap();
        assert!(res.seeds.is_empty());
        let res = brute_force_opt(&mut h, &[0, 1, 2, 3], 2).unwrap();
        assert_eq!(res.seeds.len(), 2);
        assert_eq!(res.objective_value, Some(2.0));
    }

    #[test]
    fn brute_force_dominates_greedy() {
        let (g, system, profile) = tiny_instance(PriorityKind::Random { seed: 31 });
        let cands: Vec<NodeId> = vec![1, 2, 3, 4, 5];
        let mut f = ExactObjective::new(&g, &system, &profile).unwrap();
        let res = greedy(&mut f, &cands, 2);
        let mut f2 = ExactObjective::new(&g, &system, &profile).unwrap();
        let opt = brute_force_opt(&mut f2, &cands, 2).unwrap();
        assert!(opt.objective_value.unwrap() >= res.objective_value.unwrap() - 1e-12);
    }

    #[test]
    fn brute_force_guards_capacity() {
        let cands: Vec<NodeId> = (0..200).collect();
        let mut h = |s: &[NodeId]| s.len() as f64;
        assert!(matches!(
            brute_force_opt(&mut h, &cands, 4),
            Err(Error::Capacity(_))
        ));
    }
}
