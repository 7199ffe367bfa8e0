//! The experiment pipeline: build the instance, seed the existing cascades
//! by single-node influence, run the requested methods over all budgets, and
//! evaluate every selected seed set with fresh replications.

use std::collections::BTreeMap;
use std::time::Instant;

use mc_core::cascade::{
    induce_lower_priority, induce_upper_priority, CascadeGroup, CascadeSystem, PriorityProfile,
};
use mc_core::estimate::{
    estimate, exact_f, single_node_influence, EstimatorConfig, ExactObjective,
    MonteCarloObjective,
};
use mc_core::graph::DirectedGraph;
use mc_core::solve::{
    baseline_high_weight, baseline_proximity, baseline_random, greedy, SolveResult,
};
use mc_core::{Error, NodeId};

use crate::config::{
    CandidateRule, CascadeLayout, EstimatorMode, ExperimentConfig, Method, SeedingRule,
};
use crate::error::{CliError, CliResult};
use crate::formats::resolve_nodes;
use crate::report::{fnv64_hex, ExperimentReport, ReportRow, RunMetadata};

/// Salt separating final-evaluation randomness from optimization-time
/// randomness.
const EVAL_SALT: u64 = 0x6576_616c;

fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for part in parts {
        for b in part.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

/// Assigns disjoint seed sets to the existing cascades (misinformation
/// cascades first, then positive ones) in decreasing order of estimated
/// single-node influence, and appends the unseeded star cascade.
pub fn seed_existing_cascades(
    graph: &DirectedGraph,
    layout: &CascadeLayout,
    influence_seed: u64,
) -> CliResult<CascadeSystem> {
    let existing = layout.misinformation + layout.positive;
    let needed = existing * layout.seed_size;
    if needed > graph.node_count() {
        return Err(Error::invalid(format!(
            "{existing} cascades of {} disjoint seeds need {needed} nodes, graph has {}",
            layout.seed_size,
            graph.node_count()
        ))
        .into());
    }

    let mut cascades: Vec<(CascadeGroup, Vec<NodeId>)> = Vec::with_capacity(existing + 1);
    match &layout.seeding {
        SeedingRule::Influence { replications } => {
            let influence = single_node_influence(graph, *replications, influence_seed);
            let mut ranked: Vec<NodeId> = (0..graph.node_count() as NodeId).collect();
            ranked.sort_by(|&a, &b| {
                influence[b as usize]
                    .partial_cmp(&influence[a as usize])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            for i in 0..existing {
                let group = if i < layout.misinformation {
                    CascadeGroup::Misinformation
                } else {
                    CascadeGroup::Positive
                };
                let block = &ranked[i * layout.seed_size..(i + 1) * layout.seed_size];
                cascades.push((group, block.to_vec()));
            }
        }
        SeedingRule::Explicit { seeds } => {
            for (i, ext_seeds) in seeds.iter().enumerate() {
                let group = if i < layout.misinformation {
                    CascadeGroup::Misinformation
                } else {
                    CascadeGroup::Positive
                };
                cascades.push((group, resolve_nodes(graph, ext_seeds)?));
            }
        }
    }
    cascades.push((CascadeGroup::Positive, Vec::new()));
    let star = existing as u32;
    Ok(CascadeSystem::new(cascades, star)?)
}

/// One evaluation of a seed set: mean objective pair with a standard error.
struct Evaluation {
    f_notm_mean: f64,
    f_notm_stderr: f64,
    rng_seed: u64,
}

struct Harness<'a> {
    graph: &'a DirectedGraph,
    system: &'a CascadeSystem,
    profile: &'a PriorityProfile,
    upper_profile: PriorityProfile,
    lower_profile: PriorityProfile,
    mode: EstimatorMode,
    r_opt: usize,
    r_eval: usize,
    base_seed: u64,
}

impl Harness<'_> {
    fn eval_with(
        &self,
        profile: &PriorityProfile,
        seeds: &[NodeId],
        replications: usize,
        base_seed: u64,
    ) -> CliResult<Evaluation> {
        match self.mode {
            EstimatorMode::MonteCarlo => {
                let est = estimate(
                    self.graph,
                    self.system,
                    profile,
                    seeds,
                    &EstimatorConfig::new(replications, base_seed),
                )?;
                Ok(Evaluation {
                    f_notm_mean: est.mean_not_m_active,
                    f_notm_stderr: est.std_error,
                    rng_seed: base_seed,
                })
            }
            EstimatorMode::Exact => {
                let (_, f_notm) = exact_f(self.graph, self.system, profile, seeds)?;
                Ok(Evaluation {
                    f_notm_mean: f_notm,
                    f_notm_stderr: 0.0,
                    rng_seed: 0,
                })
            }
        }
    }

    /// Final evaluation with fresh replications.
    fn eval_final(&self, profile: &PriorityProfile, seeds: &[NodeId]) -> CliResult<Evaluation> {
        self.eval_with(profile, seeds, self.r_eval, self.base_seed ^ EVAL_SALT)
    }

    /// Optimization-time value of `f`, on the same live graphs the greedy
    /// objectives used.
    fn opt_value(&self, seeds: &[NodeId]) -> CliResult<f64> {
        Ok(self
            .eval_with(self.profile, seeds, self.r_opt, self.base_seed)?
            .f_notm_mean)
    }

    fn greedy_trace(
        &self,
        profile: &PriorityProfile,
        candidates: &[NodeId],
        budget: usize,
    ) -> CliResult<SolveResult> {
        match self.mode {
            EstimatorMode::MonteCarlo => {
                let mut obj = MonteCarloObjective::new(
                    self.graph,
                    self.system,
                    profile,
                    self.r_opt,
                    self.base_seed,
                )?;
                Ok(greedy(&mut obj, candidates, budget))
            }
            EstimatorMode::Exact => {
                let mut obj = ExactObjective::new(self.graph, self.system, profile)?;
                Ok(greedy(&mut obj, candidates, budget))
            }
        }
    }
}

/// Objective values of every greedy prefix: index i is the value of the
/// first i chain nodes under the trace's own objective.
fn prefix_values(result: &SolveResult) -> Vec<f64> {
    let mut values = Vec::with_capacity(result.trace.len() + 1);
    match result.trace.first() {
        Some(first) => values.push(first.value - first.gain),
        None => values.push(result.objective_value.unwrap_or(0.0)),
    }
    for step in &result.trace {
        values.push(step.value);
    }
    values
}

/// Best prefix of the greedy chain within the given budget.
fn best_prefix_at(result: &SolveResult, values: &[f64], budget: usize) -> Vec<NodeId> {
    let upto = budget.min(values.len() - 1);
    let mut best = 0;
    for i in 1..=upto {
        if values[i] > values[best] {
            best = i;
        }
    }
    result.trace[..best].iter().map(|s| s.node).collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<ExperimentReport> {
    cfg.validate()?;
    let graph = cfg
        .graph
        .build()?
        .assign_probabilities(&cfg.probability_mode.to_mode())?;
    let system = seed_existing_cascades(&graph, &cfg.cascades, cfg.estimator.base_seed)?;
    let profile = mc_core::make_priority_profile(
        &cfg.priority.to_kind(system.cascade_count()),
        &system,
        graph.node_count(),
    )?;

    let candidates: Vec<NodeId> = match &cfg.candidate_rule {
        CandidateRule::All => (0..graph.node_count() as NodeId).collect(),
        CandidateRule::ExcludeSeeds => {
            let fixed = system.all_fixed_seeds();
            (0..graph.node_count() as NodeId)
                .filter(|v| fixed.binary_search(v).is_err())
                .collect()
        }
        CandidateRule::Explicit { nodes } => {
            let mut resolved = resolve_nodes(&graph, nodes)?;
            resolved.sort_unstable();
            resolved.dedup();
            resolved
        }
    };
    if candidates.is_empty() {
        return Err(CliError::config("candidate set is empty"));
    }

    let harness = Harness {
        graph: &graph,
        system: &system,
        profile: &profile,
        upper_profile: induce_upper_priority(&profile, &system),
        lower_profile: induce_lower_priority(&profile, &system),
        mode: cfg.estimator.mode,
        r_opt: cfg.estimator.r_opt,
        r_eval: cfg.estimator.r_eval,
        base_seed: cfg.estimator.base_seed,
    };

    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let k_max = *cfg.budgets.last().unwrap();

    // greedy chains shared between sandwich and the greedy_* methods
    let mut solve_ms: BTreeMap<String, u128> = BTreeMap::new();
    let needs_f = methods.contains(&Method::Sandwich) || methods.contains(&Method::GreedyF);
    let needs_upper =
        methods.contains(&Method::Sandwich) || methods.contains(&Method::GreedyUpper);
    let needs_lower =
        methods.contains(&Method::Sandwich) || methods.contains(&Method::GreedyLower);
    let mut trace_f = None;
    let mut trace_upper = None;
    let mut trace_lower = None;
    if needs_f {
        let t = Instant::now();
        trace_f = Some(harness.greedy_trace(&profile, &candidates, k_max)?);
        solve_ms.insert("greedy_f".into(), t.elapsed().as_millis());
    }
    if needs_upper {
        let t = Instant::now();
        trace_upper = Some(harness.greedy_trace(&harness.upper_profile, &candidates, k_max)?);
        solve_ms.insert("greedy_upper".into(), t.elapsed().as_millis());
    }
    if needs_lower {
        let t = Instant::now();
        trace_lower = Some(harness.greedy_trace(&harness.lower_profile, &candidates, k_max)?);
        solve_ms.insert("greedy_lower".into(), t.elapsed().as_millis());
    }
    let values_f = trace_f.as_ref().map(prefix_values);
    let values_upper = trace_upper.as_ref().map(prefix_values);
    let values_lower = trace_lower.as_ref().map(prefix_values);

    let n = graph.node_count() as f64;
    let random_eval_replications = (cfg.estimator.r_eval / 10).max(1);
    let mut rows: Vec<ReportRow> = Vec::new();

    for &method in &methods {
        for &budget in &cfg.budgets {
            let started = Instant::now();
            let mut bound_ratio = None;
            let (seeds, evaluation) = match method {
                Method::Sandwich => {
                    let upper_seeds = best_prefix_at(
                        trace_upper.as_ref().unwrap(),
                        values_upper.as_ref().unwrap(),
                        budget,
                    );
                    let lower_seeds = best_prefix_at(
                        trace_lower.as_ref().unwrap(),
                        values_lower.as_ref().unwrap(),
                        budget,
                    );
                    let base_seeds = best_prefix_at(
                        trace_f.as_ref().unwrap(),
                        values_f.as_ref().unwrap(),
                        budget,
                    );
                    // pick the best of the three under f, on the
                    // optimization-time live graphs
                    let mut chosen = upper_seeds.clone();
                    let mut chosen_value = harness.opt_value(&upper_seeds)?;
                    for other in [&lower_seeds, &base_seeds] {
                        let v = harness.opt_value(other)?;
                        if v > chosen_value {
                            chosen_value = v;
                            chosen = other.clone();
                        }
                    }
                    // certificate ratio from the final-evaluation streams;
                    // both sides share live graphs, so the ratio stays <= 1
                    let f_up = harness.eval_final(&profile, &upper_seeds)?;
                    let fbar_up = harness.eval_final(&harness.upper_profile, &upper_seeds)?;
                    if fbar_up.f_notm_mean > 0.0 {
                        bound_ratio = Some(f_up.f_notm_mean / fbar_up.f_notm_mean);
                    }
                    let eval = harness.eval_final(&profile, &chosen)?;
                    (chosen, eval)
                }
                Method::GreedyF => {
                    let seeds = best_prefix_at(
                        trace_f.as_ref().unwrap(),
                        values_f.as_ref().unwrap(),
                        budget,
                    );
                    let eval = harness.eval_final(&profile, &seeds)?;
                    (seeds, eval)
                }
                Method::GreedyUpper => {
                    let seeds = best_prefix_at(
                        trace_upper.as_ref().unwrap(),
                        values_upper.as_ref().unwrap(),
                        budget,
                    );
                    let eval = harness.eval_final(&profile, &seeds)?;
                    (seeds, eval)
                }
                Method::GreedyLower => {
                    let seeds = best_prefix_at(
                        trace_lower.as_ref().unwrap(),
                        values_lower.as_ref().unwrap(),
                        budget,
                    );
                    let eval = harness.eval_final(&profile, &seeds)?;
                    (seeds, eval)
                }
                Method::HighWeight => {
                    let seeds = baseline_high_weight(&graph, &candidates, budget).seeds;
                    let eval = harness.eval_final(&profile, &seeds)?;
                    (seeds, eval)
                }
                Method::Proximity => {
                    let seeds = baseline_proximity(&graph, &system, &candidates, budget).seeds;
                    let eval = harness.eval_final(&profile, &seeds)?;
                    (seeds, eval)
                }
                Method::Random => {
                    // mean over independent draws, each draw evaluated with
                    // a tenth of the final replication budget
                    let trials = cfg.random_trials;
                    let mut means = Vec::with_capacity(trials);
                    for t in 0..trials {
                        let draw_seed =
                            mix_seed(&[cfg.estimator.base_seed, budget as u64, t as u64]);
                        let draw = baseline_random(&candidates, budget, draw_seed);
                        let eval = harness.eval_with(
                            &profile,
                            &draw.seeds,
                            random_eval_replications,
                            draw_seed ^ EVAL_SALT,
                        )?;
                        means.push(eval.f_notm_mean);
                    }
                    let mean = means.iter().sum::<f64>() / trials as f64;
                    let var = if trials > 1 {
                        means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>()
                            / (trials as f64 - 1.0)
                    } else {
                        0.0
                    };
                    let eval = Evaluation {
                        f_notm_mean: mean,
                        f_notm_stderr: (var / trials as f64).sqrt(),
                        rng_seed: cfg.estimator.base_seed,
                    };
                    // representative draw for the seed column
                    let draw_seed = mix_seed(&[cfg.estimator.base_seed, budget as u64, 0]);
                    (baseline_random(&candidates, budget, draw_seed).seeds, eval)
                }
            };

            rows.push(ReportRow {
                method: method.name().to_string(),
                budget,
                f_m_mean: n - evaluation.f_notm_mean,
                f_m_stderr: evaluation.f_notm_stderr,
                f_notm_mean: evaluation.f_notm_mean,
                f_notm_stderr: evaluation.f_notm_stderr,
                bound_ratio,
                wall_ms: started.elapsed().as_millis(),
                rng_seed: evaluation.rng_seed,
                seeds: seeds.iter().map(|&v| graph.external_id(v)).collect(),
            });
        }
    }

    rows.sort_by(|a, b| a.method.cmp(&b.method).then(a.budget.cmp(&b.budget)));
    Ok(ExperimentReport {
        metadata: RunMetadata {
            config_hash: fnv64_hex(&cfg.canonical_json()),
            node_count: graph.node_count(),
            edge_count: graph.edge_count(),
            estimator_mode: match cfg.estimator.mode {
                EstimatorMode::MonteCarlo => "monte_carlo".into(),
                EstimatorMode::Exact => "exact".into(),
            },
            r_opt: cfg.estimator.r_opt,
            r_eval: cfg.estimator.r_eval,
            base_seed: cfg.estimator.base_seed,
            random_trials: cfg.random_trials,
            random_eval_replications,
            solve_ms,
        },
        config: Some(cfg.clone()),
        rows,
    })
}
