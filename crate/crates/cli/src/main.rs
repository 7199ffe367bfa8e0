use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mc_core::cascade::{
    induce_lower_priority, induce_upper_priority, CascadeSystem, PriorityProfile,
};
use mc_core::diffusion::{simulate, Randomness};
use mc_core::estimate::{
    estimate, exact_f, EstimatorConfig, ExactObjective, MonteCarloObjective,
};
use mc_core::graph::{DirectedGraph, ProbabilityMode};
use mc_core::hardness::{build_reduction, verify_reduction_identity, PspcInstance};
use mc_core::solve::{
    baseline_high_weight, baseline_proximity, baseline_random, greedy, sandwich,
};
use mc_core::{verify, Error, NodeId};

use mc_cli::config::{ExperimentConfig, Method};
use mc_cli::error::{CliError, CliResult};
use mc_cli::experiment::run_experiment;
use mc_cli::formats::{
    parse_cascade_spec, parse_id_list, parse_priority_spec, resolve_nodes,
};
use mc_cli::report;

#[derive(Parser)]
#[command(
    name = "mc-cli",
    about = "Multi-cascade diffusion simulation and misinformation-containment seed selection",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Instance inputs shared by simulate / estimate / solve.
#[derive(Args)]
struct InstanceArgs {
    /// Edge-list file: `u v [activity] [prob]` per line
    #[arg(long)]
    graph: PathBuf,
    /// Expand each input line into both arcs
    #[arg(long)]
    undirected: bool,
    /// Probability mode: uniform:P | weighted-cascade | activity:P_MAX:P_BASE | from-file
    #[arg(long, default_value = "from-file")]
    prob: String,
    /// Cascade spec file
    #[arg(long)]
    cascades: PathBuf,
    /// Priority spec file
    #[arg(long)]
    priority: PathBuf,
}

impl InstanceArgs {
    fn load(&self) -> CliResult<(DirectedGraph, CascadeSystem, PriorityProfile)> {
        let graph = mc_core::load_edge_list(&self.graph, !self.undirected)?
            .assign_probabilities(&parse_prob_mode(&self.prob)?)?;
        let cascade_text = std::fs::read_to_string(&self.cascades)?;
        let system = parse_cascade_spec(&cascade_text)?.into_system(&graph)?;
        let priority_text = std::fs::read_to_string(&self.priority)?;
        let profile = parse_priority_spec(&priority_text)?.build_profile(&graph, &system)?;
        Ok((graph, system, profile))
    }
}

fn parse_prob_mode(spec: &str) -> CliResult<ProbabilityMode> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| -> CliResult<f64> {
        s.parse()
            .map_err(|_| Error::invalid(format!("bad probability {s:?}")).into())
    };
    match parts.as_slice() {
        ["uniform", p] => Ok(ProbabilityMode::Uniform(parse(p)?)),
        ["weighted-cascade"] | ["wc"] => Ok(ProbabilityMode::WeightedCascade),
        ["activity", p_max, p_base] => Ok(ProbabilityMode::ActivityBased {
            p_max: parse(p_max)?,
            p_base: parse(p_base)?,
        }),
        ["from-file"] | ["file"] => Ok(ProbabilityMode::FromFile),
        _ => Err(CliError::config(format!(
            "unknown probability mode {spec:?}; expected uniform:P, weighted-cascade, \
             activity:P_MAX:P_BASE or from-file"
        ))),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one diffusion trace
    Simulate {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Seeds of the new cascade, comma separated input-file ids
        #[arg(long, default_value = "")]
        star_seeds: String,
        /// Seed for the live-edge sample
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the per-node activation table
        #[arg(long)]
        trace: bool,
    },
    /// Estimate the objective pair for a seed set
    Estimate {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value = "")]
        star_seeds: String,
        #[arg(long, default_value_t = 10_000)]
        replications: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        /// Per-replication evaluator: auto | sim | fast
        #[arg(long, default_value = "auto")]
        evaluator: String,
        /// Exact live-graph enumeration instead of Monte Carlo
        #[arg(long)]
        exact: bool,
    },
    /// Select a seed set with one method at one budget
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        budget: usize,
        /// Replications per objective call during optimization
        #[arg(long, default_value_t = 5000)]
        r_opt: usize,
        /// Replications for the final evaluation
        #[arg(long, default_value_t = 10_000)]
        r_eval: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        /// Exact objective instead of Monte Carlo (enumerable instances)
        #[arg(long)]
        exact: bool,
        /// Candidate set: all | exclude-seeds | comma-separated ids
        #[arg(long, default_value = "exclude-seeds")]
        candidates: String,
    },
    /// Run a full experiment sweep from a JSON config file
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Override the CSV output path
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Override the JSON output path
        #[arg(long)]
        json: Option<PathBuf>,
        /// Do not print the report table
        #[arg(long)]
        quiet: bool,
    },
    /// Build the containment instance of a ±PSC instance and check the
    /// activation-count identity
    Reduce {
        /// Instance file: header `|X| |Y| m`, then one subset per line
        #[arg(long)]
        instance: PathBuf,
        /// Selected subset indices, comma separated
        #[arg(long)]
        selection: Option<String>,
        /// Check every selection
        #[arg(long)]
        enumerate: bool,
        /// Write graph/cascade/priority files runnable by `simulate`
        #[arg(long)]
        emit_dir: Option<PathBuf>,
    },
    /// Run the verification suites
    Verify {
        /// all | oracle | monotone | bounds | reduction | greedy | estimator
        #[arg(long, default_value = "all")]
        suite: String,
        /// Instance count for the randomized suites
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, default_value_t = 0xC0FFEE)]
        seed: u64,
    },
}

fn cascade_label(system: &CascadeSystem, c: u32) -> String {
    if c == system.star() {
        return "P*".to_string();
    }
    let mut m_index = 0;
    let mut p_index = 0;
    for i in 0..=c {
        if system.is_misinformation(i) {
            m_index += 1;
        } else if i != system.star() {
            p_index += 1;
        }
        if i == c {
            break;
        }
    }
    if system.is_misinformation(c) {
        format!("M{m_index}")
    } else {
        format!("P{p_index}")
    }
}

fn cmd_simulate(
    instance: InstanceArgs,
    star_seeds: String,
    seed: u64,
    trace: bool,
) -> CliResult<()> {
    let (graph, system, profile) = instance.load()?;
    let star = resolve_nodes(&graph, &parse_id_list(&star_seeds)?)?;
    let out = simulate(&graph, &system, &profile, &star, Randomness::Seed(seed))?;
    if trace {
        println!("node state time");
        for v in 0..graph.node_count() {
            let state = match out.state[v] {
                Some(c) => cascade_label(&system, c),
                None => "-".to_string(),
            };
            let time = match out.activation_time[v] {
                Some(t) => t.to_string(),
                None => "-".to_string(),
            };
            println!("{} {state} {time}", graph.external_id(v as NodeId));
        }
    }
    println!("m_active = {}", out.m_active_count);
    println!("not_m_active = {}", out.not_m_active_count);
    Ok(())
}

fn cmd_estimate(
    instance: InstanceArgs,
    star_seeds: String,
    replications: usize,
    base_seed: u64,
    evaluator: String,
    exact: bool,
) -> CliResult<()> {
    let (graph, system, profile) = instance.load()?;
    let star = resolve_nodes(&graph, &parse_id_list(&star_seeds)?)?;
    if exact {
        let (f_m, f_not_m) = exact_f(&graph, &system, &profile, &star)?;
        println!("f_m = {f_m}");
        println!("f_not_m = {f_not_m}");
    } else {
        let kind = match evaluator.as_str() {
            "auto" => mc_core::EvaluatorKind::Auto,
            "sim" | "step-simulation" => mc_core::EvaluatorKind::StepSimulation,
            "fast" | "fast-bfs" => mc_core::EvaluatorKind::FastBfs,
            other => {
                return Err(CliError::config(format!(
                    "unknown evaluator {other:?}; expected auto, sim or fast"
                )))
            }
        };
        let est = estimate(
            &graph,
            &system,
            &profile,
            &star,
            &EstimatorConfig {
                replications,
                base_seed,
                ..Default::default()
            }
            .with_evaluator(kind),
        )?;
        println!("f_m = {} (stderr {})", est.mean_m_active, est.std_error);
        println!(
            "f_not_m = {} (stderr {})",
            est.mean_not_m_active, est.std_error
        );
        println!("replications = {}", est.replications);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    instance: InstanceArgs,
    method: Method,
    budget: usize,
    r_opt: usize,
    r_eval: usize,
    base_seed: u64,
    exact: bool,
    candidates: String,
) -> CliResult<()> {
    let (graph, system, profile) = instance.load()?;
    let cands: Vec<NodeId> = match candidates.as_str() {
        "all" => (0..graph.node_count() as NodeId).collect(),
        "exclude-seeds" => {
            let fixed = system.all_fixed_seeds();
            (0..graph.node_count() as NodeId)
                .filter(|v| fixed.binary_search(v).is_err())
                .collect()
        }
        list => resolve_nodes(&graph, &parse_id_list(list)?)?,
    };
    if cands.is_empty() {
        return Err(CliError::config("candidate set is empty"));
    }

    let upper_profile = induce_upper_priority(&profile, &system);
    let lower_profile = induce_lower_priority(&profile, &system);
    let run_greedy = |p: &PriorityProfile| -> CliResult<mc_core::SolveResult> {
        if exact {
            let mut obj = ExactObjective::new(&graph, &system, p)?;
            Ok(greedy(&mut obj, &cands, budget))
        } else {
            let mut obj = MonteCarloObjective::new(&graph, &system, p, r_opt, base_seed)?;
            Ok(greedy(&mut obj, &cands, budget))
        }
    };

    let mut bound_ratio = None;
    let result = match method {
        Method::Sandwich => {
            if exact {
                let mut f = ExactObjective::new(&graph, &system, &profile)?;
                let mut fu = ExactObjective::new(&graph, &system, &upper_profile)?;
                let mut fl = ExactObjective::new(&graph, &system, &lower_profile)?;
                let out = sandwich(&mut f, &mut fu, &mut fl, &cands, budget);
                bound_ratio = out.result.bound_ratio;
                out.result
            } else {
                let mut f = MonteCarloObjective::new(&graph, &system, &profile, r_opt, base_seed)?;
                let mut fu =
                    MonteCarloObjective::new(&graph, &system, &upper_profile, r_opt, base_seed)?;
                let mut fl =
                    MonteCarloObjective::new(&graph, &system, &lower_profile, r_opt, base_seed)?;
                let out = sandwich(&mut f, &mut fu, &mut fl, &cands, budget);
                bound_ratio = out.result.bound_ratio;
                out.result
            }
        }
        Method::GreedyF => run_greedy(&profile)?,
        Method::GreedyUpper => run_greedy(&upper_profile)?,
        Method::GreedyLower => run_greedy(&lower_profile)?,
        Method::HighWeight => baseline_high_weight(&graph, &cands, budget),
        Method::Proximity => baseline_proximity(&graph, &system, &cands, budget),
        Method::Random => baseline_random(&cands, budget, base_seed),
    };

    let ext_seeds: Vec<u64> = result.seeds.iter().map(|&v| graph.external_id(v)).collect();
    println!("method = {}", method.name());
    println!("budget = {budget}");
    println!("seeds = {ext_seeds:?}");
    for step in &result.trace {
        println!(
            "  pick {} gain {} value {}",
            graph.external_id(step.node),
            step.gain,
            step.value
        );
    }
    if exact {
        let (f_m, f_not_m) = exact_f(&graph, &system, &profile, &result.seeds)?;
        println!("f_m = {f_m}");
        println!("f_not_m = {f_not_m}");
    } else {
        let est = estimate(
            &graph,
            &system,
            &profile,
            &result.seeds,
            &EstimatorConfig::new(r_eval, base_seed ^ 0x6576_616c),
        )?;
        println!("f_m = {} (stderr {})", est.mean_m_active, est.std_error);
        println!(
            "f_not_m = {} (stderr {})",
            est.mean_not_m_active, est.std_error
        );
    }
    if let Some(ratio) = bound_ratio {
        println!("bound_ratio = {ratio}");
    }
    Ok(())
}

fn cmd_experiment(
    config: PathBuf,
    csv: Option<PathBuf>,
    json: Option<PathBuf>,
    quiet: bool,
) -> CliResult<()> {
    let mut cfg = ExperimentConfig::from_file(&config)?;
    if csv.is_some() {
        cfg.output.csv = csv;
    }
    if json.is_some() {
        cfg.output.json = json;
    }
    let report = run_experiment(&cfg)?;
    report::emit_report(&report, &cfg.output)?;
    if !quiet {
        print!("{}", report::csv_string(&report)?);
    }
    eprintln!(
        "experiment {} rows, config hash {}",
        report.rows.len(),
        report.metadata.config_hash
    );
    Ok(())
}

fn cmd_reduce(
    instance_path: PathBuf,
    selection: Option<String>,
    enumerate: bool,
    emit_dir: Option<PathBuf>,
) -> CliResult<()> {
    let text = std::fs::read_to_string(&instance_path)?;
    let instance = PspcInstance::parse(&text)?;
    let reduced = build_reduction(&instance)?;
    println!(
        "instance: |X| = {}, |Y| = {}, m = {}",
        instance.x_count(),
        instance.y_count(),
        instance.set_count()
    );
    println!(
        "reduced graph: {} nodes, {} edges, budget {}",
        reduced.graph.node_count(),
        reduced.graph.edge_count(),
        reduced.budget
    );
    println!(
        "candidates (subset nodes): {:?}",
        reduced.candidates
    );

    if let Some(dir) = emit_dir {
        std::fs::create_dir_all(&dir)?;
        let mut graph_text = String::from("# reduction graph; all edges certain\n");
        for e in 0..reduced.graph.edge_count() {
            let (u, v) = reduced.graph.edge_endpoints(e);
            graph_text.push_str(&format!("{u} {v} 1.0\n"));
        }
        std::fs::write(dir.join("graph.txt"), graph_text)?;

        let mut cascade_text = String::from("# reduction cascades\n");
        for c in 0..reduced.system.cascade_count() as u32 {
            let seeds: Vec<String> = reduced
                .system
                .seeds(c)
                .iter()
                .map(|s| s.to_string())
                .collect();
            let group = if reduced.system.is_misinformation(c) { "M" } else { "P" };
            cascade_text.push_str(&format!("cascade {c} {group} {}\n", seeds.join(" ")));
        }
        cascade_text.push_str(&format!("star {}\n", reduced.system.star()));
        std::fs::write(dir.join("cascades.txt"), cascade_text)?;

        let mut priority_text = String::from("mode explicit\n");
        for v in 0..reduced.graph.node_count() as NodeId {
            let ranks: Vec<String> = (0..reduced.system.cascade_count() as u32)
                .map(|c| reduced.profile.rank(v, c).to_string())
                .collect();
            priority_text.push_str(&format!("node {v} {}\n", ranks.join(" ")));
        }
        std::fs::write(dir.join("priority.txt"), priority_text)?;
        println!("emitted graph.txt, cascades.txt, priority.txt");
    }

    let mut selections: Vec<Vec<usize>> = Vec::new();
    if let Some(list) = selection {
        selections.push(
            parse_id_list(&list)?
                .into_iter()
                .map(|v| v as usize)
                .collect(),
        );
    }
    if enumerate {
        let m = instance.set_count();
        if m > 16 {
            return Err(Error::Capacity(format!(
                "enumerating 2^{m} selections is over the limit of 2^16"
            ))
            .into());
        }
        for mask in 0u32..1 << m {
            selections.push((0..m).filter(|&s| mask >> s & 1 == 1).collect());
        }
    }
    if selections.is_empty() {
        selections.push(Vec::new());
    }

    let mut all_ok = true;
    println!("selection f_m expected ok");
    for sel in &selections {
        let check = verify_reduction_identity(&instance, sel)?;
        all_ok &= check.ok;
        println!("{sel:?} {} {} {}", check.f_m, check.expected, check.ok);
    }
    if !all_ok {
        return Err(CliError::VerificationFailed(
            "reduction identity violated".into(),
        ));
    }
    // role legend for reading the emitted instance
    let mut roles: Vec<String> = Vec::new();
    for (v, role) in reduced.roles.iter().enumerate() {
        roles.push(format!("{v}:{role:?}"));
    }
    println!("roles: {}", roles.join(" "));
    Ok(())
}

fn cmd_verify(suite: String, instances: Option<usize>, seed: u64) -> CliResult<()> {
    let mut outcomes = Vec::new();
    let mut convergence = None;
    let run_all = suite == "all";
    if run_all || suite == "oracle" {
        outcomes.push(verify::oracle_equivalence(instances.unwrap_or(50), 12, seed));
    }
    if run_all || suite == "monotone" {
        outcomes.push(verify::monotone_submodular_special_classes(
            instances.unwrap_or(30),
            seed,
        ));
    }
    if run_all || suite == "bounds" {
        outcomes.push(verify::upper_lower_bounds(instances.unwrap_or(30), seed));
    }
    if run_all || suite == "reduction" {
        outcomes.push(verify::reduction_identity_exhaustive(2, 2, 3));
    }
    if run_all || suite == "greedy" {
        outcomes.push(verify::greedy_guarantee(instances.unwrap_or(24), seed));
    }
    if run_all || suite == "estimator" {
        let report = verify::estimator_convergence(instances.unwrap_or(20), 10_000, seed)?;
        println!(
            "estimator-convergence: {}/{} runs within 4 standard errors, \
             stderr ratio at 4x replications {:.3}",
            report.within_four_se,
            report.runs,
            report.se_ratio()
        );
        convergence = Some(report);
    }
    if outcomes.is_empty() && convergence.is_none() {
        return Err(CliError::config(format!("unknown suite {suite:?}")));
    }

    let mut failed = false;
    for outcome in &outcomes {
        println!("{outcome}");
        failed |= !outcome.passed();
    }
    if let Some(report) = &convergence {
        let ratio_ok = report.se_ratio() > 0.4 && report.se_ratio() < 0.6;
        let hits_ok = report.within_four_se * 100 >= report.runs * 99;
        failed |= !(ratio_ok && hits_ok);
    }
    if failed {
        return Err(CliError::VerificationFailed(
            "one or more suites reported violations".into(),
        ));
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            instance,
            star_seeds,
            seed,
            trace,
        } => cmd_simulate(instance, star_seeds, seed, trace),
        Command::Estimate {
            instance,
            star_seeds,
            replications,
            base_seed,
            evaluator,
            exact,
        } => cmd_estimate(instance, star_seeds, replications, base_seed, evaluator, exact),
        Command::Solve {
            instance,
            method,
            budget,
            r_opt,
            r_eval,
            base_seed,
            exact,
            candidates,
        } => cmd_solve(
            instance, method, budget, r_opt, r_eval, base_seed, exact, candidates,
        ),
        Command::Experiment {
            config,
            csv,
            json,
            quiet,
        } => cmd_experiment(config, csv, json, quiet),
        Command::Reduce {
            instance,
            selection,
            enumerate,
            emit_dir,
        } => cmd_reduce(instance, selection, enumerate, emit_dir),
        Command::Verify {
            suite,
            instances,
            seed,
        } => cmd_verify(suite, instances, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
