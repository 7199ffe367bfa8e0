//! Experiment configuration: a JSON file describing the instance, the
//! estimator budgets, the methods to run and the output paths.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mc_core::graph::{DirectedGraph, ProbabilityMode};
use mc_core::synth;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    /// Edge-list file; `directed = false` expands each line into both arcs.
    File {
        path: PathBuf,
        #[serde(default = "default_true")]
        directed: bool,
    },
    ErdosRenyi {
        nodes: usize,
        edge_prob: f64,
        seed: u64,
    },
    PreferentialAttachment {
        nodes: usize,
        edges_per_node: usize,
        seed: u64,
    },
}

fn default_true() -> bool {
    true
}

impl GraphSource {
    pub fn build(&self) -> CliResult<DirectedGraph> {
        Ok(match self {
            GraphSource::File { path, directed } => mc_core::load_edge_list(path, *directed)?,
            GraphSource::ErdosRenyi {
                nodes,
                edge_prob,
                seed,
            } => synth::erdos_renyi(*nodes, *edge_prob, *seed),
            GraphSource::PreferentialAttachment {
                nodes,
                edges_per_node,
                seed,
            } => synth::preferential_attachment(*nodes, *edges_per_node, *seed),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbabilityModeConfig {
    Uniform { p: f64 },
    WeightedCascade,
    ActivityBased { p_max: f64, p_base: f64 },
    FromFile,
}

impl ProbabilityModeConfig {
    pub fn to_mode(&self) -> ProbabilityMode {
        match *self {
            ProbabilityModeConfig::Uniform { p } => ProbabilityMode::Uniform(p),
            ProbabilityModeConfig::WeightedCascade => ProbabilityMode::WeightedCascade,
            ProbabilityModeConfig::ActivityBased { p_max, p_base } => {
                ProbabilityMode::ActivityBased { p_max, p_base }
            }
            ProbabilityModeConfig::FromFile => ProbabilityMode::FromFile,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SeedingRule {
    /// Rank nodes by estimated single-node influence and hand out disjoint
    /// seed sets in rank order, misinformation cascades first.
    Influence {
        #[serde(default = "default_influence_replications")]
        replications: usize,
    },
    /// Fixed seed lists, misinformation cascades first, in input-file ids.
    Explicit { seeds: Vec<Vec<u64>> },
}

fn default_influence_replications() -> usize {
    1000
}

impl Default for SeedingRule {
    fn default() -> Self {
        SeedingRule::Influence {
            replications: default_influence_replications(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeLayout {
    pub misinformation: usize,
    pub positive: usize,
    pub seed_size: usize,
    #[serde(default)]
    pub seeding: SeedingRule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub struct PriorityConfig {
    pub mode: PriorityMode,
    #[serde(default)]
    pub seed: u64,
    /// Global cascade order (lowest priority first) for the non-random
    /// modes; defaults to cascade-id order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorityMode {
    Random,
    Homogeneous,
    MDominant,
    PDominant,
}

impl PriorityConfig {
    pub fn to_kind(&self, cascade_count: usize) -> mc_core::PriorityKind {
        let order = self
            .order
            .clone()
            .unwrap_or_else(|| mc_core::PriorityKind::identity_order(cascade_count));
        match self.mode {
            PriorityMode::Random => mc_core::PriorityKind::Random { seed: self.seed },
            PriorityMode::Homogeneous => mc_core::PriorityKind::Homogeneous { order },
            PriorityMode::MDominant => mc_core::PriorityKind::MDominant { order },
            PriorityMode::PDominant => mc_core::PriorityKind::PDominant { order },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CandidateRule {
    All,
    #[default]
    ExcludeSeeds,
    Explicit {
        nodes: Vec<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorMode {
    MonteCarlo,
    /// Exact live-graph enumeration; only viable on enumerable instances.
    Exact,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSettings {
    #[serde(default = "default_estimator_mode")]
    pub mode: EstimatorMode,
    #[serde(default = "default_r_opt")]
    pub r_opt: usize,
    #[serde(default = "default_r_eval")]
    pub r_eval: usize,
    #[serde(default)]
    pub base_seed: u64,
}

fn default_estimator_mode() -> EstimatorMode {
    EstimatorMode::MonteCarlo
}

fn default_r_opt() -> usize {
    5000
}

fn default_r_eval() -> usize {
    10_000
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        EstimatorSettings {
            mode: default_estimator_mode(),
            r_opt: default_r_opt(),
            r_eval: default_r_eval(),
            base_seed: 0,
        }
    }
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sandwich,
    GreedyF,
    GreedyUpper,
    GreedyLower,
    HighWeight,
    Proximity,
    Random,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Sandwich => "sandwich",
            Method::GreedyF => "greedy_f",
            Method::GreedyUpper => "greedy_upper",
            Method::GreedyLower => "greedy_lower",
            Method::HighWeight => "high_weight",
            Method::Proximity => "proximity",
            Method::Random => "random",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub probability_mode: ProbabilityModeConfig,
    pub cascades: CascadeLayout,
    pub priority: PriorityConfig,
    pub budgets: Vec<usize>,
    #[serde(default)]
    pub candidate_rule: CandidateRule,
    #[serde(default)]
    pub estimator: EstimatorSettings,
    pub methods: Vec<Method>,
    #[serde(default = "default_random_trials")]
    pub random_trials: usize,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_random_trials() -> usize {
    1000
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(mc_core::Error::Io)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.budgets.is_empty() {
            return Err(CliError::config("budgets must not be empty"));
        }
        if self.budgets[0] == 0 || self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::config(
                "budgets must be strictly increasing positive integers",
            ));
        }
        if self.cascades.seed_size == 0 {
            return Err(CliError::config("cascade seed_size must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(CliError::config("methods must not be empty"));
        }
        if let SeedingRule::Explicit { seeds } = &self.cascades.seeding {
            if seeds.len() != self.cascades.misinformation + self.cascades.positive {
                return Err(CliError::config(
                    "explicit seeding must list one seed set per existing cascade",
                ));
            }
        }
        if self.estimator.r_opt == 0 || self.estimator.r_eval == 0 {
            return Err(CliError::config("estimator replication counts must be positive"));
        }
        if self.random_trials == 0 {
            return Err(CliError::config("random_trials must be positive"));
        }
        Ok(())
    }

    /// Canonical JSON used for the report's config hash.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
