use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::genome::MorphLimits;
use crate::search::{AlgoConfig, AlgorithmKind, DiversityRecompute};
use crate::sim::SimConfig;
use crate::variation::VariationConfig;

use super::RunnerError;

/// Manifest keys that are accepted (and ignored) when a manifest is loaded
/// back as a config file.
const MANIFEST_KEYS: [&str; 5] = ["schema_version", "tool_version", "repetition", "run_seed", "total_evaluations"];

/// Experiment settings. Every field has a default; `init_size` and
/// `variation` default per algorithm when left unset.
///
/// ```toml
/// algorithm = "map_elites"   # ea | nsga2 | map_elites
/// seed = 0
/// repetitions = 30
/// generations = 500
/// batch_size = 200
/// # init_size = 1000         # ea/nsga2: 200, map_elites: 1000
/// tournament_size = 2
/// diversity_recompute = "per_pool"   # or "per_removal"
/// strict_budget = false
/// parallel = true
/// out = "runs"
///
/// [variation]                # ea: 0.2/0.2/0.2/0.05, nsga2: 0.05/0.1/0.2/0.1, map_elites: 0.2/0.2/0.1/0.1
/// p_morph = 0.2
/// p_cross = 0.2
/// p_ctrl = 0.1
/// sigma = 0.1
/// mutate_after_crossover = true
///
/// [limits]
/// eta = 20
/// delta = 4
///
/// [sim]
/// eval_time = 20.0
/// warmup = 2.0
/// dt = 0.05
/// contact_epsilon = 0.1
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmKind,
    pub seed: u64,
    pub repetitions: usize,
    pub generations: usize,
    pub batch_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_size: Option<usize>,
    pub tournament_size: usize,
    pub diversity_recompute: DiversityRecompute,
    /// Charge the initial population against the generation budget.
    pub strict_budget: bool,
    /// Evaluate batches on the thread pool. Never changes results.
    pub parallel: bool,
    pub out: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variation: Option<VariationConfig>,
    pub limits: MorphLimits,
    pub sim: SimConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algorithm: AlgorithmKind::MapElites,
            seed: 0,
            repetitions: 30,
            generations: 500,
            batch_size: 200,
            init_size: None,
            tournament_size: 2,
            diversity_recompute: DiversityRecompute::PerPool,
            strict_budget: false,
            parallel: true,
            out: PathBuf::from("runs"),
            variation: None,
            limits: MorphLimits::default(),
            sim: SimConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn for_algorithm(algorithm: AlgorithmKind) -> Self {
        ExperimentConfig { algorithm, ..Default::default() }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, RunnerError> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| RunnerError::Config(e.to_string()))?;
        for key in MANIFEST_KEYS {
            table.remove(key);
        }
        table.try_into().map_err(|e: toml::de::Error| RunnerError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunnerError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            RunnerError::Config(msg) => RunnerError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config always serializes")
    }

    pub fn init_size(&self) -> usize {
        self.init_size.unwrap_or_else(|| self.algorithm.default_init_size())
    }

    pub fn variation(&self) -> VariationConfig {
        self.variation.unwrap_or_else(|| self.algorithm.default_variation())
    }

    /// Generations actually run: in strict-budget mode the initial
    /// population is paid for with whole generations.
    pub fn effective_generations(&self) -> usize {
        if self.strict_budget {
            self.generations.saturating_sub(self.init_size().div_ceil(self.batch_size.max(1)))
        } else {
            self.generations
        }
    }

    /// Evaluations performed by one run.
    pub fn total_evaluations(&self) -> usize {
        self.init_size() + self.batch_size * self.effective_generations()
    }

    /// Fills every per-algorithm default so the config is self-describing.
    pub fn resolved(&self) -> Self {
        ExperimentConfig { init_size: Some(self.init_size()), variation: Some(self.variation()), ..self.clone() }
    }

    pub fn algo_config(&self) -> AlgoConfig {
        AlgoConfig {
            batch_size: self.batch_size,
            init_size: self.init_size(),
            tournament_size: self.tournament_size,
            variation: self.variation(),
            diversity_recompute: self.diversity_recompute,
        }
    }

    /// Checks every numeric field, naming the offending ones.
    pub fn validate(&self) -> Result<(), RunnerError> {
        let mut problems = Vec::new();
        for (name, value) in [
            ("repetitions", self.repetitions),
            ("generations", self.generations),
            ("batch_size", self.batch_size),
            ("init_size", self.init_size()),
            ("tournament_size", self.tournament_size),
        ] {
            if value == 0 {
                problems.push(format!("{name} must be positive"));
            }
        }
        if let Err(e) = self.variation().validate() {
            problems.push(e);
        }
        if let Err(e) = self.limits.validate() {
            problems.push(e);
        }
        if let Err(e) = self.sim.validate() {
            problems.push(e);
        }
        // Manifests are TOML, whose integers are signed 64-bit.
        if self.seed.saturating_add(self.repetitions as u64) > i64::MAX as u64 {
            problems.push("seed + repetitions must stay below 2^63".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(RunnerError::Config(problems.join("; ")))
        }
    }
}

/// Value grids for the pre-experiment parameter sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub p_morph: Vec<f64>,
    pub p_cross: Vec<f64>,
    pub p_ctrl: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            p_morph: vec![0.05, 0.1, 0.2],
            p_cross: vec![0.05, 0.1, 0.2],
            p_ctrl: vec![0.05, 0.1, 0.2],
            sigma: vec![0.01, 0.05, 0.1],
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), RunnerError> {
        for (name, grid) in [("p_morph", &self.p_morph), ("p_cross", &self.p_cross), ("p_ctrl", &self.p_ctrl), ("sigma", &self.sigma)] {
            if grid.is_empty() {
                return Err(RunnerError::Config(format!("sweep grid `{name}` is empty")));
            }
            if let Some(v) = grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(RunnerError::Config(format!("sweep grid `{name}` value {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Every grid combination, `p_morph` varying slowest.
    pub fn combinations(&self) -> Vec<VariationConfig> {
        let mut out = Vec::new();
        for &pm in &self.p_morph {
            for &pc in &self.p_cross {
                for &pk in &self.p_ctrl {
                    for &s in &self.sigma {
                        out.push(VariationConfig::new(pm, pc, pk, s));
                    }
                }
            }
        }
        out
    }
}
