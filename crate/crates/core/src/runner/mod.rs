//! Experiment orchestration: repetitions, the parameter sweep, replay, and
//! every file the tool writes.

mod config;
pub mod io;

pub use config::{ExperimentConfig, SweepSpec};

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::genome::{Descriptor, Genome, GenomeParseError, MorphLimits};
use crate::metrics::{GenerationStats, Projection, Recorder};
use crate::search::{build_algorithm, AlgorithmKind, Evaluator, SearchContext};
use crate::sim::{build_phenotype, simulate_traced, SimConfig, SimResult};
use crate::variation::VariationConfig;

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Genome { path: PathBuf, source: GenomeParseError },
}

impl RunnerError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        RunnerError::Io { path: path.to_path_buf(), source }
    }
}

/// Everything one repetition produces.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub seed: u64,
    pub stats: Vec<GenerationStats>,
    pub projection: Projection,
}

impl RunOutcome {
    pub fn final_stats(&self) -> &GenerationStats {
        self.stats.last().expect("a run records at least generation 0")
    }
}

/// Runs one repetition in memory.
pub fn run_single(cfg: &ExperimentConfig, seed: u64) -> RunOutcome {
    let mut evaluator = Evaluator::new(cfg.limits, cfg.sim);
    evaluator.parallel = cfg.parallel;
    let mut ctx = SearchContext::new(evaluator, seed);
    let mut algorithm = build_algorithm(cfg.algorithm, cfg.algo_config(), cfg.limits);
    let mut recorder = Recorder::new(cfg.limits.eta);

    let generations = cfg.effective_generations();
    let mut stats = Vec::with_capacity(generations + 1);
    let initial = algorithm.initialize(&mut ctx);
    stats.push(recorder.record_generation(&initial, &algorithm.population_descriptors()));
    for _ in 0..generations {
        let offspring = algorithm.step(&mut ctx);
        stats.push(recorder.record_generation(&offspring, &algorithm.population_descriptors()));
    }
    RunOutcome { seed, stats, projection: recorder.projection().clone() }
}

pub fn repetition_dir(out: &Path, algorithm: AlgorithmKind, repetition: usize) -> PathBuf {
    out.join(algorithm.as_str()).join(format!("rep_{repetition:02}"))
}

fn prepare_dir(dir: &Path) -> Result<(), RunnerError> {
    std::fs::create_dir_all(dir).map_err(|e| RunnerError::io(dir, e))?;
    let probe = dir.join(".write_probe");
    std::fs::write(&probe, b"").map_err(|e| RunnerError::io(dir, e))?;
    std::fs::remove_file(&probe).map_err(|e| RunnerError::io(&probe, e))
}

/// Summary of one written repetition.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub repetition: usize,
    pub seed: u64,
    pub dir: PathBuf,
    pub final_stats: GenerationStats,
}

/// Runs every repetition (seeds `seed`, `seed + 1`, ...) and writes
/// `stats.csv`, `archive.csv`, `histogram.csv` and `manifest.toml` under
/// `<out>/<algorithm>/rep_NN/`.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<RunSummary>, RunnerError> {
    cfg.validate()?;
    let dirs: Vec<PathBuf> = (0..cfg.repetitions).map(|r| repetition_dir(&cfg.out, cfg.algorithm, r)).collect();
    for dir in &dirs {
        prepare_dir(dir)?;
    }
    dirs.into_par_iter()
        .enumerate()
        .map(|(repetition, dir)| {
            let seed = cfg.seed + repetition as u64;
            let outcome = run_single(cfg, seed);
            write_outcome(&dir, cfg, repetition, &outcome)?;
            Ok(RunSummary { repetition, seed, dir, final_stats: outcome.final_stats().clone() })
        })
        .collect()
}

pub fn write_outcome(dir: &Path, cfg: &ExperimentConfig, repetition: usize, outcome: &RunOutcome) -> Result<(), RunnerError> {
    io::write_stats(&dir.join("stats.csv"), &outcome.stats)?;
    io::write_histogram(&dir.join("histogram.csv"), &outcome.stats)?;
    io::write_archive(&dir.join("archive.csv"), outcome.projection.archive())?;
    io::write_manifest(&dir.join("manifest.toml"), cfg, repetition, outcome.seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry {
    pub algorithm: AlgorithmKind,
    /// 1 is best within the algorithm.
    pub rank: usize,
    pub variation: VariationConfig,
    pub median_max_fitness: f64,
    pub final_max_fitness: Vec<f64>,
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => v[n / 2],
        _ => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}

/// Evaluates every grid combination for each algorithm over the same seed
/// list and ranks combinations by median final max-fitness.
pub fn sweep(
    base: &ExperimentConfig,
    spec: &SweepSpec,
    algorithms: &[AlgorithmKind],
    repetitions: usize,
) -> Result<Vec<SweepEntry>, RunnerError> {
    spec.validate()?;
    if repetitions == 0 {
        return Err(RunnerError::Config("sweep repetitions must be positive".into()));
    }
    let mut entries = Vec::new();
    for &algorithm in algorithms {
        let jobs: Vec<(VariationConfig, u64)> = spec
            .combinations()
            .into_iter()
            .flat_map(|v| (0..repetitions as u64).map(move |r| (v, base.seed + r)))
            .collect();
        let configs: Vec<ExperimentConfig> = jobs
            .iter()
            .map(|(v, _)| ExperimentConfig {
                algorithm,
                variation: Some(VariationConfig { mutate_after_crossover: base.variation().mutate_after_crossover, ..*v }),
                ..base.clone()
            })
            .collect();
        for c in &configs {
            c.validate()?;
        }
        let finals: Vec<f64> = configs
            .par_iter()
            .zip(&jobs)
            .map(|(c, (_, seed))| run_single(c, *seed).final_stats().max_fitness)
            .collect();
        let mut group: Vec<SweepEntry> = finals
            .chunks(repetitions)
            .zip(spec.combinations())
            .map(|(f, variation)| SweepEntry {
                algorithm,
                rank: 0,
                variation,
                median_max_fitness: median(f),
                final_max_fitness: f.to_vec(),
            })
            .collect();
        // Stable: equal medians keep grid order.
        group.sort_by(|a, b| b.median_max_fitness.total_cmp(&a.median_max_fitness));
        for (i, e) in group.iter_mut().enumerate() {
            e.rank = i + 1;
        }
        entries.extend(group);
    }
    Ok(entries)
}

/// Writes `sweep_ranking.csv` (all combinations) and `sweep_best.csv`
/// (rank-1 combination per algorithm).
pub fn write_sweep(out: &Path, entries: &[SweepEntry]) -> Result<(), RunnerError> {
    prepare_dir(out)?;
    let header = ["algorithm", "rank", "p_morph", "p_cross", "p_ctrl", "sigma", "median_max_fitness"];
    for (name, filter) in [("sweep_ranking.csv", false), ("sweep_best.csv", true)] {
        let path = out.join(name);
        let file = std::fs::File::create(&path).map_err(|e| RunnerError::io(&path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let err = |e: csv::Error| RunnerError::Csv { path: path.clone(), message: e.to_string() };
        w.write_record(header).map_err(err)?;
        for e in entries.iter().filter(|e| !filter || e.rank == 1) {
            let v = &e.variation;
            w.write_record([
                e.algorithm.to_string(),
                e.rank.to_string(),
                v.p_morph.to_string(),
                v.p_cross.to_string(),
                v.p_ctrl.to_string(),
                v.sigma.to_string(),
                e.median_max_fitness.to_string(),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| RunnerError::io(&path, e))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Replay {
    pub descriptor: Descriptor,
    pub result: SimResult,
}

/// Re-simulates one genome, recording the root trajectory.
pub fn replay(genome: &Genome, limits: &MorphLimits, sim: &SimConfig) -> Replay {
    let phenotype = build_phenotype(genome, limits);
    Replay { descriptor: phenotype.descriptor, result: simulate_traced(&phenotype, sim) }
}

pub fn load_genome(path: &Path) -> Result<Genome, RunnerError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunnerError::io(path, e))?;
    Genome::from_text(text.trim()).map_err(|source| RunnerError::Genome { path: path.to_path_buf(), source })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplayCheck {
    pub descriptor: Descriptor,
    pub recorded: f64,
    pub replayed: f64,
    pub replayed_descriptor: Descriptor,
}

impl ReplayCheck {
    pub fn matches(&self) -> bool {
        self.recorded.to_bits() == self.replayed.to_bits() && self.descriptor == self.replayed_descriptor
    }
}

/// Re-evaluates every elite of an archive dump.
pub fn verify_archive(path: &Path, limits: &MorphLimits, sim: &SimConfig) -> Result<Vec<ReplayCheck>, RunnerError> {
    let rows = io::read_archive(path)?;
    Ok(rows
        .par_iter()
        .map(|row| {
            let e = crate::sim::evaluate(&row.genome, limits, sim);
            ReplayCheck {
                descriptor: row.descriptor,
                recorded: row.fitness,
                replayed: e.fitness,
                replayed_descriptor: e.descriptor,
            }
        })
        .collect())
}
