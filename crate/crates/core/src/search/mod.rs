//! The three search strategies behind one [`SearchAlgorithm`] interface.

mod archive;
mod ea;
mod map_elites;
pub mod nsga2;

pub use archive::{Archive, ArchiveError};
pub use ea::Ea;
pub use map_elites::MapElites;
pub use nsga2::{crowding_distance, diversity_objectives, dominates, nondominated_sort, Nsga2};

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::genome::{Descriptor, Genome, MorphLimits};
use crate::sim::{evaluate, Evaluation, SimConfig};
use crate::variation::VariationConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    pub fitness: f64,
    pub descriptor: Descriptor,
    /// Mean morphological distance to the current pool (NSGA-II only).
    pub diversity: [f64; 2],
    /// Pareto front index, 0 for the first front (NSGA-II only).
    pub rank: usize,
    pub crowding: f64,
}

impl Individual {
    pub fn new(genome: Genome, evaluation: Evaluation) -> Self {
        Individual {
            genome,
            fitness: evaluation.fitness,
            descriptor: evaluation.descriptor,
            diversity: [0.0; 2],
            rank: 0,
            crowding: 0.0,
        }
    }

    /// NSGA-II objective vector, all maximized.
    pub fn objectives(&self) -> [f64; 3] {
        [self.fitness, self.diversity[0], self.diversity[1]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Ea,
    Nsga2,
    MapElites,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 3] = [AlgorithmKind::Ea, AlgorithmKind::Nsga2, AlgorithmKind::MapElites];

    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmKind::Ea => "ea",
            AlgorithmKind::Nsga2 => "nsga2",
            AlgorithmKind::MapElites => "map_elites",
        }
    }

    /// Tuned variation rates per algorithm.
    pub fn default_variation(self) -> VariationConfig {
        match self {
            AlgorithmKind::Ea => VariationConfig::new(0.2, 0.2, 0.2, 0.05),
            AlgorithmKind::Nsga2 => VariationConfig::new(0.05, 0.1, 0.2, 0.1),
            AlgorithmKind::MapElites => VariationConfig::new(0.2, 0.2, 0.1, 0.1),
        }
    }

    pub fn default_init_size(self) -> usize {
        match self {
            AlgorithmKind::Ea | AlgorithmKind::Nsga2 => 200,
            AlgorithmKind::MapElites => 1000,
        }
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ea" => Ok(AlgorithmKind::Ea),
            "nsga2" => Ok(AlgorithmKind::Nsga2),
            "map_elites" => Ok(AlgorithmKind::MapElites),
            other => Err(format!("unknown algorithm `{other}` (expected ea, nsga2 or map_elites)")),
        }
    }
}

/// When NSGA-II recomputes its diversity objectives during survivor selection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversityRecompute {
    /// Once over the merged pool and once over the survivors.
    #[default]
    PerPool,
    /// After every single removal while truncating the merged pool.
    PerRemoval,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlgoConfig {
    pub batch_size: usize,
    pub init_size: usize,
    pub tournament_size: usize,
    pub variation: VariationConfig,
    pub diversity_recompute: DiversityRecompute,
}

impl AlgoConfig {
    pub fn defaults_for(kind: AlgorithmKind) -> Self {
        AlgoConfig {
            batch_size: 200,
            init_size: kind.default_init_size(),
            tournament_size: 2,
            variation: kind.default_variation(),
            diversity_recompute: DiversityRecompute::PerPool,
        }
    }
}

/// Independent random streams of one run, split by purpose so that extra
/// draws in one concern never shift another.
pub struct Streams {
    pub init: ChaCha8Rng,
    pub selection: ChaCha8Rng,
    pub variation: ChaCha8Rng,
}

impl Streams {
    pub fn from_seed(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id);
            rng
        };
        Streams { init: stream(1), selection: stream(2), variation: stream(3) }
    }
}

/// Batch fitness evaluation. Results always come back in submission order,
/// whether or not the batch is evaluated in parallel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluator {
    pub limits: MorphLimits,
    pub sim: SimConfig,
    pub parallel: bool,
}

impl Evaluator {
    pub fn new(limits: MorphLimits, sim: SimConfig) -> Self {
        Evaluator { limits, sim, parallel: true }
    }

    pub fn evaluate(&self, genome: &Genome) -> Evaluation {
        evaluate(genome, &self.limits, &self.sim)
    }

    pub fn evaluate_all(&self, genomes: Vec<Genome>) -> Vec<Individual> {
        if self.parallel {
            genomes
                .into_par_iter()
                .map(|g| {
                    let e = self.evaluate(&g);
                    Individual::new(g, e)
                })
                .collect()
        } else {
            genomes
                .into_iter()
                .map(|g| {
                    let e = self.evaluate(&g);
                    Individual::new(g, e)
                })
                .collect()
        }
    }
}

pub struct SearchContext {
    pub evaluator: Evaluator,
    pub streams: Streams,
}

impl SearchContext {
    pub fn new(evaluator: Evaluator, seed: u64) -> Self {
        SearchContext { evaluator, streams: Streams::from_seed(seed) }
    }
}

pub trait SearchAlgorithm: Send {
    fn kind(&self) -> AlgorithmKind;

    /// Creates and evaluates the initial population. Returns every newly
    /// evaluated individual in evaluation order.
    fn initialize(&mut self, ctx: &mut SearchContext) -> Vec<Individual>;

    /// Runs one generation. Returns the newly evaluated offspring.
    fn step(&mut self, ctx: &mut SearchContext) -> Vec<Individual>;

    /// Descriptors of the current population (the archive for MAP-Elites).
    fn population_descriptors(&self) -> Vec<Descriptor>;
}

pub fn build_algorithm(kind: AlgorithmKind, cfg: AlgoConfig, limits: MorphLimits) -> Box<dyn SearchAlgorithm> {
    match kind {
        AlgorithmKind::Ea => Box::new(Ea::new(cfg, limits)),
        AlgorithmKind::Nsga2 => Box::new(Nsga2::new(cfg, limits)),
        AlgorithmKind::MapElites => Box::new(MapElites::new(cfg, limits)),
    }
}

/// Tournament over `n` candidates: draws `size` contestants with
/// replacement and returns the best under `cmp` (greater wins); ties are
/// broken uniformly among the tied contestants.
pub fn tournament<R: Rng + ?Sized>(
    n: usize,
    size: usize,
    rng: &mut R,
    cmp: impl Fn(usize, usize) -> Ordering,
) -> usize {
    let contestants: Vec<usize> = (0..size.max(1)).map(|_| rng.random_range(0..n)).collect();
    let mut best = vec![contestants[0]];
    for &c in &contestants[1..] {
        match cmp(c, best[0]) {
            Ordering::Greater => best = vec![c],
            Ordering::Equal => best.push(c),
            Ordering::Less => {}
        }
    }
    if best.len() == 1 {
        best[0]
    } else {
        best[rng.random_range(0..best.len())]
    }
}

pub(crate) fn random_population<R: Rng + ?Sized>(n: usize, limits: &MorphLimits, rng: &mut R) -> Vec<Genome> {
    (0..n).map(|_| crate::genome::random_genome(rng, limits)).collect()
}
