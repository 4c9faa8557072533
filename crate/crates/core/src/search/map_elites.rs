use rand::Rng;

use crate::genome::{Descriptor, MorphLimits};
use crate::variation::vary_population;

use super::{random_population, AlgoConfig, AlgorithmKind, Archive, Individual, SearchAlgorithm, SearchContext};

/// MAP-Elites over the `(bricks, servos)` grid with uniform parent
/// selection (with replacement) from occupied cells.
pub struct MapElites {
    cfg: AlgoConfig,
    limits: MorphLimits,
    archive: Archive,
}

impl MapElites {
    pub fn new(cfg: AlgoConfig, limits: MorphLimits) -> Self {
        MapElites { cfg, limits, archive: Archive::new(limits.eta) }
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    fn insert_all(&mut self, batch: &[Individual]) {
        for ind in batch {
            self.archive
                .insert(ind.clone())
                .expect("phenotype descriptors always fit the grid");
        }
    }
}

impl SearchAlgorithm for MapElites {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::MapElites
    }

    fn initialize(&mut self, ctx: &mut SearchContext) -> Vec<Individual> {
        let genomes = random_population(self.cfg.init_size, &self.limits, &mut ctx.streams.init);
        let evaluated = ctx.evaluator.evaluate_all(genomes);
        self.insert_all(&evaluated);
        evaluated
    }

    fn step(&mut self, ctx: &mut SearchContext) -> Vec<Individual> {
        let elites: Vec<_> = self.archive.iter().map(|i| &i.genome).collect();
        assert!(!elites.is_empty(), "MAP-Elites needs a seeded archive");
        let parents: Vec<_> = (0..self.cfg.batch_size)
            .map(|_| elites[ctx.streams.selection.random_range(0..elites.len())])
            .collect();
        let offspring = vary_population(&parents, &self.cfg.variation, &mut ctx.streams.variation);
        let evaluated = ctx.evaluator.evaluate_all(offspring);
        self.insert_all(&evaluated);
        evaluated
    }

    fn population_descriptors(&self) -> Vec<Descriptor> {
        self.archive.iter().map(|i| i.descriptor).collect()
    }
}
