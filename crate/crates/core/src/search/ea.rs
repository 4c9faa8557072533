use crate::genome::{Descriptor, MorphLimits};
use crate::variation::vary_population;

use super::{random_population, tournament, AlgoConfig, AlgorithmKind, Individual, SearchAlgorithm, SearchContext};

/// Generational single-objective EA: tournament selection on fitness and
/// full replacement of the population by the offspring (no elitism).
pub struct Ea {
    cfg: AlgoConfig,
    limits: MorphLimits,
    population: Vec<Individual>,
}

impl Ea {
    pub fn new(cfg: AlgoConfig, limits: MorphLimits) -> Self {
        Ea { cfg, limits, population: Vec::new() }
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }
}

impl SearchAlgorithm for Ea {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::Ea
    }

    fn initialize(&mut self, ctx: &mut SearchContext) -> Vec<Individual> {
        let genomes = random_population(self.cfg.init_size, &self.limits, &mut ctx.streams.init);
        self.population = ctx.evaluator.evaluate_all(genomes);
        self.population.clone()
    }

    fn step(&mut self, ctx: &mut SearchContext) -> Vec<Individual> {
        let pop = &self.population;
        let parents: Vec<_> = (0..self.cfg.batch_size)
            .map(|_| {
                let i = tournament(pop.len(), self.cfg.tournament_size, &mut ctx.streams.selection, |a, b| {
                    pop[a].fitness.total_cmp(&pop[b].fitness)
                });
                &pop[i].genome
            })
            .collect();
        let offspring = vary_population(&parents, &self.cfg.variation, &mut ctx.streams.variation);
        self.population = ctx.evaluator.evaluate_all(offspring);
        self.population.clone()
    }

    fn population_descriptors(&self) -> Vec<Descriptor> {
        self.population.iter().map(|i| i.descriptor).collect()
    }
}
