//! Run-wide projection onto the descriptor grid and the per-generation
//! statistics derived from it.

use std::collections::BTreeMap;

use crate::genome::Descriptor;
use crate::search::{Archive, Individual};

/// Sum of elite fitness over occupied cells.
pub fn qd_score(archive: &Archive) -> f64 {
    archive.iter().map(|i| i.fitness).sum()
}

/// Occupied cells over reachable cells (`m >= 1`, `m + j <= eta`).
pub fn coverage(archive: &Archive) -> f64 {
    archive.len() as f64 / archive.feasible_cells() as f64
}

/// Cumulative repertoire of every individual evaluated during a run,
/// independent of what the algorithm itself keeps.
#[derive(Clone, Debug)]
pub struct Projection {
    archive: Archive,
}

impl Projection {
    pub fn new(eta: usize) -> Self {
        Projection { archive: Archive::new(eta) }
    }

    pub fn observe<'a>(&mut self, batch: impl IntoIterator<Item = &'a Individual>) {
        for ind in batch {
            self.archive
                .insert(ind.clone())
                .expect("phenotype descriptors always fit the grid");
        }
    }

    pub fn archive(&self) -> &Archive {
        &self.archive
    }

    pub fn qd_score(&self) -> f64 {
        qd_score(&self.archive)
    }

    pub fn coverage(&self) -> f64 {
        coverage(&self.archive)
    }

    pub fn max_fitness(&self) -> f64 {
        self.archive.iter().map(|i| i.fitness).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HistogramBin {
    pub total_modules: usize,
    pub bricks: usize,
    pub joints: usize,
    pub count: usize,
}

/// Morphology counts keyed by `(total, bricks, joints)`, ascending.
pub fn module_histogram(descriptors: &[Descriptor]) -> Vec<HistogramBin> {
    let mut counts: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for d in descriptors {
        *counts.entry((d.total(), d.m, d.j)).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|((total_modules, bricks, joints), count)| HistogramBin { total_modules, bricks, joints, count })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub evaluations: usize,
    /// Best fitness seen so far in the run.
    pub max_fitness: f64,
    pub qd_score: f64,
    pub coverage: f64,
    pub histogram: Vec<HistogramBin>,
}

/// Feeds every evaluated individual into the projection and emits one
/// stats row per generation.
#[derive(Clone, Debug)]
pub struct Recorder {
    projection: Projection,
    evaluations: usize,
    generation: Option<usize>,
}

impl Recorder {
    pub fn new(eta: usize) -> Self {
        Recorder { projection: Projection::new(eta), evaluations: 0, generation: None }
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    /// `evaluated` are this generation's new evaluations; `population` the
    /// descriptors the histogram is taken over.
    pub fn record_generation(&mut self, evaluated: &[Individual], population: &[Descriptor]) -> GenerationStats {
        let generation = self.generation.map_or(0, |g| g + 1);
        self.generation = Some(generation);
        self.evaluations += evaluated.len();
        self.projection.observe(evaluated);
        GenerationStats {
            generation,
            evaluations: self.evaluations,
            max_fitness: self.projection.max_fitness(),
            qd_score: self.projection.qd_score(),
            coverage: self.projection.coverage(),
            histogram: module_histogram(population),
        }
    }
}
