//! NSGA-II with fitness plus two morphological diversity objectives.

use std::cmp::Ordering;

use crate::genome::{Descriptor, MorphLimits};
use crate::variation::vary_population;

use super::{
    random_population, tournament, AlgoConfig, AlgorithmKind, DiversityRecompute, Individual, SearchAlgorithm,
    SearchContext,
};

/// Pareto dominance with every objective maximized.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strictly = true;
        }
    }
    strictly
}

/// Fast non-dominated sorting. Returns fronts of indices, best front first,
/// each front in ascending index order.
pub fn nondominated_sort<T: AsRef<[f64]>>(points: &[T]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut dominators = vec![0usize; n];
    for i in 0..n {
        for k in (i + 1)..n {
            let (a, b) = (points[i].as_ref(), points[k].as_ref());
            if dominates(a, b) {
                dominated[i].push(k);
                dominators[k] += 1;
            } else if dominates(b, a) {
                dominated[k].push(i);
                dominators[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominators[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &k in &dominated[i] {
                dominators[k] -= 1;
                if dominators[k] == 0 {
                    next.push(k);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of `front` (aligned with `front`).
/// Boundary members of every non-degenerate objective get infinity; an
/// objective with zero spread over the front contributes nothing.
pub fn crowding_distance<T: AsRef<[f64]>>(points: &[T], front: &[usize]) -> Vec<f64> {
    let k = front.len();
    if k <= 2 {
        return vec![f64::INFINITY; k];
    }
    let value = |member: usize, obj: usize| points[front[member]].as_ref()[obj];
    let objectives = points[front[0]].as_ref().len();
    let mut distance = vec![0.0; k];
    let mut order: Vec<usize> = (0..k).collect();
    for obj in 0..objectives {
        order.sort_by(|&a, &b| value(a, obj).total_cmp(&value(b, obj)).then(a.cmp(&b)));
        let lo = value(order[0], obj);
        let hi = value(order[k - 1], obj);
        if hi <= lo {
            continue;
        }
        distance[order[0]] = f64::INFINITY;
        distance[order[k - 1]] = f64::INFINITY;
        for w in 1..k - 1 {
            distance[order[w]] += (value(order[w + 1], obj) - value(order[w - 1], obj)) / (hi - lo);
        }
    }
    distance
}

/// Mean component-wise morphological distance of every member to the whole
/// pool (itself included): `d = (1 - e^-|m_x - m_y|, 1 - e^-|j_x - j_y|)`.
pub fn diversity_objectives(descriptors: &[Descriptor]) -> Vec<[f64; 2]> {
    let n = descriptors.len();
    let gap = |a: usize, b: usize| -(-(a.abs_diff(b) as f64)).exp_m1();
    descriptors
        .iter()
        .map(|x| {
            let mut sum = [0.0; 2];
            for y in descriptors {
                sum[0] += gap(x.m, y.m);
                sum[1] += gap(x.j, y.j);
            }
            [sum[0] / n as f64, sum[1] / n as f64]
        })
        .collect()
}

/// Recomputes diversity over `pool`, then Pareto rank and crowding.
fn refresh(pool: &mut [Individual]) -> Vec<Vec<usize>> {
    let descriptors: Vec<_> = pool.iter().map(|i| i.descriptor).collect();
    for (ind, d) in pool.iter_mut().zip(diversity_objectives(&descriptors)) {
        ind.diversity = d;
    }
    let objectives: Vec<[f64; 3]> = pool.iter().map(Individual::objectives).collect();
    let fronts = nondominated_sort(&objectives);
    for (rank, front) in fronts.iter().enumerate() {
        for (&i, c) in front.iter().zip(crowding_distance(&objectives, front)) {
            pool[i].rank = rank;
            pool[i].crowding = c;
        }
    }
    fronts
}

/// Crowded comparison: lower rank wins, then larger crowding distance.
fn crowded_cmp(a: &Individual, b: &Individual) -> Ordering {
    b.rank.cmp(&a.rank).then(a.crowding.total_cmp(&b.crowding))
}

/// Reduces `pool` to `n` survivors by front, then by crowding within the
/// last admitted front. Survivors carry diversity, rank and crowding
/// computed over the survivor set.
pub fn select_survivors(mut pool: Vec<Individual>, n: usize, mode: DiversityRecompute) -> Vec<Individual> {
    match mode {
        DiversityRecompute::PerPool => {
            let fronts = refresh(&mut pool);
            let mut keep: Vec<usize> = Vec::with_capacity(n);
            for front in fronts {
                if keep.len() + front.len() <= n {
                    keep.extend(front);
                } else {
                    let mut front = front;
                    // Stable: equal crowding keeps lower indices first.
                    front.sort_by(|&a, &b| pool[b].crowding.total_cmp(&pool[a].crowding));
                    keep.extend(front.into_iter().take(n - keep.len()));
                }
                if keep.len() == n {
                    break;
                }
            }
            keep.sort_unstable();
            let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
            let mut survivors: Vec<Individual> = keep.into_iter().map(|i| slots[i].take().expect("unique")).collect();
            refresh(&mut survivors);
            survivors
        }
        DiversityRecompute::PerRemoval => {
            refresh(&mut pool);
            while pool.len() > n {
                let worst = (0..pool.len())
                    .min_by(|&a, &b| crowded_cmp(&pool[a], &pool[b]).then(b.cmp(&a)))
                    .expect("non-empty pool");
                pool.remove(worst);
                refresh(&mut pool);
            }
            pool
        }
    }
}

pub struct Nsga2 {
    cfg: AlgoConfig,
    limits: MorphLimits,
    population: Vec<Individual>,
}

impl Nsga2 {
    pub fn new(cfg: AlgoConfig, limits: MorphLimits) -> Self {
        Nsga2 { cfg, limits, population: Vec::new() }
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }
}

impl SearchAlgorithm for Nsga2 {
    fn kind(&self) -> AlgorithmKind {
        AlgorithmKind::Nsga2
    }

    fn initialize(&mut self, ctx: &mut SearchContext) -> Vec<Individual> {
        let genomes = random_population(self.cfg.init_size, &self.limits, &mut ctx.streams.init);
        let evaluated = ctx.evaluator.evaluate_all(genomes);
        self.population = evaluated.clone();
        refresh(&mut self.population);
        evaluated
    }

    fn step(&mut self, ctx: &mut SearchContext) -> Vec<Individual> {
        let pop = &self.population;
        let parents: Vec<_> = (0..self.cfg.batch_size)
            .map(|_| {
                let i = tournament(pop.len(), self.cfg.tournament_size, &mut ctx.streams.selection, |a, b| {
                    crowded_cmp(&pop[a], &pop[b])
                });
                &pop[i].genome
            })
            .collect();
        let offspring = vary_population(&parents, &self.cfg.variation, &mut ctx.streams.variation);
        let evaluated = ctx.evaluator.evaluate_all(offspring);
        let mut pool = std::mem::take(&mut self.population);
        pool.extend(evaluated.iter().cloned());
        self.population = select_survivors(pool, self.cfg.batch_size, self.cfg.diversity_recompute);
        evaluated
    }

    fn population_descriptors(&self) -> Vec<Descriptor> {
        self.population.iter().map(|i| i.descriptor).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::Genome;
    use crate::sim::Evaluation;
    use proptest::prelude::*;

    /// Peels fronts off a full dominance matrix.
    fn brute_fronts(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
        let n = points.len();
        let dom: Vec<Vec<bool>> =
            (0..n).map(|i| (0..n).map(|k| dominates(&points[i], &points[k])).collect()).collect();
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut fronts = Vec::new();
        while !remaining.is_empty() {
            let front: Vec<usize> =
                remaining.iter().copied().filter(|&i| !remaining.iter().any(|&k| dom[k][i])).collect();
            remaining.retain(|i| !front.contains(i));
            fronts.push(front);
        }
        fronts
    }

    fn ind(m: usize, j: usize, fitness: f64) -> Individual {
        Individual::new(Genome::root_only(), Evaluation { fitness, descriptor: Descriptor::new(m, j) })
    }

    #[test]
    fn single_point_single_front() {
        assert_eq!(nondominated_sort(&[[1.0, 2.0, 3.0]]), vec![vec![0]]);
    }

    #[test]
    fn axis_points_are_mutually_non_dominated() {
        let pts = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(nondominated_sort(&pts), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn small_fronts_are_infinite() {
        let pts = [[1.0, 0.0], [0.0, 1.0]];
        assert!(crowding_distance(&pts, &[0, 1]).iter().all(|d| d.is_infinite()));
        assert!(crowding_distance(&pts, &[1]).iter().all(|d| d.is_infinite()));
    }

    #[test]
    fn collinear_points_crowding() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]];
        let d = crowding_distance(&pts, &[0, 1, 2]);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        // (2 - 0) / (2 - 0) per objective.
        assert_eq!(d[1], 3.0);
    }

    #[test]
    fn diversity_examples() {
        let same = vec![Descriptor::new(3, 2); 5];
        assert!(diversity_objectives(&same).iter().all(|d| *d == [0.0, 0.0]));
        let pair = [Descriptor::new(1, 2), Descriptor::new(2, 2)];
        let expected = (1.0 - (-1.0f64).exp()) / 2.0;
        for d in diversity_objectives(&pair) {
            assert!((d[0] - expected).abs() < 1e-15);
            assert!((d[0] - 0.3161).abs() < 1e-4);
            assert_eq!(d[1], 0.0);
        }
    }

    #[test]
    fn survivors_keep_whole_first_front() {
        // Five non-dominated individuals (fitness rises as m falls) plus dominated ones.
        let mut pool: Vec<Individual> = (1..=5).map(|m| ind(m, 0, 10.0 - m as f64)).collect();
        pool.extend((0..5).map(|_| ind(3, 0, 0.0)));
        let survivors = select_survivors(pool, 6, DiversityRecompute::PerPool);
        assert_eq!(survivors.len(), 6);
        for m in 1..=5 {
            assert!(survivors.iter().any(|s| s.descriptor.m == m && s.fitness > 0.0));
        }
    }

    #[test]
    fn duplicate_offspring_preserve_parent_objectives() {
        let parents: Vec<Individual> = (0..6).map(|k| ind(1 + k % 3, k % 2, k as f64)).collect();
        let mut pool = parents.clone();
        pool.extend(parents.iter().cloned());
        let survivors = select_survivors(pool, 6, DiversityRecompute::PerPool);
        let mut got: Vec<(usize, usize, u64)> =
            survivors.iter().map(|s| (s.descriptor.m, s.descriptor.j, s.fitness.to_bits())).collect();
        let mut want: Vec<(usize, usize, u64)> =
            parents.iter().map(|s| (s.descriptor.m, s.descriptor.j, s.fitness.to_bits())).collect();
        got.sort_unstable();
        want.sort_unstable();
        assert_eq!(got.len(), want.len());
        // Every survivor objective vector occurs among the parents.
        assert!(got.iter().all(|g| want.contains(g)));
    }

    #[test]
    fn equal_descriptors_reduce_to_fitness() {
        let pool: Vec<Individual> = (0..10).map(|k| ind(2, 1, k as f64)).collect();
        for mode in [DiversityRecompute::PerPool, DiversityRecompute::PerRemoval] {
            let survivors = select_survivors(pool.clone(), 4, mode);
            assert!(survivors.iter().all(|s| s.diversity == [0.0, 0.0]));
            let mut f: Vec<f64> = survivors.iter().map(|s| s.fitness).collect();
            f.sort_by(f64::total_cmp);
            assert_eq!(f, vec![6.0, 7.0, 8.0, 9.0]);
        }
    }

    #[test]
    fn rank_precedes_crowding() {
        let mut better = ind(1, 0, 5.0);
        better.rank = 0;
        better.crowding = 0.0;
        let mut worse = ind(1, 0, 1.0);
        worse.rank = 1;
        worse.crowding = f64::INFINITY;
        assert_eq!(crowded_cmp(&better, &worse), Ordering::Greater);
    }

    proptest! {
        #[test]
        fn matches_brute_force(points in prop::collection::vec(prop::collection::vec(0u8..6, 3), 1..60)) {
            let pts: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|&v| v as f64).collect()).collect();
            prop_assert_eq!(nondominated_sort(&pts), brute_fronts(&pts));
        }

        #[test]
        fn positive_scaling_keeps_ranks(points in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 3), 1..40), s in 0.1f64..100.0) {
            let scaled: Vec<Vec<f64>> = points.iter().map(|p| vec![p[0] * s, p[1], p[2]]).collect();
            prop_assert_eq!(nondominated_sort(&points), nondominated_sort(&scaled));
        }

        #[test]
        fn diversity_in_unit_interval(ds in prop::collection::vec((1usize..=20, 0usize..20), 1..50)) {
            let ds: Vec<Descriptor> = ds.into_iter().map(|(m, j)| Descriptor::new(m, j)).collect();
            for d in diversity_objectives(&ds) {
                prop_assert!(d[0] >= 0.0 && d[0] < 1.0 && d[1] >= 0.0 && d[1] < 1.0);
            }
        }
    }
}
