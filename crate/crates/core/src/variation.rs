//! Mutation and crossover over genomes.
//!
//! All operators take their inputs by reference and return fresh genomes;
//! randomness comes only from the passed generator.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::genome::{ControllerGenes, Genome, Module, MorphNode, Orientation};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationConfig {
    /// Probability that an offspring receives one morphological mutation.
    pub p_morph: f64,
    /// Probability that a parent pair is recombined.
    pub p_cross: f64,
    /// Per-parameter probability of a controller perturbation.
    pub p_ctrl: f64,
    /// Controller noise as a fraction of each parameter's range width.
    pub sigma: f64,
    /// When false, offspring produced by crossover skip mutation.
    #[serde(default = "default_true")]
    pub mutate_after_crossover: bool,
}

fn default_true() -> bool {
    true
}

impl VariationConfig {
    pub fn new(p_morph: f64, p_cross: f64, p_ctrl: f64, sigma: f64) -> Self {
        Self { p_morph, p_cross, p_ctrl, sigma, mutate_after_crossover: true }
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("p_morph", self.p_morph), ("p_cross", self.p_cross), ("p_ctrl", self.p_ctrl), ("sigma", self.sigma)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("variation.{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }
}

/// Reflects `v` off the violated bound until it lies in `[min, max]`.
pub fn bounce_back(v: f64, min: f64, max: f64) -> f64 {
    debug_assert!(min < max);
    if v.is_nan() {
        return min;
    }
    let width = max - min;
    let mut v = v.clamp(min - 1e6 * width, max + 1e6 * width);
    // Whole periods of reflection cancel out; remove them before iterating.
    if v < min - 2.0 * width || v > max + 2.0 * width {
        v = min + (v - min).rem_euclid(2.0 * width);
    }
    loop {
        if v < min {
            v = min + (min - v);
        } else if v > max {
            v = max - (v - max);
        } else {
            return v;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorphMutation {
    Add,
    Remove,
    Rotate,
}

impl MorphMutation {
    pub const ALL: [MorphMutation; 3] = [MorphMutation::Add, MorphMutation::Remove, MorphMutation::Rotate];
}

/// With probability `cfg.p_morph`, applies one uniformly chosen structural
/// edit. Returns the offspring and the edit applied, if any.
pub fn mutate_morphology<R: Rng + ?Sized>(
    genome: &Genome,
    cfg: &VariationConfig,
    rng: &mut R,
) -> (Genome, Option<MorphMutation>) {
    if !rng.random_bool(cfg.p_morph) {
        return (genome.clone(), None);
    }
    let feasible: Vec<MorphMutation> = if genome.node_count() > 1 {
        MorphMutation::ALL.to_vec()
    } else {
        vec![MorphMutation::Add, MorphMutation::Rotate]
    };
    let op = feasible[rng.random_range(0..feasible.len())];
    (apply_morph_mutation(genome, op, rng), Some(op))
}

/// Applies one specific structural edit. `Remove` on a root-only genome
/// returns an unchanged copy.
pub fn apply_morph_mutation<R: Rng + ?Sized>(genome: &Genome, op: MorphMutation, rng: &mut R) -> Genome {
    let mut out = genome.clone();
    match op {
        MorphMutation::Add => {
            let slots = out.free_slots();
            let (parent, slot) = &slots[rng.random_range(0..slots.len())];
            let attached = out.attach(parent, *slot, MorphNode::random(rng));
            debug_assert!(attached);
        }
        MorphMutation::Remove => {
            let candidates: Vec<_> = out.paths().into_iter().skip(1).collect();
            if !candidates.is_empty() {
                let path = &candidates[rng.random_range(0..candidates.len())];
                out.detach(path);
            }
        }
        MorphMutation::Rotate => {
            let paths = out.paths();
            let path = &paths[rng.random_range(0..paths.len())];
            let node = out.node_mut(path).expect("path from traversal");
            let current = node.orientation.quarter_turns();
            let turn = rng.random_range(1..4u8);
            node.orientation = Orientation::new((current + turn) % 4).expect("quarter turn");
        }
    }
    out
}

/// Perturbs each controller parameter independently with probability
/// `cfg.p_ctrl` by Gaussian noise of std `sigma * range width`, reflecting
/// back into range.
pub fn mutate_controllers<R: Rng + ?Sized>(genome: &Genome, cfg: &VariationConfig, rng: &mut R) -> Genome {
    let mut out = genome.clone();
    if cfg.sigma == 0.0 || cfg.p_ctrl == 0.0 {
        return out;
    }
    out.for_each_node_mut(&mut |node| {
        if let Module::Servo(genes) = &mut node.module {
            *genes = perturb_genes(genes, cfg, rng);
        }
    });
    out
}

fn perturb_genes<R: Rng + ?Sized>(genes: &ControllerGenes, cfg: &VariationConfig, rng: &mut R) -> ControllerGenes {
    let mut values = genes.to_array();
    for (v, range) in values.iter_mut().zip(ControllerGenes::RANGES) {
        if rng.random_bool(cfg.p_ctrl) {
            let noise = Normal::new(*v, cfg.sigma * range.width()).expect("finite non-negative std");
            *v = bounce_back(noise.sample(rng), range.min, range.max);
        }
    }
    ControllerGenes::from_array(values)
}

/// Exchanges one uniformly chosen non-root subtree between the parents.
/// Root-only parents cannot exchange anything and are copied unchanged.
pub fn crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> (Genome, Genome) {
    let pick = |g: &Genome, rng: &mut R| {
        let paths: Vec<_> = g.paths().into_iter().skip(1).collect();
        (!paths.is_empty()).then(|| paths[rng.random_range(0..paths.len())].clone())
    };
    let (Some(pa), Some(pb)) = (pick(a, rng), pick(b, rng)) else {
        return (a.clone(), b.clone());
    };
    let branch_a = a.node(&pa).expect("picked path").clone();
    let branch_b = b.node(&pb).expect("picked path").clone();
    let mut child_a = a.clone();
    let mut child_b = b.clone();
    child_a.replace_subtree(&pa, branch_b);
    child_b.replace_subtree(&pb, branch_a);
    (child_a, child_b)
}

/// Full variation of one parent pair: crossover with `p_cross`, then
/// morphological and controller mutation of each offspring.
pub fn vary_pair<R: Rng + ?Sized>(a: &Genome, b: &Genome, cfg: &VariationConfig, rng: &mut R) -> (Genome, Genome) {
    let crossed = rng.random_bool(cfg.p_cross);
    let (x, y) = if crossed { crossover(a, b, rng) } else { (a.clone(), b.clone()) };
    if crossed && !cfg.mutate_after_crossover {
        return (x, y);
    }
    let mut mutate = |g: Genome| {
        let (g, _) = mutate_morphology(&g, cfg, rng);
        mutate_controllers(&g, cfg, rng)
    };
    let x = mutate(x);
    let y = mutate(y);
    (x, y)
}

/// Varies consecutive parent pairs and returns exactly `parents.len()`
/// offspring; an odd last parent is paired with the first.
pub fn vary_population<R: Rng + ?Sized>(parents: &[&Genome], cfg: &VariationConfig, rng: &mut R) -> Vec<Genome> {
    let n = parents.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in (0..n).step_by(2) {
        let a = parents[i];
        let b = parents[(i + 1) % n];
        let (x, y) = vary_pair(a, b, cfg, rng);
        out.push(x);
        out.push(y);
    }
    out.truncate(n);
    out
}
