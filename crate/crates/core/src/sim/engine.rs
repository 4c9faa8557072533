//! Pinned-feet kinematic locomotion surrogate.
//!
//! Each step poses the body from the joint set-points, drops it onto the
//! ground plane and then slides the whole body so that modules which stayed
//! in ground contact across the step do not move horizontally. The root's
//! planar travel after the warm-up is the fitness.

use serde::{Deserialize, Serialize};

use crate::genome::{ControllerGenes, Descriptor, Genome, MorphLimits, ANGLE_LIMIT};

use super::geometry::{add, scale, to_vec3, Mat3, Vec3};
use super::phenotype::{build_phenotype, Phenotype};

/// Set-point of one joint at time `t`, clamped to the servo's range.
pub fn joint_angle(genes: &ControllerGenes, t: f64) -> f64 {
    (genes.alpha * (genes.omega * t + genes.phi).sin() + genes.offset).clamp(-ANGLE_LIMIT, ANGLE_LIMIT)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Scored time after the warm-up, in seconds.
    pub eval_time: f64,
    /// Unscored settling time, in seconds.
    pub warmup: f64,
    pub dt: f64,
    /// Height above the lowest module (in module lengths) still counted as ground contact.
    pub contact_epsilon: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { eval_time: 20.0, warmup: 2.0, dt: 0.05, contact_epsilon: 0.1 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(format!("sim.dt must be positive, got {}", self.dt));
        }
        if !(self.warmup >= 0.0 && self.warmup.is_finite()) {
            return Err(format!("sim.warmup must be non-negative, got {}", self.warmup));
        }
        if !(self.eval_time > 0.0 && self.eval_time.is_finite()) {
            return Err(format!("sim.eval_time must be positive, got {}", self.eval_time));
        }
        if self.contact_epsilon.is_nan() || self.contact_epsilon < 0.0 {
            return Err(format!("sim.contact_epsilon must be non-negative, got {}", self.contact_epsilon));
        }
        Ok(())
    }

    pub fn warmup_steps(&self) -> usize {
        (self.warmup / self.dt).round() as usize
    }

    pub fn total_steps(&self) -> usize {
        ((self.warmup + self.eval_time) / self.dt).round() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub time: f64,
    pub root: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub fitness: f64,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
}

/// Stepper over one episode. [`simulate`] drives it to completion; tests
/// and replay tooling can inspect or perturb it between steps.
pub struct Simulation<'a> {
    phenotype: &'a Phenotype,
    cfg: SimConfig,
    step: usize,
    warmup_step: usize,
    final_step: usize,
    local: Vec<Vec3>,
    prev_local: Vec<Vec3>,
    contact: Vec<bool>,
    prev_contact: Vec<bool>,
    frames: Vec<Mat3>,
    offset: [f64; 2],
    lift: f64,
    travelled: [f64; 2],
}

impl<'a> Simulation<'a> {
    pub fn new(phenotype: &'a Phenotype, cfg: SimConfig) -> Self {
        let n = phenotype.len();
        let mut sim = Simulation {
            phenotype,
            cfg,
            step: 0,
            warmup_step: cfg.warmup_steps(),
            final_step: cfg.total_steps(),
            local: vec![[0.0; 3]; n],
            prev_local: vec![[0.0; 3]; n],
            contact: vec![false; n],
            prev_contact: vec![false; n],
            frames: vec![Mat3::IDENTITY; n],
            offset: [0.0; 2],
            lift: 0.0,
            travelled: [0.0; 2],
        };
        sim.pose(0.0);
        sim.settle();
        sim
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.dt
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.final_step
    }

    /// Body-frame module centers at the current step (root at the origin).
    pub fn local_positions(&self) -> &[Vec3] {
        &self.local
    }

    pub fn contacts(&self) -> &[bool] {
        &self.contact
    }

    pub fn world_position(&self, module: usize) -> Vec3 {
        let p = self.local[module];
        [p[0] + self.offset[0], p[1] + self.offset[1], p[2] + self.lift]
    }

    pub fn root_position(&self) -> Vec3 {
        self.world_position(0)
    }

    /// Planar root travel accumulated since the warm-up ended.
    pub fn travelled(&self) -> f64 {
        self.travelled[0].hypot(self.travelled[1])
    }

    /// Externally displaces the body in the plane. Displacements applied
    /// while `step_index() < warmup_steps` do not count towards fitness.
    pub fn nudge(&mut self, dx: f64, dy: f64) {
        self.offset[0] += dx;
        self.offset[1] += dy;
        if self.step >= self.warmup_step {
            self.travelled[0] += dx;
            self.travelled[1] += dy;
        }
    }

    /// Advances one time step. Returns false once the episode is over.
    pub fn advance(&mut self) -> bool {
        if self.is_finished() {
            return false;
        }
        self.step += 1;
        std::mem::swap(&mut self.local, &mut self.prev_local);
        std::mem::swap(&mut self.contact, &mut self.prev_contact);
        self.pose(self.time());
        self.settle();

        let mut sum = [0.0; 2];
        let mut anchored = 0usize;
        for i in 0..self.local.len() {
            if self.contact[i] && self.prev_contact[i] {
                sum[0] += self.local[i][0] - self.prev_local[i][0];
                sum[1] += self.local[i][1] - self.prev_local[i][1];
                anchored += 1;
            }
        }
        if anchored > 0 {
            let shift = [-sum[0] / anchored as f64, -sum[1] / anchored as f64];
            self.offset[0] += shift[0];
            self.offset[1] += shift[1];
            if self.step > self.warmup_step {
                self.travelled[0] += shift[0];
                self.travelled[1] += shift[1];
            }
        }
        true
    }

    /// Forward kinematics in the body frame.
    fn pose(&mut self, t: f64) {
        let p = self.phenotype;
        for (i, m) in p.modules.iter().enumerate() {
            match m.parent {
                None => {
                    self.frames[i] = m.relative.to_mat3();
                    self.local[i] = [0.0; 3];
                }
                Some(parent) => {
                    let parent_frame = self.frames[parent];
                    let mut frame = parent_frame.mul(&m.relative.to_mat3());
                    if let Some(j) = m.joint {
                        frame = frame.mul(&Mat3::rot_y(joint_angle(&p.joints[j].genes, t)));
                    }
                    let hinge = add(self.local[parent], parent_frame.apply(scale(to_vec3(m.face), 0.5)));
                    self.local[i] = add(hinge, scale(frame.col(0), 0.5));
                    self.frames[i] = frame;
                }
            }
        }
    }

    /// Drops the body onto z = 0 and refreshes the contact set.
    fn settle(&mut self) {
        let min_z = self.local.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
        self.lift = -min_z;
        let eps = self.cfg.contact_epsilon;
        for (c, p) in self.contact.iter_mut().zip(&self.local) {
            *c = p[2] - min_z <= eps;
        }
    }
}

pub fn simulate(phenotype: &Phenotype, cfg: &SimConfig) -> SimResult {
    let mut sim = Simulation::new(phenotype, *cfg);
    while sim.advance() {}
    SimResult { fitness: sim.travelled(), trajectory: None }
}

/// Like [`simulate`], additionally recording the root position at every step.
pub fn simulate_traced(phenotype: &Phenotype, cfg: &SimConfig) -> SimResult {
    let mut sim = Simulation::new(phenotype, *cfg);
    let mut trajectory = Vec::with_capacity(cfg.total_steps() + 1);
    loop {
        trajectory.push(TrajectoryPoint { step: sim.step_index(), time: sim.time(), root: sim.root_position() });
        if !sim.advance() {
            break;
        }
    }
    SimResult { fitness: sim.travelled(), trajectory: Some(trajectory) }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub fitness: f64,
    pub descriptor: Descriptor,
}

/// Builds and simulates a genome. The single fitness entry point shared by
/// every search algorithm.
pub fn evaluate(genome: &Genome, limits: &MorphLimits, cfg: &SimConfig) -> Evaluation {
    let phenotype = build_phenotype(genome, limits);
    let result = simulate(&phenotype, cfg);
    Evaluation { fitness: result.fitness, descriptor: phenotype.descriptor }
}
