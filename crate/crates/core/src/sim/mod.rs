//! Phenotype construction and the locomotion simulator.

mod engine;
pub mod geometry;
mod phenotype;

pub use engine::{evaluate, joint_angle, simulate, simulate_traced, Evaluation, SimConfig, SimResult, Simulation, TrajectoryPoint};
pub use phenotype::{build_phenotype, slot_faces, Joint, Phenotype, PlacedModule, BRICK_SLOTS, HINGE_AXIS, SERVO_SLOTS};
