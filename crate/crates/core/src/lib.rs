//! Co-evolution of morphology and open-loop control for modular robots.
//!
//! Three search strategies share one genome, one variation pipeline and one
//! fitness function: a generational single-objective EA, NSGA-II with two
//! morphological diversity objectives, and MAP-Elites over a
//! `(bricks, servos)` descriptor grid. Every run is projected onto the same
//! grid so the strategies can be compared by QD-score and coverage.

pub mod genome;
pub mod metrics;
pub mod runner;
pub mod search;
pub mod sim;
pub mod variation;

pub use genome::{random_genome, ControllerGenes, Descriptor, Genome, ModuleKind, MorphLimits, MorphNode, Orientation};
pub use sim::{evaluate, SimConfig};
