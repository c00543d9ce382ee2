//! Simulator for self-organizing mobile adaptive networks.
//!
//! A group of mobile nodes cooperatively estimates the location of a
//! stationary target from noisy range measurements and moves toward it as a
//! coherent swarm. Estimation uses diffusion LMS in adapt-then-combine
//! ordering; motion combines target seeking, velocity consensus, and
//! collision avoidance.
//!
//! Two cooperation modes are provided:
//!
//! - `baseline_atc`: fixed step size, fixed number of nearest neighbors.
//! - `proposed`: a distance-driven variable step size (grow while far from
//!   the target, decay while near) plus selective cooperation that keeps
//!   only neighbors whose tracked noise variance is no larger than the
//!   node's own.
//!
//! Runs are fully deterministic given a configuration and a seed; Monte
//! Carlo batches average per-iteration metrics over independently seeded
//! runs.

pub mod config;
pub mod estimation;
pub mod experiment;
pub mod motion;
pub mod sensing;
pub mod sim;
pub mod vector;

pub use config::{load_config, parse_config, ConfigError};
pub use experiment::{run_experiment, ExperimentError, ExperimentSpec};
pub use sim::{Mode, MonteCarloResult, RunResult, SimConfig};
pub use vector::{DirectionVector, RealVector};
