//! Network state, the per-iteration scheduler for both algorithm variants,
//! Monte Carlo averaging, and metric computation.
//!
//! One iteration advances every node through the same sequence:
//!
//! 1. measure the target (own noise substream);
//! 2. update the step size from the far/near-field test (proposed mode);
//! 3. build the diffusion neighbor set (selective or k-nearest);
//! 4. adaptation: estimate and group-velocity intermediates from the
//!    pre-step snapshot;
//! 5. combination: convex-combine neighbors' same-iteration intermediates;
//! 6. update the noise-variance tracker (proposed mode);
//! 7. update velocity, then location.
//!
//! All cross-node reads use the pre-step snapshot except step 5, which by
//! construction reads intermediates produced in step 4 of the same
//! iteration. Within a batch, runs are seeded `base_seed + run_index` and
//! each node draws from its own ChaCha stream, so results do not depend on
//! execution order or parallelism.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{UnitCircle, UnitSphere};
use rayon::prelude::*;

use crate::config::ConfigError;
use crate::estimation::{
    a_priori_error, adapt, combine, is_far_field, knn_neighbors, selective_knn_neighbors,
    update_step_size, update_variance_estimate, CombinationWeights, EstimatorState,
    StepSizePolicy,
};
use crate::motion::{
    consensus_adapt, consensus_combine, update_location, update_velocity, MotionPolicy,
    MotionState,
};
use crate::sensing::{measure, Measurement};
use crate::vector::{RealVector, COINCIDENCE_EPSILON};

/// Cooperation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Variable step size plus variance-ranked selective cooperation.
    Proposed,
    /// Fixed step size, fixed number of nearest neighbors.
    BaselineAtc,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Proposed => "proposed",
            Mode::BaselineAtc => "baseline_atc",
        }
    }
}

/// Which neighbor uses the selective set covers in proposed mode.
///
/// The default feeds one neighbor set to everything, diffusions and the
/// spacing sum alike. The alternative keeps the selective set for the two
/// diffusions but lets the spacing sum see the whole radius ball; note that
/// at the default density the ball holds dozens of members whose pairwise
/// attraction makes the spacing dynamics violent under the default time
/// step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectiveScope {
    /// Selective set for both diffusions; radius ball for the spacing sum.
    DiffusionsOnly,
    /// Selective set everywhere, including the spacing sum.
    AllNeighborUses,
}

impl SelectiveScope {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectiveScope::DiffusionsOnly => "diffusions_only",
            SelectiveScope::AllNeighborUses => "all_neighbor_uses",
        }
    }
}

/// Every tunable of the model and both algorithm variants.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Spatial dimension, 2 or 3.
    pub dim: usize,
    /// Number of nodes.
    pub n_nodes: usize,
    /// Target location.
    pub target: RealVector,
    /// Noise-variance coefficient.
    pub kappa: f64,
    /// Neighbor radius.
    pub radius: f64,
    /// Cooperation mode.
    pub mode: Mode,
    /// Fixed step size of the baseline; also the initial step size of the
    /// proposed controller.
    pub baseline_mu: f64,
    /// Nearest-neighbor count of the baseline.
    pub baseline_k: usize,
    /// Variable step-size controller parameters.
    pub step_policy: StepSizePolicy,
    /// Forgetting factor of the noise-variance tracker.
    pub eta: f64,
    /// Motion parameters.
    pub motion_policy: MotionPolicy,
    /// Side length of the initial placement cube.
    pub init_cube_side: f64,
    /// Shared initial target estimate.
    pub w_init: RealVector,
    /// Iterations per run.
    pub n_iterations: usize,
    /// Runs per Monte Carlo batch.
    pub n_runs: usize,
    /// Seed of run 0; run `i` uses `base_seed + i`.
    pub base_seed: u64,
    /// Scope of the selective rule in proposed mode.
    pub selective_scope: SelectiveScope,
    /// Record full node snapshots every this many iterations (0 = never).
    pub snapshot_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            n_nodes: 50,
            target: RealVector::new(&[120.0, 120.0]),
            kappa: 0.01,
            radius: 6.0,
            mode: Mode::Proposed,
            baseline_mu: 0.5,
            baseline_k: 4,
            step_policy: StepSizePolicy {
                alpha: 1.2,
                beta: 0.85,
                gamma: 0.001,
                // The floor also sets the terminal location-step scale, so
                // it must stay large enough for nodes to finish cleaning up
                // the transit residual and settle onto the target.
                mu_min: 0.2,
                mu_max: 1.0,
                // Squared distance; the far field begins three spacing radii
                // from the (estimated) target, far enough out that the
                // deceleration phase still lands the swarm on the target.
                far_field_threshold: 36.0,
            },
            eta: 0.95,
            motion_policy: MotionPolicy {
                xi1: 0.8,
                xi2: 0.5,
                xi3: 0.8,
                r: 2.0,
                delta: 0.5,
                dt: 0.5,
            },
            init_cube_side: 10.0,
            w_init: RealVector::new(&[0.0, 0.0]),
            n_iterations: 300,
            n_runs: 50,
            base_seed: 1,
            selective_scope: SelectiveScope::AllNeighborUses,
            snapshot_every: 0,
        }
    }
}

impl SimConfig {
    /// Checks every invariant, naming the violated one on failure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));

        if self.dim != 2 && self.dim != 3 {
            return fail(format!("dim must be 2 or 3, got {}", self.dim));
        }
        if self.n_nodes == 0 {
            return fail("n_nodes must be >= 1".into());
        }
        if self.target.dim() != self.dim {
            return fail(format!(
                "target has dimension {}, expected {}",
                self.target.dim(),
                self.dim
            ));
        }
        if !self.target.is_finite() {
            return fail("target components must be finite".into());
        }
        if self.w_init.dim() != self.dim {
            return fail(format!(
                "w_init has dimension {}, expected {}",
                self.w_init.dim(),
                self.dim
            ));
        }
        if !self.w_init.is_finite() {
            return fail("w_init components must be finite".into());
        }
        if !self.kappa.is_finite() || self.kappa < 0.0 {
            return fail(format!("kappa must be >= 0, got {}", self.kappa));
        }
        if !self.radius.is_finite() || self.radius <= 0.0 {
            return fail(format!("radius must be > 0, got {}", self.radius));
        }
        if !self.baseline_mu.is_finite() || self.baseline_mu <= 0.0 {
            return fail(format!("baseline_mu must be > 0, got {}", self.baseline_mu));
        }
        if self.baseline_k == 0 {
            return fail("baseline_k must be >= 1".into());
        }
        if let Err(msg) = self.step_policy.validate() {
            return fail(msg);
        }
        if !self.eta.is_finite() || self.eta <= 0.0 || self.eta >= 1.0 {
            return fail(format!("eta must be in (0, 1), got {}", self.eta));
        }
        if let Err(msg) = self.motion_policy.validate() {
            return fail(msg);
        }
        if !self.init_cube_side.is_finite() || self.init_cube_side <= 0.0 {
            return fail(format!(
                "init_cube_side must be > 0, got {}",
                self.init_cube_side
            ));
        }
        if self.n_runs == 0 {
            return fail("n_runs must be >= 1".into());
        }
        if self.mode == Mode::Proposed
            && (self.baseline_mu < self.step_policy.mu_min
                || self.baseline_mu > self.step_policy.mu_max)
        {
            return fail(format!(
                "initial step size {} (baseline_mu) must lie in [mu_min, mu_max] = [{}, {}] in proposed mode",
                self.baseline_mu, self.step_policy.mu_min, self.step_policy.mu_max
            ));
        }
        Ok(())
    }
}

/// One node's full state.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: usize,
    pub motion: MotionState,
    pub estimator: EstimatorState,
    /// Dedicated random substream: stream `id + 1` of the run's seed, so a
    /// change in node count never alters another node's draws.
    pub rng: ChaCha8Rng,
}

/// A snapshot of one node's observable state.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSnapshot {
    pub node_id: usize,
    pub x: RealVector,
    pub v: RealVector,
    pub w: RealVector,
}

/// Per-iteration aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsFrame {
    /// 1-based iteration index; the frame captures state after the pass.
    pub iteration: usize,
    /// Network mean squared deviation of the target estimates.
    pub msd: f64,
    /// Mean step size.
    pub mean_mu: f64,
    /// Mean diffusion neighbor count, self included.
    pub mean_neighbor_count: f64,
    /// Mean node-to-target distance.
    pub mean_distance_to_target: f64,
    /// Full node snapshots, when requested for this iteration.
    pub snapshots: Option<Vec<NodeSnapshot>>,
}

/// A seeded run's full time series.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub frames: Vec<MetricsFrame>,
}

/// Averaged frames plus the per-run results they came from.
#[derive(Debug, Clone)]
pub struct MonteCarloResult {
    /// Frame-wise arithmetic mean of the metrics across runs.
    pub averaged: Vec<MetricsFrame>,
    pub runs: Vec<RunResult>,
}

/// Initializes the network: positions uniform in `[0, side]^D`, unit-norm
/// random velocities, the shared initial estimate, zero group velocity.
pub fn init_network(config: &SimConfig, seed: u64) -> Vec<NodeState> {
    (0..config.n_nodes)
        .map(|id| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id as u64 + 1);

            let mut coords = [0.0f64; 3];
            for c in coords.iter_mut().take(config.dim) {
                *c = rng.gen_range(0.0..=config.init_cube_side);
            }
            let x = RealVector::new(&coords[..config.dim]);

            let v = if config.dim == 2 {
                let dir: [f64; 2] = rng.sample(UnitCircle);
                RealVector::new(&dir)
            } else {
                let dir: [f64; 3] = rng.sample(UnitSphere);
                RealVector::new(&dir)
            };

            NodeState {
                id,
                motion: MotionState {
                    x,
                    v,
                    vg: RealVector::zeros(config.dim),
                },
                estimator: EstimatorState {
                    w: config.w_init,
                    mu: config.baseline_mu,
                    sigma2_hat: None,
                },
                rng,
            }
        })
        .collect()
}

/// Aggregates produced while stepping, needed for the metrics frame.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    /// Mean diffusion neighbor count, self included.
    pub mean_neighbor_count: f64,
}

/// Advances every node one iteration.
pub fn step(nodes: &mut [NodeState], config: &SimConfig) -> StepInfo {
    let n = nodes.len();
    let policy = &config.step_policy;

    // Pre-step snapshot.
    let x_prev: Vec<RealVector> = nodes.iter().map(|n| n.motion.x).collect();
    let v_prev: Vec<RealVector> = nodes.iter().map(|n| n.motion.v).collect();
    let vg_prev: Vec<RealVector> = nodes.iter().map(|n| n.motion.vg).collect();
    let w_prev: Vec<RealVector> = nodes.iter().map(|n| n.estimator.w).collect();

    // 1. Measurements and innovations, each from the node's own stream.
    let measurements: Vec<Measurement> = nodes
        .iter_mut()
        .map(|node| measure(&node.motion.x, &config.target, config.kappa, &mut node.rng))
        .collect();
    let innovations: Vec<f64> = (0..n)
        .map(|k| a_priori_error(measurements[k].d, &measurements[k].u, &w_prev[k]))
        .collect();

    // 2. Step-size controller; the baseline keeps its fixed step.
    if config.mode == Mode::Proposed {
        for k in 0..n {
            let far = is_far_field(&w_prev[k], &x_prev[k], policy.far_field_threshold);
            nodes[k].estimator.mu =
                update_step_size(nodes[k].estimator.mu, far, innovations[k], policy);
            // The first innovation seeds the variance tracker so neighbor
            // selection has a value to rank from the first iteration.
            if nodes[k].estimator.sigma2_hat.is_none() {
                nodes[k].estimator.sigma2_hat = Some(innovations[k] * innovations[k]);
            }
        }
    }

    // 3. Cooperation neighbor sets. Both variants draw from the same
    // nearest-within-radius candidates; the proposed rule additionally drops
    // candidates with a larger tracked variance than the node's own.
    let diffusion_sets: Vec<Vec<usize>> = match config.mode {
        Mode::Proposed => {
            let variances: Vec<f64> = nodes
                .iter()
                .map(|n| n.estimator.sigma2_hat.unwrap_or(0.0))
                .collect();
            (0..n)
                .map(|k| {
                    selective_knn_neighbors(
                        k,
                        &x_prev,
                        &variances,
                        config.baseline_k,
                        config.radius,
                    )
                })
                .collect()
        }
        Mode::BaselineAtc => (0..n)
            .map(|k| knn_neighbors(k, &x_prev, config.baseline_k, config.radius))
            .collect(),
    };

    // 4. Adaptation from the snapshot.
    let mut intermediates_w: Vec<RealVector> = Vec::with_capacity(n);
    let mut intermediates_s: Vec<RealVector> = Vec::with_capacity(n);
    for k in 0..n {
        let set = &diffusion_sets[k];
        let weights = CombinationWeights::uniform(set.len());
        let data: Vec<(f64, _)> = set
            .iter()
            .map(|&j| (measurements[j].d, measurements[j].u))
            .collect();
        intermediates_w.push(adapt(&w_prev[k], nodes[k].estimator.mu, &data, &weights));

        let velocities: Vec<RealVector> = set.iter().map(|&j| v_prev[j]).collect();
        intermediates_s.push(consensus_adapt(
            &vg_prev[k],
            config.motion_policy.delta,
            &velocities,
            &weights,
        ));
    }

    // 5. Combination over the same sets, reading this iteration's
    // intermediates.
    let mut neighbor_count_sum = 0usize;
    for k in 0..n {
        let set = &diffusion_sets[k];
        neighbor_count_sum += set.len();
        let weights = CombinationWeights::uniform(set.len());
        let ms: Vec<RealVector> = set.iter().map(|&j| intermediates_w[j]).collect();
        let ss: Vec<RealVector> = set.iter().map(|&j| intermediates_s[j]).collect();
        nodes[k].estimator.w = combine(&ms, &weights);
        nodes[k].motion.vg = consensus_combine(&ss, &weights);
    }

    // 6. Variance tracker.
    if config.mode == Mode::Proposed {
        for k in 0..n {
            let prev = nodes[k].estimator.sigma2_hat.expect("seeded in step 2");
            nodes[k].estimator.sigma2_hat =
                Some(update_variance_estimate(prev, innovations[k], config.eta));
        }
    }

    // 7. Velocity, then location. The spacing sum sees the cooperation set,
    // except in proposed mode with the diffusions-only scope, where it sees
    // the whole radius ball.
    //
    // The node's step size scales its displacement: the location update
    // integrates over an effective time step mu·dt. The baseline moves at
    // its fixed step size while the proposed controller makes far nodes
    // cover ground quickly and near nodes decelerate onto the target. The
    // published velocity stays unscaled so the consensus tracks intended
    // headings.
    for k in 0..n {
        let ball_spacing = config.mode == Mode::Proposed
            && config.selective_scope == SelectiveScope::DiffusionsOnly;
        let spacing_positions: Vec<RealVector> = if ball_spacing {
            (0..n)
                .filter(|&j| j != k && x_prev[k].distance_to(&x_prev[j]) <= config.radius)
                .map(|j| x_prev[j])
                .collect()
        } else {
            diffusion_sets[k]
                .iter()
                .filter(|&&j| j != k)
                .map(|&j| x_prev[j])
                .collect()
        };
        let v_new = update_velocity(
            &w_prev[k],
            &x_prev[k],
            &vg_prev[k],
            &spacing_positions,
            &config.motion_policy,
            COINCIDENCE_EPSILON,
        );
        let effective_dt = nodes[k].estimator.mu * config.motion_policy.dt;
        nodes[k].motion.x = update_location(&x_prev[k], &v_new, effective_dt);
        nodes[k].motion.v = v_new;
    }

    StepInfo {
        mean_neighbor_count: neighbor_count_sum as f64 / n as f64,
    }
}

/// Network mean squared deviation of the estimates from the target.
pub fn msd(nodes: &[NodeState], target: &RealVector) -> f64 {
    assert!(!nodes.is_empty(), "msd needs a nonempty network");
    nodes
        .iter()
        .map(|n| n.estimator.w.distance_squared_to(target))
        .sum::<f64>()
        / nodes.len() as f64
}

fn mean_distance_to_target(nodes: &[NodeState], target: &RealVector) -> f64 {
    nodes
        .iter()
        .map(|n| n.motion.x.distance_to(target))
        .sum::<f64>()
        / nodes.len() as f64
}

fn mean_mu(nodes: &[NodeState]) -> f64 {
    nodes.iter().map(|n| n.estimator.mu).sum::<f64>() / nodes.len() as f64
}

fn take_snapshots(nodes: &[NodeState]) -> Vec<NodeSnapshot> {
    nodes
        .iter()
        .map(|n| NodeSnapshot {
            node_id: n.id,
            x: n.motion.x,
            v: n.motion.v,
            w: n.estimator.w,
        })
        .collect()
}

/// Executes one seeded run, recording a frame after every iteration.
///
/// Snapshots are attached for iterations selected by `config.snapshot_every`.
pub fn run(config: &SimConfig, seed: u64) -> Result<RunResult, ConfigError> {
    run_with_snapshots(config, seed, &BTreeSet::new())
}

/// Like [`run`], with extra explicit snapshot iterations.
pub fn run_with_snapshots(
    config: &SimConfig,
    seed: u64,
    extra_snapshots: &BTreeSet<usize>,
) -> Result<RunResult, ConfigError> {
    config.validate()?;
    let mut nodes = init_network(config, seed);
    let mut frames = Vec::with_capacity(config.n_iterations);
    for iteration in 1..=config.n_iterations {
        let info = step(&mut nodes, config);
        let want_snapshot = (config.snapshot_every > 0 && iteration % config.snapshot_every == 0)
            || extra_snapshots.contains(&iteration);
        frames.push(MetricsFrame {
            iteration,
            msd: msd(&nodes, &config.target),
            mean_mu: mean_mu(&nodes),
            mean_neighbor_count: info.mean_neighbor_count,
            mean_distance_to_target: mean_distance_to_target(&nodes, &config.target),
            snapshots: want_snapshot.then(|| take_snapshots(&nodes)),
        });
    }
    Ok(RunResult { seed, frames })
}

/// Runs the configured Monte Carlo batch and averages the metrics
/// frame-wise across runs.
///
/// `jobs` bounds run-level parallelism; results are identical for any value
/// because runs share nothing and are averaged in seed order.
pub fn monte_carlo(config: &SimConfig, jobs: usize) -> Result<MonteCarloResult, ConfigError> {
    monte_carlo_with_snapshots(config, jobs, &BTreeSet::new())
}

/// Like [`monte_carlo`]; extra snapshot iterations apply to run 0 only,
/// which is the run whose trajectories the experiment layer emits.
pub fn monte_carlo_with_snapshots(
    config: &SimConfig,
    jobs: usize,
    extra_snapshots: &BTreeSet<usize>,
) -> Result<MonteCarloResult, ConfigError> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.n_runs)
        .map(|i| config.base_seed.wrapping_add(i as u64))
        .collect();

    let execute = |(idx, seed): (usize, u64)| {
        if idx == 0 {
            run_with_snapshots(config, seed, extra_snapshots)
        } else {
            run(config, seed)
        }
    };

    let runs: Vec<RunResult> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("worker pool");
        pool.install(|| {
            seeds
                .par_iter()
                .copied()
                .enumerate()
                .map(execute)
                .collect::<Result<Vec<_>, _>>()
        })?
    } else {
        seeds
            .iter()
            .copied()
            .enumerate()
            .map(execute)
            .collect::<Result<Vec<_>, _>>()?
    };

    Ok(MonteCarloResult {
        averaged: average_frames(&runs),
        runs,
    })
}

/// Frame-wise arithmetic mean of the metrics across runs, in run order.
pub fn average_frames(runs: &[RunResult]) -> Vec<MetricsFrame> {
    assert!(!runs.is_empty(), "averaging needs at least one run");
    let n_frames = runs[0].frames.len();
    let n_runs = runs.len() as f64;
    (0..n_frames)
        .map(|i| {
            let mut msd = 0.0;
            let mut mu = 0.0;
            let mut nbr = 0.0;
            let mut dist = 0.0;
            for r in runs {
                let f = &r.frames[i];
                msd += f.msd;
                mu += f.mean_mu;
                nbr += f.mean_neighbor_count;
                dist += f.mean_distance_to_target;
            }
            MetricsFrame {
                iteration: runs[0].frames[i].iteration,
                msd: msd / n_runs,
                mean_mu: mu / n_runs,
                mean_neighbor_count: nbr / n_runs,
                mean_distance_to_target: dist / n_runs,
                snapshots: None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk_config() -> SimConfig {
        SimConfig {
            n_runs: 1,
            ..SimConfig::default()
        }
    }

    #[test]
    fn init_positions_inside_cube() {
        let cfg = SimConfig::default();
        let nodes = init_network(&cfg, 3);
        assert_eq!(nodes.len(), 50);
        for node in &nodes {
            for c in node.motion.x.components() {
                assert!((0.0..=10.0).contains(c), "coordinate {c} outside cube");
            }
        }
    }

    #[test]
    fn init_velocities_unit_norm() {
        let cfg = SimConfig::default();
        for node in init_network(&cfg, 3) {
            assert!((node.motion.v.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn init_is_deterministic() {
        let cfg = SimConfig::default();
        let a = init_network(&cfg, 17);
        let b = init_network(&cfg, 17);
        for (na, nb) in a.iter().zip(&b) {
            assert_eq!(na.motion.x, nb.motion.x);
            assert_eq!(na.motion.v, nb.motion.v);
            assert_eq!(na.estimator.w, nb.estimator.w);
        }
    }

    #[test]
    fn init_3d_network_is_well_formed() {
        let cfg = SimConfig {
            dim: 3,
            target: RealVector::new(&[120.0, 120.0, 40.0]),
            w_init: RealVector::new(&[0.0, 0.0, 0.0]),
            n_nodes: 10,
            ..SimConfig::default()
        };
        cfg.validate().unwrap();
        for node in init_network(&cfg, 5) {
            assert_eq!(node.motion.x.dim(), 3);
            assert!((node.motion.v.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_node_baseline_converges_noiselessly() {
        let cfg = SimConfig {
            n_nodes: 1,
            kappa: 0.0,
            mode: Mode::BaselineAtc,
            ..desk_config()
        };
        let mut nodes = init_network(&cfg, 1);
        let initial_dist = nodes[0].motion.x.distance_to(&cfg.target);
        let initial_w_err = nodes[0].estimator.w.distance_to(&cfg.target);
        for _ in 0..cfg.n_iterations {
            step(&mut nodes, &cfg);
        }
        // The estimate closes in on the target and the node follows it; at
        // the baseline's fixed step the journey outlasts the run, so assert
        // substantial progress rather than arrival.
        let final_w_err = nodes[0].estimator.w.distance_to(&cfg.target);
        let final_dist = nodes[0].motion.x.distance_to(&cfg.target);
        assert!(final_w_err < initial_w_err / 10.0, "estimate error {final_w_err}");
        assert!(final_dist < initial_dist / 2.0, "distance {final_dist}");
    }

    #[test]
    fn node_at_target_is_a_fixed_point() {
        // At the target with a settled estimate and no residual motion the
        // seek term is zeroed and everything stays put.
        let cfg = SimConfig {
            n_nodes: 1,
            mode: Mode::BaselineAtc,
            ..desk_config()
        };
        let mut nodes = init_network(&cfg, 1);
        nodes[0].motion.x = cfg.target;
        nodes[0].motion.v = RealVector::zeros(2);
        nodes[0].motion.vg = RealVector::zeros(2);
        nodes[0].estimator.w = cfg.target;
        for _ in 0..40 {
            step(&mut nodes, &cfg);
        }
        assert_eq!(nodes[0].motion.x, cfg.target);
        assert_eq!(nodes[0].motion.v.norm(), 0.0);
        assert_eq!(nodes[0].estimator.w, cfg.target);
    }

    #[test]
    fn baseline_never_mutates_mu() {
        let cfg = SimConfig {
            mode: Mode::BaselineAtc,
            n_iterations: 25,
            ..desk_config()
        };
        let mut nodes = init_network(&cfg, 9);
        for _ in 0..cfg.n_iterations {
            step(&mut nodes, &cfg);
            for node in nodes.iter() {
                assert_eq!(node.estimator.mu, cfg.baseline_mu);
            }
        }
    }

    #[test]
    fn msd_of_perfect_estimates_is_zero() {
        let cfg = desk_config();
        let mut nodes = init_network(&cfg, 1);
        for node in nodes.iter_mut() {
            node.estimator.w = cfg.target;
        }
        assert_eq!(msd(&nodes, &cfg.target), 0.0);
    }

    #[test]
    fn msd_forced_arithmetic() {
        let cfg = SimConfig {
            n_nodes: 2,
            ..desk_config()
        };
        let mut nodes = init_network(&cfg, 1);
        nodes[0].estimator.w = cfg.target + RealVector::new(&[3.0, 0.0]);
        nodes[1].estimator.w = cfg.target + RealVector::new(&[0.0, 4.0]);
        assert!((msd(&nodes, &cfg.target) - 12.5).abs() < 1e-12);
    }

    #[test]
    fn msd_invariant_under_reordering_and_translation() {
        let cfg = SimConfig {
            n_nodes: 4,
            ..desk_config()
        };
        let mut nodes = init_network(&cfg, 8);
        for _ in 0..10 {
            step(&mut nodes, &cfg);
        }
        let base = msd(&nodes, &cfg.target);

        let mut reordered = nodes.clone();
        reordered.reverse();
        assert_eq!(msd(&reordered, &cfg.target), base);

        let shift = RealVector::new(&[13.0, -4.5]);
        let mut translated = nodes.clone();
        for node in translated.iter_mut() {
            node.estimator.w = node.estimator.w + shift;
            node.motion.x = node.motion.x + shift;
        }
        let moved = msd(&translated, &(cfg.target + shift));
        assert!((moved - base).abs() <= 1e-9 * base.max(1.0));
    }

    #[test]
    fn run_is_bit_deterministic() {
        let cfg = SimConfig {
            n_iterations: 40,
            ..desk_config()
        };
        let a = run(&cfg, 21).unwrap();
        let b = run(&cfg, 21).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn run_zero_iterations_gives_empty_frames() {
        let cfg = SimConfig {
            n_iterations: 0,
            ..desk_config()
        };
        assert!(run(&cfg, 1).unwrap().frames.is_empty());
    }

    #[test]
    fn proposed_run_closes_most_of_the_distance() {
        let result = run(&desk_config(), 1).unwrap();
        let first = result.frames.first().unwrap().mean_distance_to_target;
        let last = result.frames.last().unwrap().mean_distance_to_target;
        assert!(last < first / 10.0, "first {first}, last {last}");
    }

    #[test]
    fn proposed_mean_mu_stays_clamped() {
        let cfg = desk_config();
        let result = run(&cfg, 4).unwrap();
        for frame in &result.frames {
            assert!(frame.mean_mu >= cfg.step_policy.mu_min - 1e-12);
            assert!(frame.mean_mu <= cfg.step_policy.mu_max + 1e-12);
        }
    }

    #[test]
    fn baseline_neighbor_count_capped() {
        let cfg = SimConfig {
            mode: Mode::BaselineAtc,
            n_iterations: 60,
            ..desk_config()
        };
        let result = run(&cfg, 2).unwrap();
        for frame in &result.frames {
            assert!(frame.mean_neighbor_count >= 1.0);
            assert!(frame.mean_neighbor_count <= (cfg.baseline_k + 1) as f64);
        }
    }

    #[test]
    fn monte_carlo_single_run_equals_that_run() {
        let cfg = SimConfig {
            n_iterations: 30,
            ..desk_config()
        };
        let mc = monte_carlo(&cfg, 1).unwrap();
        let direct = run(&cfg, cfg.base_seed).unwrap();
        for (avg, frame) in mc.averaged.iter().zip(&direct.frames) {
            assert_eq!(avg.msd, frame.msd);
            assert_eq!(avg.mean_mu, frame.mean_mu);
        }
    }

    #[test]
    fn monte_carlo_parallel_matches_serial() {
        let cfg = SimConfig {
            n_runs: 6,
            n_iterations: 30,
            ..SimConfig::default()
        };
        let serial = monte_carlo(&cfg, 1).unwrap();
        let parallel = monte_carlo(&cfg, 4).unwrap();
        assert_eq!(serial.runs, parallel.runs);
        for (a, b) in serial.averaged.iter().zip(&parallel.averaged) {
            assert_eq!(a.msd.to_bits(), b.msd.to_bits());
        }
    }

    #[test]
    fn averaging_is_permutation_tolerant() {
        let cfg = SimConfig {
            n_runs: 5,
            n_iterations: 20,
            ..SimConfig::default()
        };
        let mc = monte_carlo(&cfg, 1).unwrap();
        let mut reversed = mc.runs.clone();
        reversed.reverse();
        let avg_rev = average_frames(&reversed);
        for (a, b) in mc.averaged.iter().zip(&avg_rev) {
            assert!((a.msd - b.msd).abs() <= 1e-9 * a.msd.max(1.0));
        }
    }

    #[test]
    fn small_batch_msd_trace_decreases() {
        let cfg = SimConfig {
            n_runs: 3,
            n_iterations: 150,
            ..SimConfig::default()
        };
        let mc = monte_carlo(&cfg, 1).unwrap();
        let msd_at = |i: usize| mc.averaged[i - 1].msd;
        assert!(msd_at(50) < msd_at(1));
        assert!(msd_at(150) < msd_at(50));
    }

    #[test]
    fn snapshot_scheduling() {
        let cfg = SimConfig {
            n_iterations: 10,
            snapshot_every: 5,
            ..desk_config()
        };
        let extra: BTreeSet<usize> = [3].into();
        let result = run_with_snapshots(&cfg, 1, &extra).unwrap();
        for frame in &result.frames {
            let expected = frame.iteration % 5 == 0 || frame.iteration == 3;
            assert_eq!(frame.snapshots.is_some(), expected);
            if let Some(snaps) = &frame.snapshots {
                assert_eq!(snaps.len(), cfg.n_nodes);
            }
        }
    }
}
