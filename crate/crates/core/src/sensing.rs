//! Noisy range sensing of the target.
//!
//! Each node observes the target along the true bearing. The scalar
//! measurement is `d = u·target + n` with `n` zero-mean Gaussian whose
//! variance grows with the squared node-to-target distance,
//! `σ² = κ‖x − target‖²`, mirroring signal power decaying with propagation
//! distance.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::vector::{DirectionVector, RealVector, COINCIDENCE_EPSILON};

/// One node's measurement of the target for a single iteration.
#[derive(Debug, Clone, Copy)]
pub struct Measurement {
    /// Unit bearing from the node toward the target.
    pub u: DirectionVector,
    /// Transformed scalar measurement, `u·target + noise`.
    pub d: f64,
    /// The noise variance this sample was drawn with.
    pub sigma2_true: f64,
}

/// Measurement noise variance at position `x`: `κ‖x − target‖²`.
pub fn noise_variance(x: &RealVector, target: &RealVector, kappa: f64) -> f64 {
    kappa * x.distance_squared_to(target)
}

/// Draws one measurement of `target` from a node at `x`.
///
/// When the node sits on the target (within the coincidence epsilon) the
/// bearing is pinned to the first axis and the measurement is exact, which
/// is consistent with the variance model giving zero at zero distance. The
/// Gaussian draw is consumed unconditionally so that the per-node random
/// stream advances at a fixed rate regardless of geometry.
pub fn measure<R: Rng + ?Sized>(
    x: &RealVector,
    target: &RealVector,
    kappa: f64,
    rng: &mut R,
) -> Measurement {
    let z: f64 = rng.sample(StandardNormal);
    let u = DirectionVector::toward(x, target, COINCIDENCE_EPSILON)
        .unwrap_or_else(|| DirectionVector::first_axis(x.dim()));
    let sigma2 = noise_variance(x, target, kappa);
    Measurement {
        u,
        d: u.dot(target) + z * sigma2.sqrt(),
        sigma2_true: sigma2,
    }
}
