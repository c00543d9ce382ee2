//! Diffusion LMS target estimation with a distance-driven variable step
//! size and variance-ranked selective cooperation.
//!
//! Estimation follows the adapt-then-combine ordering. Per node `k` with
//! neighbor set `N_k` and adaptation weights `c`:
//!
//! ```text
//! m_k = w_k + μ_k Σ_{ℓ∈N_k} c_ℓ uₗᵀ (d_ℓ − u_ℓ·w_k)    (adaptation)
//! w_k ← Σ_{ℓ∈N_k} a_ℓ m_ℓ                              (combination)
//! ```
//!
//! The variable step-size controller classifies each node as far from or
//! near to the target by comparing the squared estimate-to-node distance
//! against a threshold `s`. Far nodes grow the step size geometrically up to
//! `μ_max`; near nodes shrink it toward `μ_min` via
//! `μ ← max(β·μ + γ·e², μ_min)` with `e` the node's own innovation.
//!
//! Selective cooperation keeps a neighbor only when its tracked noise
//! variance does not exceed the node's own, so each node consults the
//! better-informed part of its neighborhood and communication drops.

use crate::vector::{DirectionVector, RealVector};

/// Parameters of the variable step-size controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizePolicy {
    /// Growth factor applied while far from the target (> 1).
    pub alpha: f64,
    /// Decay factor applied while near the target (in (0, 1)).
    pub beta: f64,
    /// Weight of the squared innovation in the near-field update (≥ 0).
    pub gamma: f64,
    /// Lower clamp for the step size.
    pub mu_min: f64,
    /// Upper clamp for the step size.
    pub mu_max: f64,
    /// Far-field threshold on the squared estimate-to-node distance.
    pub far_field_threshold: f64,
}

impl StepSizePolicy {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            self.alpha,
            self.beta,
            self.gamma,
            self.mu_min,
            self.mu_max,
            self.far_field_threshold,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err("step policy values must be finite".into());
        }
        if self.alpha <= 1.0 {
            return Err(format!("step.alpha must be > 1, got {}", self.alpha));
        }
        if self.beta <= 0.0 || self.beta >= 1.0 {
            return Err(format!("step.beta must be in (0, 1), got {}", self.beta));
        }
        if self.gamma < 0.0 {
            return Err(format!("step.gamma must be >= 0, got {}", self.gamma));
        }
        if self.mu_min <= 0.0 || self.mu_max <= 0.0 || self.mu_min >= self.mu_max {
            return Err(format!(
                "step sizes must satisfy 0 < mu_min < mu_max, got mu_min={} mu_max={}",
                self.mu_min, self.mu_max
            ));
        }
        if self.far_field_threshold <= 0.0 {
            return Err(format!(
                "step.far_field_threshold must be > 0, got {}",
                self.far_field_threshold
            ));
        }
        Ok(())
    }
}

/// Per-node estimator state.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    /// Current target estimate.
    pub w: RealVector,
    /// Current step size.
    pub mu: f64,
    /// Tracked measurement-noise variance; `None` until the first residual
    /// seeds it.
    pub sigma2_hat: Option<f64>,
}

/// Nonnegative combination weights over a neighbor list, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationWeights {
    weights: Vec<f64>,
}

impl CombinationWeights {
    /// Uniform weights `1/n` over a nonempty set of `n` members.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "combination weights need a nonempty set");
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// True when the squared distance between the estimate and the node
/// location strictly exceeds the far-field threshold.
pub fn is_far_field(w_est: &RealVector, x: &RealVector, threshold: f64) -> bool {
    w_est.distance_squared_to(x) > threshold
}

/// Advances the step size one iteration.
///
/// Far branch: `min(α·μ_prev, μ_max)`. Near branch:
/// `β·μ_prev + γ·e²` clamped into `[μ_min, μ_max]`; the upper clamp guards
/// against divergence when a large innovation hits the `γ·e²` term.
pub fn update_step_size(mu_prev: f64, far: bool, e: f64, policy: &StepSizePolicy) -> f64 {
    if far {
        (policy.alpha * mu_prev).min(policy.mu_max)
    } else {
        (policy.beta * mu_prev + policy.gamma * e * e)
            .clamp(policy.mu_min, policy.mu_max)
    }
}

/// Innovation of a measurement against the previous estimate: `d − u·w`.
pub fn a_priori_error(d: f64, u: &DirectionVector, w_prev: &RealVector) -> f64 {
    d - u.dot(w_prev)
}

/// Exponentially weighted tracker of the squared innovation:
/// `η·σ̂²_prev + (1 − η)·e²`.
pub fn update_variance_estimate(sigma2_prev: f64, e: f64, eta: f64) -> f64 {
    eta * sigma2_prev + (1.0 - eta) * e * e
}

/// Selective neighbor set of node `k`: every node within `radius` whose
/// variance estimate does not exceed `k`'s own. `k` always qualifies.
///
/// Returns ascending node ids.
pub fn select_neighbors(
    k: usize,
    positions: &[RealVector],
    variances: &[f64],
    radius: f64,
) -> Vec<usize> {
    let own = variances[k];
    positions
        .iter()
        .enumerate()
        .filter(|(j, x)| {
            *j == k || (positions[k].distance_to(x) <= radius && variances[*j] <= own)
        })
        .map(|(j, _)| j)
        .collect()
}

/// Baseline neighbor set of node `k`: itself plus up to `k_nearest` closest
/// other nodes within `radius`. Distance ties break toward the lower id.
///
/// Returns ascending node ids.
pub fn knn_neighbors(
    k: usize,
    positions: &[RealVector],
    k_nearest: usize,
    radius: f64,
) -> Vec<usize> {
    assert!(k_nearest >= 1, "nearest-neighbor count must be >= 1");
    let mut candidates: Vec<(f64, usize)> = positions
        .iter()
        .enumerate()
        .filter(|(j, x)| *j != k && positions[k].distance_to(x) <= radius)
        .map(|(j, x)| (positions[k].distance_to(x), j))
        .collect();
    candidates.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    candidates.truncate(k_nearest);

    let mut out: Vec<usize> = candidates.into_iter().map(|(_, j)| j).collect();
    out.push(k);
    out.sort_unstable();
    out
}

/// Proposed-mode neighbor rule: the variance ranking of [`select_neighbors`]
/// applied to the `k_nearest`-closest-within-`radius` candidates that both
/// algorithm variants draw from. A candidate survives only when its tracked
/// variance does not exceed the node's own, so the consulted set shrinks to
/// the better-informed part of the local neighborhood.
///
/// Returns ascending node ids; `k` is always a member.
pub fn selective_knn_neighbors(
    k: usize,
    positions: &[RealVector],
    variances: &[f64],
    k_nearest: usize,
    radius: f64,
) -> Vec<usize> {
    let mut out = knn_neighbors(k, positions, k_nearest, radius);
    out.retain(|&j| j == k || variances[j] <= variances[k]);
    out
}

/// Adaptation step: `m = w_prev + μ Σ_ℓ c_ℓ uₗᵀ(d_ℓ − u_ℓ·w_prev)`.
///
/// `data` holds one `(d, u)` pair per neighbor, aligned with `c_weights`.
pub fn adapt(
    w_prev: &RealVector,
    mu: f64,
    data: &[(f64, DirectionVector)],
    c_weights: &CombinationWeights,
) -> RealVector {
    assert_eq!(data.len(), c_weights.len(), "weights misaligned with data");
    let mut gradient = RealVector::zeros(w_prev.dim());
    for ((d, u), c) in data.iter().zip(c_weights.as_slice()) {
        let innovation = a_priori_error(*d, u, w_prev);
        gradient = gradient + u.scaled(c * innovation);
    }
    *w_prev + gradient.scale(mu)
}

/// Combination step: convex combination of neighbor intermediates.
pub fn combine(intermediates: &[RealVector], a_weights: &CombinationWeights) -> RealVector {
    assert_eq!(
        intermediates.len(),
        a_weights.len(),
        "weights misaligned with intermediates"
    );
    assert!(!intermediates.is_empty(), "combine needs a nonempty set");
    let mut out = RealVector::zeros(intermediates[0].dim());
    for (m, a) in intermediates.iter().zip(a_weights.as_slice()) {
        out = out + m.scale(*a);
    }
    out
}
