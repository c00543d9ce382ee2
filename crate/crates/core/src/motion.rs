//! Node mobility: velocity consensus, the three-term velocity rule, and the
//! location integrator.
//!
//! The velocity of a node blends three influences: a unit-magnitude pull
//! toward its own target estimate, the diffusion-estimated group velocity
//! (coherence), and a spacing term that pushes neighbor pairs toward the
//! desired separation `r` (repulsive inside `r`, attractive outside).

use crate::estimation::{combine, CombinationWeights};
use crate::vector::RealVector;

/// Parameters of the motion model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionPolicy {
    /// Weight of the target-seeking term.
    pub xi1: f64,
    /// Weight of the group-velocity (coherence) term.
    pub xi2: f64,
    /// Weight of the spacing/collision-avoidance term.
    pub xi3: f64,
    /// Desired inter-node spacing.
    pub r: f64,
    /// Step size of the velocity-consensus diffusion.
    pub delta: f64,
    /// Integration time step.
    pub dt: f64,
}

impl MotionPolicy {
    pub fn validate(&self) -> Result<(), String> {
        let all = [self.xi1, self.xi2, self.xi3, self.r, self.delta, self.dt];
        if all.iter().any(|v| !v.is_finite()) {
            return Err("motion policy values must be finite".into());
        }
        if self.xi1 < 0.0 || self.xi2 < 0.0 || self.xi3 < 0.0 {
            return Err("motion.xi1/xi2/xi3 must be >= 0".into());
        }
        if self.r <= 0.0 {
            return Err(format!("motion.r must be > 0, got {}", self.r));
        }
        if self.delta <= 0.0 {
            return Err(format!("motion.delta must be > 0, got {}", self.delta));
        }
        if self.dt <= 0.0 {
            return Err(format!("motion.dt must be > 0, got {}", self.dt));
        }
        Ok(())
    }
}

/// Per-node motion state.
#[derive(Debug, Clone)]
pub struct MotionState {
    /// Location.
    pub x: RealVector,
    /// Velocity.
    pub v: RealVector,
    /// Local estimate of the group velocity.
    pub vg: RealVector,
}

/// Consensus adaptation: `s = vg_prev + δ Σ_ℓ c_ℓ (v_ℓ − vg_prev)`.
pub fn consensus_adapt(
    vg_prev: &RealVector,
    delta: f64,
    neighbor_velocities: &[RealVector],
    c_weights: &CombinationWeights,
) -> RealVector {
    assert_eq!(
        neighbor_velocities.len(),
        c_weights.len(),
        "weights misaligned with velocities"
    );
    let mut pull = RealVector::zeros(vg_prev.dim());
    for (v, c) in neighbor_velocities.iter().zip(c_weights.as_slice()) {
        pull = pull + (*v - *vg_prev).scale(*c);
    }
    *vg_prev + pull.scale(delta)
}

/// Consensus combination: convex combination of neighbor intermediates.
pub fn consensus_combine(
    intermediates: &[RealVector],
    a_weights: &CombinationWeights,
) -> RealVector {
    combine(intermediates, a_weights)
}

/// Three-term velocity rule.
///
/// `v = ξ₁·(w − x)/‖w − x‖ + ξ₂·vg + ξ₃·Σ_ℓ (‖x_ℓ − x‖ − r)·(x_ℓ − x)/‖x_ℓ − x‖`
///
/// The seek term is zeroed when the estimate coincides with the location
/// (within `epsilon`); coincident neighbor pairs are skipped in the spacing
/// sum.
pub fn update_velocity(
    w_prev: &RealVector,
    x_prev: &RealVector,
    vg_prev: &RealVector,
    neighbor_positions: &[RealVector],
    policy: &MotionPolicy,
    epsilon: f64,
) -> RealVector {
    let dim = x_prev.dim();

    let mut v = vg_prev.scale(policy.xi2);

    let seek = *w_prev - *x_prev;
    let seek_dist = seek.norm();
    if seek_dist > epsilon {
        v = v + seek.scale(policy.xi1 / seek_dist);
    }

    let mut spacing = RealVector::zeros(dim);
    for xl in neighbor_positions {
        let offset = *xl - *x_prev;
        let dist = offset.norm();
        if dist <= epsilon {
            continue;
        }
        spacing = spacing + offset.scale((dist - policy.r) / dist);
    }
    v + spacing.scale(policy.xi3)
}

/// Euler location step: `x + v·Δt`.
pub fn update_location(x_prev: &RealVector, v: &RealVector, dt: f64) -> RealVector {
    *x_prev + v.scale(dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v2(x: f64, y: f64) -> RealVector {
        RealVector::new(&[x, y])
    }

    fn policy() -> MotionPolicy {
        MotionPolicy {
            xi1: 0.8,
            xi2: 0.5,
            xi3: 0.8,
            r: 2.0,
            delta: 0.5,
            dt: 0.5,
        }
    }

    #[test]
    fn consensus_adapt_fixed_point() {
        let vg = v2(1.5, -0.5);
        let out = consensus_adapt(&vg, 0.5, &[vg, vg], &CombinationWeights::uniform(2));
        assert!((out - vg).norm() < 1e-12);
    }

    #[test]
    fn consensus_adapt_full_step_gives_mean() {
        let vg = v2(0.0, 0.0);
        let vels = [v2(2.0, 0.0), v2(0.0, 2.0)];
        let out = consensus_adapt(&vg, 1.0, &vels, &CombinationWeights::uniform(2));
        assert!((out - v2(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn consensus_adapt_zero_step_is_identity() {
        let vg = v2(3.0, 4.0);
        let out = consensus_adapt(
            &vg,
            0.0,
            &[v2(-1.0, -1.0)],
            &CombinationWeights::uniform(1),
        );
        assert_eq!(out, vg);
    }

    #[test]
    fn consensus_combine_single_member_identity() {
        let s = v2(0.5, 0.25);
        assert_eq!(
            consensus_combine(&[s], &CombinationWeights::uniform(1)),
            s
        );
    }

    #[test]
    fn velocity_seek_only() {
        let v = update_velocity(
            &v2(10.0, 0.0),
            &v2(0.0, 0.0),
            &v2(0.0, 0.0),
            &[],
            &policy(),
            1e-9,
        );
        assert!((v - v2(0.8, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn velocity_spacing_term_vanishes_at_equilibrium() {
        let p = policy();
        let quiet = MotionPolicy { xi1: 0.0, xi2: 0.0, ..p };
        let v = update_velocity(
            &v2(0.0, 0.0),
            &v2(0.0, 0.0),
            &v2(0.0, 0.0),
            &[v2(2.0, 0.0)],
            &quiet,
            1e-9,
        );
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn velocity_three_term_arithmetic() {
        // Seek along +y, group velocity along +x, one neighbor 4 away on +x
        // with r = 2: v = 0.8·[0,1] + 0.5·[1,0] + 0.8·2·[1,0] = [2.1, 0.8].
        let v = update_velocity(
            &v2(0.0, 10.0),
            &v2(0.0, 0.0),
            &v2(1.0, 0.0),
            &[v2(4.0, 0.0)],
            &policy(),
            1e-9,
        );
        assert!((v - v2(2.1, 0.8)).norm() < 1e-12, "got {v}");
    }

    #[test]
    fn velocity_seek_zeroed_at_coincidence() {
        let p = v2(5.0, 5.0);
        let v = update_velocity(&p, &p, &v2(0.0, 0.0), &[], &policy(), 1e-9);
        assert_eq!(v.norm(), 0.0);
    }

    #[test]
    fn location_zero_velocity_is_identity() {
        let x = v2(1.0, 2.0);
        assert_eq!(update_location(&x, &v2(0.0, 0.0), 0.5), x);
    }

    #[test]
    fn location_euler_arithmetic() {
        let x = update_location(&v2(0.0, 0.0), &v2(2.0, -2.0), 0.5);
        assert!((x - v2(1.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn location_two_half_steps_equal_one_full_step() {
        let v = v2(3.0, -1.5);
        let x0 = v2(1.0, 1.0);
        let twice = update_location(&update_location(&x0, &v, 0.5), &v, 0.5);
        let once = update_location(&x0, &v, 1.0);
        assert!((twice - once).norm() < 1e-12);
    }

    #[test]
    fn coherent_swarm_keeps_identical_velocities() {
        // Collinear nodes spaced exactly r, shared vg, target on the same
        // line: every node gets the same velocity (spacing terms vanish,
        // seek terms are parallel).
        let p = policy();
        let shared_vg = v2(1.0, 0.5);
        let w = v2(100.0, 0.0);
        let positions = [v2(0.0, 0.0), v2(2.0, 0.0), v2(4.0, 0.0)];
        let mut outputs = Vec::new();
        for (k, x) in positions.iter().enumerate() {
            let others: Vec<RealVector> = positions
                .iter()
                .enumerate()
                .filter(|(j, xj)| *j != k && x.distance_to(xj) <= 2.0 + 1e-9)
                .map(|(_, xj)| *xj)
                .collect();
            outputs.push(update_velocity(&w, x, &shared_vg, &others, &p, 1e-9));
        }
        for v in &outputs {
            assert!((*v - outputs[0]).norm() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn spacing_term_signs(
            nx in -10.0f64..10.0,
            ny in -10.0f64..10.0,
        ) {
            let p = policy();
            let quiet = MotionPolicy { xi1: 0.0, xi2: 0.0, ..p };
            let origin = v2(0.0, 0.0);
            let neighbor = v2(nx, ny);
            let dist = neighbor.norm();
            prop_assume!(dist > 1e-6);
            let v = update_velocity(&origin, &origin, &origin, &[neighbor], &quiet, 1e-9);
            let toward_neighbor = v.dot(&neighbor);
            if dist < p.r {
                // Closer than r: push away.
                prop_assert!(toward_neighbor < 0.0);
            } else if dist > p.r {
                // Farther than r: pull toward.
                prop_assert!(toward_neighbor > 0.0);
            }
        }

        #[test]
        fn consensus_combine_convex_hull(
            ss in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..6)
        ) {
            let vecs: Vec<RealVector> = ss.iter().map(|(x, y)| v2(*x, *y)).collect();
            let out = consensus_combine(&vecs, &CombinationWeights::uniform(vecs.len()));
            for axis in 0..2 {
                let lo = vecs.iter().map(|v| v.components()[axis]).fold(f64::INFINITY, f64::min);
                let hi = vecs.iter().map(|v| v.components()[axis]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(out.components()[axis] >= lo - 1e-9);
                prop_assert!(out.components()[axis] <= hi + 1e-9);
            }
        }
    }
}
