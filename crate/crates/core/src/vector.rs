//! Fixed-dimension real vectors and unit direction vectors.
//!
//! Every vector in a simulation shares one dimension, either 2 or 3. The
//! type stores components inline so vectors stay `Copy` and allocation-free.

use std::fmt;
use std::ops::{Add, Sub};

/// Distance below which two points are treated as coincident.
pub const COINCIDENCE_EPSILON: f64 = 1e-9;

/// Tolerance on the unit-norm invariant of [`DirectionVector`].
pub const UNIT_NORM_TOLERANCE: f64 = 1e-12;

/// A 2- or 3-dimensional real vector (position, velocity, or estimate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealVector {
    components: [f64; 3],
    dim: usize,
}

impl RealVector {
    /// Builds a vector from a slice of 2 or 3 finite components.
    ///
    /// Panics if the slice length is not 2 or 3. Finiteness is the caller's
    /// responsibility at construction boundaries (config loading validates
    /// user input; internal arithmetic preserves it).
    pub fn new(components: &[f64]) -> Self {
        assert!(
            components.len() == 2 || components.len() == 3,
            "vector dimension must be 2 or 3, got {}",
            components.len()
        );
        let mut buf = [0.0; 3];
        buf[..components.len()].copy_from_slice(components);
        Self {
            components: buf,
            dim: components.len(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 3, "vector dimension must be 2 or 3");
        Self {
            components: [0.0; 3],
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components[..self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = *self;
        for c in &mut out.components[..out.dim] {
            *c *= factor;
        }
        out
    }

    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch in dot product");
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn distance_to(&self, other: &Self) -> f64 {
        (*other - *self).norm()
    }

    pub fn distance_squared_to(&self, other: &Self) -> f64 {
        (*other - *self).norm_squared()
    }
}

impl Add for RealVector {
    type Output = RealVector;

    fn add(self, rhs: RealVector) -> RealVector {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in addition");
        let mut out = self;
        for (c, r) in out.components[..out.dim].iter_mut().zip(rhs.components()) {
            *c += r;
        }
        out
    }
}

impl Sub for RealVector {
    type Output = RealVector;

    fn sub(self, rhs: RealVector) -> RealVector {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in subtraction");
        let mut out = self;
        for (c, r) in out.components[..out.dim].iter_mut().zip(rhs.components()) {
            *c -= r;
        }
        out
    }
}

impl fmt::Display for RealVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.components().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// A unit-norm direction (bearing) vector.
///
/// Holds `‖u‖ = 1` within [`UNIT_NORM_TOLERANCE`] by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionVector(RealVector);

impl DirectionVector {
    /// Direction from azimuth and elevation angles (radians).
    ///
    /// In 3D the result is `[cos(az)cos(el), sin(az)cos(el), sin(el)]`. In 2D
    /// the elevation is ignored and the result is `[cos(az), sin(az)]`.
    pub fn from_angles(azimuth: f64, elevation: f64, dim: usize) -> Self {
        let v = match dim {
            2 => RealVector::new(&[azimuth.cos(), azimuth.sin()]),
            3 => RealVector::new(&[
                azimuth.cos() * elevation.cos(),
                azimuth.sin() * elevation.cos(),
                elevation.sin(),
            ]),
            d => panic!("direction dimension must be 2 or 3, got {d}"),
        };
        // Trig identities keep the norm at 1 up to rounding; renormalize to
        // pin the invariant tolerance.
        Self(v.scale(1.0 / v.norm()))
    }

    /// Unit vector pointing from `from` toward `to`, or `None` when the two
    /// points are within `epsilon` of each other.
    pub fn toward(from: &RealVector, to: &RealVector, epsilon: f64) -> Option<Self> {
        let delta = *to - *from;
        let dist = delta.norm();
        if dist <= epsilon {
            None
        } else {
            Some(Self(delta.scale(1.0 / dist)))
        }
    }

    /// The unit vector along the first coordinate axis.
    pub fn first_axis(dim: usize) -> Self {
        let mut v = RealVector::zeros(dim);
        v.components[0] = 1.0;
        Self(v)
    }

    pub fn as_vector(&self) -> &RealVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn dot(&self, other: &RealVector) -> f64 {
        self.0.dot(other)
    }

    /// The direction scaled by a scalar, as a plain vector (`uᵀ·s`).
    pub fn scaled(&self, factor: f64) -> RealVector {
        self.0.scale(factor)
    }

    pub fn negated(&self) -> Self {
        Self(self.0.scale(-1.0))
    }
}
