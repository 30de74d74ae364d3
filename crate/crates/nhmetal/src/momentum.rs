//! Lattice momenta on the Brillouin torus `[-π, π)^d`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Wraps a single coordinate into the canonical interval `[-π, π)`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    // floating-point rounding can land exactly on +π
    if w >= PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// A point of the `d`-torus, `d ∈ {2, 3}`. Coordinates are stored as given
/// (possibly unwrapped, for traced curves); [`Momentum::canonical`] maps each
/// axis into `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Momentum {
    pub coords: [f64; 3],
    pub dim: usize,
}

impl Momentum {
    pub fn new2(kx: f64, ky: f64) -> Self {
        Momentum { coords: [kx, ky, 0.0], dim: 2 }
    }

    pub fn new3(kx: f64, ky: f64, kz: f64) -> Self {
        Momentum { coords: [kx, ky, kz], dim: 3 }
    }

    pub fn from_slice(c: &[f64]) -> Self {
        assert!(c.len() == 2 || c.len() == 3, "momentum dimension must be 2 or 3");
        let mut coords = [0.0; 3];
        coords[..c.len()].copy_from_slice(c);
        Momentum { coords, dim: c.len() }
    }

    pub fn canonical(&self) -> Self {
        let mut m = *self;
        for a in 0..self.dim {
            m.coords[a] = wrap_angle(m.coords[a]);
        }
        m
    }

    /// Euclidean distance on the torus (shortest-image convention).
    pub fn torus_dist(&self, other: &Momentum) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = 0.0;
        for a in 0..self.dim {
            let d = wrap_angle(self.coords[a] - other.coords[a]);
            s += d * d;
        }
        s.sqrt()
    }

    /// Plain Euclidean distance in unwrapped coordinates.
    pub fn dist(&self, other: &Momentum) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim {
            let d = self.coords[a] - other.coords[a];
            s += d * d;
        }
        s.sqrt()
    }

    pub fn add_scaled(&self, dir: &[f64; 3], h: f64) -> Self {
        let mut m = *self;
        for a in 0..self.dim {
            m.coords[a] += h * dir[a];
        }
        m
    }
}
