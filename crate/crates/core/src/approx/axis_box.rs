use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-parallel box `[u1, v1] x ... x [ud, vd]` with `u < v` in every
/// coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl AxisBox {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: u.len(), got: v.len() });
        }
        if u.is_empty() {
            return Err(Error::InvalidArgument("box needs at least one coordinate".into()));
        }
        if u.iter().zip(&v).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidArgument("box needs finite u < v in every coordinate".into()));
        }
        Ok(Self { u, v })
    }

    /// `[lo, hi]^d`.
    pub fn cube(d: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; d], vec![hi; d])
    }

    pub fn d(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn center(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn min_side(&self) -> f64 {
        self.u.iter().zip(&self.v).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min)
    }

    pub fn volume(&self) -> f64 {
        self.u.iter().zip(&self.v).map(|(a, b)| b - a).product()
    }

    /// Closed-box membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.u.iter().zip(&self.v)).all(|(xi, (a, b))| *a <= *xi && *xi <= *b)
    }

    /// Box shrunk (`by > 0`) or grown (`by < 0`) by `|by|` on every side;
    /// `None` if it becomes empty.
    pub fn shrink(&self, by: f64) -> Option<Self> {
        let u: Vec<f64> = self.u.iter().map(|a| a + by).collect();
        let v: Vec<f64> = self.v.iter().map(|b| b - by).collect();
        Self::new(u, v).ok()
    }

    /// Intersection with positive volume, if any.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        if self.d() != other.d() {
            return None;
        }
        let u = self.u.iter().zip(&other.u).map(|(a, b)| a.max(*b)).collect();
        let v = self.v.iter().zip(&other.v).map(|(a, b)| a.min(*b)).collect();
        Self::new(u, v).ok()
    }
}
