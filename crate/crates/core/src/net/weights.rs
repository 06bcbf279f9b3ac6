use std::ops::Range;

use crate::error::{Error, Result};

use super::topology::{Topology, WeightIndex};

/// All weights of a network in the flat layout described on [`Topology`].
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector {
    topology: Topology,
    storage: Vec<f64>,
}

impl WeightVector {
    pub fn zeros(topology: Topology) -> Self {
        Self { storage: vec![0.0; topology.weight_count()], topology }
    }

    pub fn from_vec(topology: Topology, storage: Vec<f64>) -> Result<Self> {
        if storage.len() != topology.weight_count() {
            return Err(Error::DimensionMismatch { expected: topology.weight_count(), got: storage.len() });
        }
        Ok(Self { topology, storage })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.storage
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.storage
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.storage
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// # Panics
    /// If the index is not a valid weight of this topology.
    pub fn get(&self, idx: WeightIndex) -> f64 {
        self.storage[self.topology.offset(idx).expect("weight index out of range")]
    }

    /// # Panics
    /// If the index is not a valid weight of this topology.
    pub fn set(&mut self, idx: WeightIndex, value: f64) {
        let o = self.topology.offset(idx).expect("weight index out of range");
        self.storage[o] = value;
    }

    pub fn outer_range(&self) -> Range<usize> {
        self.topology.outer_offset()..self.storage.len()
    }

    pub fn outer(&self) -> &[f64] {
        &self.storage[self.topology.outer_offset()..]
    }

    pub fn outer_mut(&mut self) -> &mut [f64] {
        let o = self.topology.outer_offset();
        &mut self.storage[o..]
    }

    /// Inner weights (levels `0..depth`) of all subnetworks.
    pub fn inner(&self) -> &[f64] {
        &self.storage[..self.topology.outer_offset()]
    }

    pub fn inner_mut(&mut self) -> &mut [f64] {
        let o = self.topology.outer_offset();
        &mut self.storage[..o]
    }

    /// Weight block of subnetwork `k` (0-based).
    pub fn subnet(&self, k: usize) -> &[f64] {
        let b = self.topology.block_len();
        &self.storage[k * b..(k + 1) * b]
    }

    pub fn subnet_mut(&mut self, k: usize) -> &mut [f64] {
        let b = self.topology.block_len();
        &mut self.storage[k * b..(k + 1) * b]
    }

    pub fn norm(&self) -> f64 {
        self.storage.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Euclidean distance to another vector of the same shape.
    pub fn distance(&self, other: &WeightVector) -> f64 {
        debug_assert_eq!(self.topology, other.topology);
        self.storage.iter().zip(&other.storage).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}
