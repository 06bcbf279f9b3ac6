//! Estimator for interaction models: one group of parallel networks per
//! coordinate subset `I` of size `d*`, each seeing only `x_I`, with the group
//! outputs summed.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{backprop_subnet, eval_subnet, fill_uniform_levels, HyperParams, Topology, WeightVector};
use crate::optim::Model;

/// Default cap on the number of coordinate subsets.
pub const DEFAULT_GROUP_LIMIT: usize = 256;

/// All subsets of `{1, ..., d}` of size `d_star` (1-based), in lexicographic
/// order. Requires `1 <= d_star < d`.
pub fn enumerate_subsets(d: usize, d_star: usize) -> Result<Vec<Vec<usize>>> {
    if d_star < 1 || d_star >= d {
        return Err(Error::InvalidArgument(format!("need 1 <= d* < d, got d = {d}, d* = {d_star}")));
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=d_star).collect();
    loop {
        out.push(cur.clone());
        // advance the rightmost position that can still move
        let Some(pos) = (0..d_star).rev().find(|&i| cur[i] < d - (d_star - 1 - i)) else {
            return Ok(out);
        };
        cur[pos] += 1;
        for i in pos + 1..d_star {
            cur[i] = cur[i - 1] + 1;
        }
    }
}

/// `binomial(d, k)`, saturating.
pub fn binomial(d: usize, k: usize) -> usize {
    if k > d {
        return 0;
    }
    let k = k.min(d - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (d - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Layout of the interaction estimator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub d: usize,
    pub d_star: usize,
    pub subsets: Vec<Vec<usize>>,
    /// Shape of each group; `group.d == d_star`.
    pub group: Topology,
}

impl InteractionSpec {
    /// All `binomial(d, d*)` subsets with `1 <= d* < d`, each served by
    /// `subnets` networks of the given depth and width.
    pub fn new(d: usize, d_star: usize, depth: usize, width: usize, subnets: usize) -> Result<Self> {
        Self::with_limit(d, d_star, depth, width, subnets, DEFAULT_GROUP_LIMIT)
    }

    pub fn with_limit(
        d: usize,
        d_star: usize,
        depth: usize,
        width: usize,
        subnets: usize,
        limit: usize,
    ) -> Result<Self> {
        if d_star >= 1 && d_star < d {
            let count = binomial(d, d_star);
            if count > limit {
                return Err(Error::TooManyGroups { count, limit });
            }
        }
        let subsets = enumerate_subsets(d, d_star)?;
        Self::from_subsets(d, subsets, Topology::new(d_star, depth, width, subnets)?)
    }

    /// Explicit subsets, which may include the full set `{1, ..., d}`.
    pub fn from_subsets(d: usize, subsets: Vec<Vec<usize>>, group: Topology) -> Result<Self> {
        if subsets.is_empty() {
            return Err(Error::InvalidArgument("need at least one subset".into()));
        }
        for s in &subsets {
            if s.len() != group.d {
                return Err(Error::DimensionMismatch { expected: group.d, got: s.len() });
            }
            if s.iter().any(|&j| j < 1 || j > d) || s.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!("subset {s:?} is not an increasing subset of 1..={d}")));
            }
        }
        Ok(Self { d, d_star: group.d, subsets, group })
    }

    pub fn groups(&self) -> usize {
        self.subsets.len()
    }

    pub fn group_len(&self) -> usize {
        self.group.weight_count()
    }

    pub fn weight_count(&self) -> usize {
        self.groups() * self.group_len()
    }
}

/// Concatenated group weight vectors in subset order.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionWeights {
    spec: InteractionSpec,
    storage: Vec<f64>,
}

impl InteractionWeights {
    pub fn zeros(spec: InteractionSpec) -> Self {
        let storage = vec![0.0; spec.weight_count()];
        Self { spec, storage }
    }

    pub fn from_vec(spec: InteractionSpec, storage: Vec<f64>) -> Result<Self> {
        if storage.len() != spec.weight_count() {
            return Err(Error::DimensionMismatch { expected: spec.weight_count(), got: storage.len() });
        }
        Ok(Self { spec, storage })
    }

    pub fn spec(&self) -> &InteractionSpec {
        &self.spec
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.storage
    }

    fn range(&self, g: usize) -> Range<usize> {
        let len = self.spec.group_len();
        g * len..(g + 1) * len
    }

    pub fn group_slice(&self, g: usize) -> &[f64] {
        &self.storage[self.range(g)]
    }

    pub fn group_slice_mut(&mut self, g: usize) -> &mut [f64] {
        let r = self.range(g);
        &mut self.storage[r]
    }

    /// Group `g` as a standalone network on `x_I`.
    pub fn group(&self, g: usize) -> WeightVector {
        WeightVector::from_vec(self.spec.group, self.group_slice(g).to_vec()).expect("group length matches topology")
    }

    fn project(&self, g: usize, x: &[f64], out: &mut [f64]) {
        for (o, &j) in out.iter_mut().zip(&self.spec.subsets[g]) {
            *o = x[j - 1];
        }
    }
}

/// Random initialization of every group as for a single network, with the
/// draw index of each weight equal to its offset in the concatenated vector.
/// A single group therefore matches [`crate::net::init_weights`] exactly.
pub fn init_interaction(spec: InteractionSpec, hp: &HyperParams, seed: u64) -> InteractionWeights {
    let mut w = InteractionWeights::zeros(spec);
    let topo = w.spec.group;
    let inner = topo.outer_offset();
    for g in 0..w.spec.groups() {
        let base = (g * w.spec.group_len()) as u64;
        fill_uniform_levels(&topo, hp, seed, base, &mut w.group_slice_mut(g)[..inner]);
    }
    w
}

/// `sum_I f_{w_I}(x_I)`.
pub fn forward_interaction(w: &InteractionWeights, x: &[f64]) -> Result<f64> {
    if x.len() != w.spec.d {
        return Err(Error::DimensionMismatch { expected: w.spec.d, got: x.len() });
    }
    Ok(w.output(x))
}

impl Model for InteractionWeights {
    fn input_dim(&self) -> usize {
        self.spec.d
    }

    fn params(&self) -> &[f64] {
        &self.storage
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.storage
    }

    fn penalized(&self) -> Vec<Range<usize>> {
        let outer = self.spec.group.outer_offset();
        let k = self.spec.group.subnets;
        (0..self.spec.groups())
            .map(|g| {
                let start = self.range(g).start + outer;
                start..start + k
            })
            .collect()
    }

    /// Activations of all groups, then `2 r` backprop scratch, then `d*`
    /// entries for the projected input.
    fn scratch_len(&self) -> usize {
        let t = &self.spec.group;
        self.spec.groups() * t.subnets * t.activations_per_subnet() + 2 * t.width + t.d
    }

    fn eval_into(&self, x: &[f64], scratch: &mut [f64]) -> f64 {
        let t = self.spec.group;
        let per = t.activations_per_subnet();
        let group_acts = t.subnets * per;
        let (acts, rest) = scratch.split_at_mut(self.spec.groups() * group_acts);
        let proj = &mut rest[2 * t.width..];
        let block = t.block_len();
        let outer = t.outer_offset();
        let mut total = 0.0;
        for g in 0..self.spec.groups() {
            self.project(g, x, proj);
            let w = self.group_slice(g);
            let acts = &mut acts[g * group_acts..(g + 1) * group_acts];
            let mut sum = 0.0;
            for k in 0..t.subnets {
                let b = eval_subnet(&t, &w[k * block..(k + 1) * block], proj, &mut acts[k * per..(k + 1) * per]);
                sum += w[outer + k] * b;
            }
            total += sum;
        }
        total
    }

    fn backprop_into(&self, x: &[f64], scratch: &mut [f64], upstream: f64, grad: &mut [f64]) {
        let t = self.spec.group;
        let per = t.activations_per_subnet();
        let group_acts = t.subnets * per;
        let (acts, rest) = scratch.split_at_mut(self.spec.groups() * group_acts);
        let (delta, proj) = rest.split_at_mut(2 * t.width);
        let block = t.block_len();
        let outer = t.outer_offset();
        for g in 0..self.spec.groups() {
            self.project(g, x, proj);
            let range = self.range(g);
            let w = &self.storage[range.clone()];
            let grad = &mut grad[range];
            let acts = &acts[g * group_acts..(g + 1) * group_acts];
            for k in 0..t.subnets {
                let act = &acts[k * per..(k + 1) * per];
                grad[outer + k] += upstream * act[per - 1];
                let through = upstream * w[outer + k];
                if through != 0.0 {
                    backprop_subnet(
                        &t,
                        &w[k * block..(k + 1) * block],
                        proj,
                        act,
                        through,
                        &mut grad[k * block..(k + 1) * block],
                        delta,
                    );
                }
            }
        }
    }
}
