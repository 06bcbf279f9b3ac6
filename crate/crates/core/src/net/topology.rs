use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the estimator: `subnets` parallel networks of depth `depth` and
/// width `width` on inputs of dimension `d`.
///
/// Weights of one subnetwork are stored as a contiguous block, level by
/// level. Level `0` maps the input to the `width` units of the first hidden
/// layer, levels `1..depth-1` map between hidden layers. Only the first unit
/// of level `depth` is ever read, so the last inner level stores a single
/// row. Each row holds the bias first, then one weight per input.
///
/// ```text
/// block  = r(d+1) + (L-2) r(r+1) + (r+1)
/// total  = K * block + K
/// ```
///
/// The trailing `K` entries are the outer weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    pub d: usize,
    pub depth: usize,
    pub width: usize,
    pub subnets: usize,
}

/// Indexed weight coordinates `w_{k,i,j}^{(l)}`.
///
/// `k` and `i` are 1-based, `j = 0` is the bias and `j >= 1` the input from
/// unit `j` of the previous layer (or coordinate `j` of `x` at level 0). At
/// `l == depth` only outer weights exist and are addressed as `(k: 1, i: 1,
/// j: subnet)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WeightIndex {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub l: usize,
}

impl Topology {
    pub fn new(d: usize, depth: usize, width: usize, subnets: usize) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidTopology("input dimension must be at least 1".into()));
        }
        if depth < 2 {
            return Err(Error::InvalidTopology(format!("depth must be at least 2, got {depth}")));
        }
        if width < 1 {
            return Err(Error::InvalidTopology("width must be at least 1".into()));
        }
        if subnets < 1 {
            return Err(Error::InvalidTopology("need at least one subnetwork".into()));
        }
        Ok(Self { d, depth, width, subnets })
    }

    /// Number of units at level `l` that own a row of weights at level `l`
    /// (i.e. the units of layer `l + 1`).
    pub fn rows(&self, l: usize) -> usize {
        debug_assert!(l < self.depth);
        if l + 1 == self.depth {
            1
        } else {
            self.width
        }
    }

    /// Row length at level `l`: bias plus fan-in.
    pub fn cols(&self, l: usize) -> usize {
        if l == 0 {
            self.d + 1
        } else {
            self.width + 1
        }
    }

    /// Offset of level `l` inside a subnetwork block.
    pub fn level_offset(&self, l: usize) -> usize {
        debug_assert!(l < self.depth);
        if l == 0 {
            0
        } else {
            self.width * (self.d + 1) + (l - 1) * self.width * (self.width + 1)
        }
    }

    pub fn block_len(&self) -> usize {
        let r = self.width;
        r * (self.d + 1) + (self.depth - 2) * r * (r + 1) + (r + 1)
    }

    /// Offset of the first outer weight.
    pub fn outer_offset(&self) -> usize {
        self.subnets * self.block_len()
    }

    pub fn weight_count(&self) -> usize {
        self.subnets * self.block_len() + self.subnets
    }

    /// Activations kept per subnetwork by the forward pass: `width` units for
    /// each hidden layer `1..depth` and the single output unit of layer `depth`.
    pub fn activations_per_subnet(&self) -> usize {
        self.width * (self.depth - 1) + 1
    }

    /// Flat offset of a weight, `None` if the tuple is out of range.
    pub fn offset(&self, idx: WeightIndex) -> Option<usize> {
        let WeightIndex { k, i, j, l } = idx;
        if l == self.depth {
            return (k == 1 && i == 1 && (1..=self.subnets).contains(&j)).then(|| self.outer_offset() + j - 1);
        }
        if l > self.depth || !(1..=self.subnets).contains(&k) {
            return None;
        }
        if !(1..=self.rows(l)).contains(&i) || j >= self.cols(l) {
            return None;
        }
        Some((k - 1) * self.block_len() + self.level_offset(l) + (i - 1) * self.cols(l) + j)
    }

    /// Inverse of [`Topology::offset`].
    pub fn locate(&self, offset: usize) -> Option<WeightIndex> {
        if offset >= self.weight_count() {
            return None;
        }
        if offset >= self.outer_offset() {
            return Some(WeightIndex { k: 1, i: 1, j: offset - self.outer_offset() + 1, l: self.depth });
        }
        let block = self.block_len();
        let k = offset / block + 1;
        let within = offset % block;
        let l = (0..self.depth).rev().find(|&l| self.level_offset(l) <= within)?;
        let rel = within - self.level_offset(l);
        let cols = self.cols(l);
        Some(WeightIndex { k, i: rel / cols + 1, j: rel % cols, l })
    }

    /// Iterates every valid weight tuple in flat order.
    pub fn indices(&self) -> impl Iterator<Item = WeightIndex> + '_ {
        (0..self.weight_count()).map(|o| self.locate(o).expect("offset in range"))
    }
}
