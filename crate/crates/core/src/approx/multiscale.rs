use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::indicator::{check_sample_size, write_indicator_block, HypothesisViolation};
use super::{AxisBox, MultiscaleCovering};
use crate::error::{Error, Result};
use crate::net::{forward, Topology, WeightVector};
use crate::synth::{l2_error, L2Estimate, TargetFunction};

/// Shape and steepness of the indicator subnetworks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiscaleSpec {
    pub depth: usize,
    pub width: usize,
    /// Sample size `n` setting the indicator steepness.
    pub n: f64,
    pub s: u32,
    /// Repeat the construction `R^2` times with outer weights divided by `R^2`.
    pub replicate: bool,
}

/// One summand: an indicator of `bx` scaled by `weight`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    /// 0 for the base term, otherwise the finer level `k`.
    pub level: usize,
    /// Linear cell indices at levels `k` and `k - 1` (unused for the base term).
    pub cells: (usize, usize),
    pub bx: AxisBox,
    pub weight: f64,
}

/// Network `f(z_0) 1_{[-1,2]^d} + sum_k sum_{A1, A2} (f(z_A1) - f(z_A2)) 1_{A1 ∩ A2}`
/// with every indicator replaced by its sigmoid network.
#[derive(Clone, Debug)]
pub struct MultiscaleNet {
    d: usize,
    l: usize,
    delta: f64,
    spec: MultiscaleSpec,
    terms: Vec<Term>,
    weights: WeightVector,
    lookup: HashMap<(usize, usize, usize), usize>,
    covering: MultiscaleCovering,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelescopingReport {
    pub points: usize,
    pub max_abs_error: f64,
    /// Points whose cell pair at some level has no term.
    pub missing: usize,
}

/// Whether every weight of the construction, bounded by `8d (ln n)^2 / delta`
/// at level 0, lies in the random initialization range `c2 (ln n)^2 n^tau`.
pub fn init_range_compatible(d: usize, delta: f64, c2: f64, n: f64, tau: f64) -> bool {
    8.0 * d as f64 / delta <= c2 * n.powf(tau)
}

/// Builds the multiscale network of `f` on `covering`. Intersections are
/// allowed to be thinner than `2 delta`; only the sample-size and shape
/// hypotheses of the indicator are enforced.
pub fn build_multiscale_net(
    f: &TargetFunction,
    covering: &MultiscaleCovering,
    spec: MultiscaleSpec,
) -> Result<MultiscaleNet> {
    let d = covering.d;
    if f.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.d() });
    }
    if spec.depth < 2 {
        return Err(HypothesisViolation::Depth(spec.depth).into());
    }
    if spec.width < 2 * d {
        return Err(HypothesisViolation::Width { width: spec.width, required: 2 * d }.into());
    }
    if !(covering.delta < 0.5) {
        return Err(HypothesisViolation::DeltaRange(covering.delta).into());
    }
    check_sample_size(d, spec.width, spec.s, spec.n)?;

    let mut terms =
        vec![Term { level: 0, cells: (0, 0), bx: AxisBox::cube(d, -1.0, 2.0)?, weight: f.eval(&vec![0.5; d]) }];
    for k in 1..=covering.l {
        let fine = covering.level(k);
        let coarse = covering.level(k - 1);
        // per coordinate: (fine cell, coarse cell, lo, hi) with positive overlap
        let overlaps: Vec<Vec<(usize, usize, f64, f64)>> = (0..d)
            .map(|j| {
                let mut out = Vec::new();
                for a in 0..fine.cells_per_axis {
                    let (alo, ahi) = fine.interval(j, a);
                    for b in 0..coarse.cells_per_axis {
                        let (blo, bhi) = coarse.interval(j, b);
                        let (lo, hi) = (alo.max(blo), ahi.min(bhi));
                        if hi > lo {
                            out.push((a, b, lo, hi));
                        }
                    }
                }
                out
            })
            .collect();
        for choice in product(&overlaps.iter().map(Vec::len).collect::<Vec<_>>()) {
            let parts: Vec<_> = choice.iter().enumerate().map(|(j, &c)| overlaps[j][c]).collect();
            let idx1: Vec<usize> = parts.iter().map(|p| p.0).collect();
            let idx2: Vec<usize> = parts.iter().map(|p| p.1).collect();
            let bx = AxisBox::new(parts.iter().map(|p| p.2).collect(), parts.iter().map(|p| p.3).collect())?;
            let weight = f.eval(&fine.center(&idx1)) - f.eval(&coarse.center(&idx2));
            terms.push(Term { level: k, cells: (fine.ravel(&idx1), coarse.ravel(&idx2)), bx, weight });
        }
    }

    let topo = Topology::new(d, spec.depth, spec.width, terms.len())?;
    let mut weights = WeightVector::zeros(topo);
    let ln_n = spec.n.ln();
    for (t, term) in terms.iter().enumerate() {
        write_indicator_block(&topo, weights.subnet_mut(t), &term.bx, covering.delta, ln_n);
        weights.outer_mut()[t] = term.weight;
    }
    let lookup =
        terms.iter().enumerate().skip(1).map(|(t, term)| ((term.level, term.cells.0, term.cells.1), t)).collect();
    Ok(MultiscaleNet {
        d,
        l: covering.l,
        delta: covering.delta,
        spec,
        terms,
        weights,
        lookup,
        covering: covering.clone(),
    })
}

/// All index tuples of a mixed-radix counter.
fn product(radices: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &r in radices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..r).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

impl MultiscaleNet {
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// `1 + l (2^l + 1)^{2d}`.
    pub fn term_bound(&self) -> f64 {
        1.0 + self.l as f64 * ((1u64 << self.l) as f64 + 1.0).powi(2 * self.d as i32)
    }

    /// `R = l (2^l + 1)^{2d} + 1`.
    pub fn replication_factor(&self) -> usize {
        self.term_bound() as usize
    }

    pub fn spec(&self) -> &MultiscaleSpec {
        &self.spec
    }

    pub fn covering(&self) -> &MultiscaleCovering {
        &self.covering
    }

    /// The unreplicated network, one subnetwork per term.
    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    /// Outer weights of the network as configured: the term weights, or
    /// with replication `R^2` consecutive copies of them divided by `R^2`.
    /// The replicated vector grows like `l^2 (2^l+1)^{4d}` times the term
    /// count; use it for small `l d` only.
    pub fn outer_weights(&self) -> Vec<f64> {
        if !self.spec.replicate {
            return self.weights.outer().to_vec();
        }
        let r2 = (self.replication_factor() as f64).powi(2);
        let copies = self.replication_factor().pow(2);
        let scaled: Vec<f64> = self.weights.outer().iter().map(|w| w / r2).collect();
        let mut out = Vec::with_capacity(copies * scaled.len());
        for _ in 0..copies {
            out.extend_from_slice(&scaled);
        }
        out
    }

    /// The configured network as one weight vector; with replication this
    /// holds `R^2` times as many subnetworks as terms.
    pub fn materialize(&self) -> Result<WeightVector> {
        let outer = self.outer_weights();
        let base = *self.weights.topology();
        let topo = Topology::new(base.d, base.depth, base.width, outer.len())?;
        let inner = self.weights.inner();
        let mut storage = Vec::with_capacity(topo.weight_count());
        for _ in 0..outer.len() / self.terms.len() {
            storage.extend_from_slice(inner);
        }
        storage.extend_from_slice(&outer);
        WeightVector::from_vec(topo, storage)
    }

    /// `sum_k |w_{1,1,k}^{(L)}|^2` of the configured network. With
    /// replication this is `R^2 sum_t (w_t / R^2)^2`, evaluated without
    /// materializing the copies.
    pub fn outer_sum_of_squares(&self) -> f64 {
        let terms = self.weights.outer();
        if !self.spec.replicate {
            return terms.iter().map(|w| w * w).sum();
        }
        let r2 = (self.replication_factor() as f64).powi(2);
        r2 * terms.iter().map(|w| (w / r2) * (w / r2)).sum::<f64>()
    }

    /// `c` with `sum |w^{(L)}|^2 <= c / 2^{2dl}` for the replicated network:
    /// the largest squared term weight. Since the term count `T` is at most
    /// `R`, the replicated sum `sum_t w_t^2 / R^2 <= c T / R^2 <= c / R`, and
    /// `R > 2^{2dl}`.
    pub fn sum_of_squares_constant(&self) -> f64 {
        self.weights.outer().iter().map(|w| w * w).fold(0.0, f64::max)
    }

    /// `c` with `|f_net(x)| <= c (1 + (2^l+1)^{2d} / n^s)` on `[0,1]^d`:
    /// `|f(z_0)| + 4^d sum_k max |f(z_A1) - f(z_A2)|`. At each level a point
    /// lies within `delta` of at most four of the overlap intervals per
    /// coordinate; all other indicators are below `n^{-s}`.
    pub fn sup_constant(&self) -> f64 {
        let mut level_max = vec![0.0f64; self.l + 1];
        for t in &self.terms[1..] {
            level_max[t.level] = level_max[t.level].max(t.weight.abs());
        }
        self.terms[0].weight.abs() + 4f64.powi(self.d as i32) * level_max.iter().sum::<f64>()
    }

    pub fn sup_bound(&self) -> f64 {
        let cells = ((1u64 << self.l) as f64 + 1.0).powi(2 * self.d as i32);
        self.sup_constant() * (1.0 + cells * (-(self.spec.s as f64) * self.spec.n.ln()).exp())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        forward(&self.weights, x)
    }

    /// Sum of the weights of the terms whose cell pair contains `x`, the
    /// piecewise-constant value `f(z_{P^(l)}(x))` if the telescoping is right.
    pub fn telescoping_value(&self, x: &[f64]) -> Option<f64> {
        let mut sum = self.terms[0].weight;
        for k in 1..=self.l {
            let c1 = self.covering.level(k).cell_of(x);
            let c2 = self.covering.level(k - 1).cell_of(x);
            sum += self.terms[*self.lookup.get(&(k, c1, c2))?].weight;
        }
        Some(sum)
    }

    /// Compares the telescoping sum with `f(z_{P^(l)}(x))` at every point.
    pub fn check_telescoping(&self, f: &TargetFunction, points: &[f64]) -> TelescopingReport {
        let mut report = TelescopingReport { points: 0, max_abs_error: 0.0, missing: 0 };
        for x in points.chunks(self.d) {
            report.points += 1;
            let target = f.eval(&self.covering.z(self.l, x));
            match self.telescoping_value(x) {
                Some(v) => report.max_abs_error = report.max_abs_error.max((v - target).abs()),
                None => report.missing += 1,
            }
        }
        report
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Monte Carlo squared `L2` distance between the network and `f` under the
/// uniform distribution on `[0,1]^d`.
pub fn approx_error(net: &MultiscaleNet, f: &TargetFunction, n_mc: usize, seed: u64) -> L2Estimate {
    l2_error(|x| net.eval(x).expect("dimension checked at build"), f, n_mc, seed)
}
