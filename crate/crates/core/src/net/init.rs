use crate::rng::CounterRng;

use super::hyper::HyperParams;
use super::topology::Topology;
use super::weights::WeightVector;

/// Random initialization: outer weights zero, levels `1..L` uniform on
/// `[-c1 (ln n)^2, c1 (ln n)^2]`, level 0 uniform on
/// `[-c2 (ln n)^2 n^tau, c2 (ln n)^2 n^tau]`.
///
/// Weight at flat offset `o` is draw number `o` of the stream keyed by `seed`,
/// so the result does not depend on fill order.
pub fn init_weights(topo: Topology, hp: &HyperParams, seed: u64) -> WeightVector {
    let mut w = WeightVector::zeros(topo);
    fill_uniform_levels(&topo, hp, seed, 0, w.inner_mut());
    w
}

/// Fills the inner blocks of one network whose first weight sits at
/// `base_offset` in a larger vector keyed by `seed`.
pub(crate) fn fill_uniform_levels(topo: &Topology, hp: &HyperParams, seed: u64, base_offset: u64, inner: &mut [f64]) {
    let input = hp.input_init_bound();
    let hidden = hp.hidden_init_bound();
    let block = topo.block_len();
    let level1 = topo.level_offset(1);
    for (k, chunk) in inner.chunks_mut(block).enumerate() {
        let mut rng = CounterRng::at(seed, base_offset + (k * block) as u64);
        for (o, w) in chunk.iter_mut().enumerate() {
            let bound = if o < level1 { input } else { hidden };
            *w = rng.uniform(-bound, bound);
        }
    }
}
