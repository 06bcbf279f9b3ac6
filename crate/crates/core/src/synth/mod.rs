//! Regression targets of known Hölder smoothness, i.i.d. sampling on the
//! unit cube, and Monte Carlo `L2` errors against the true function.

mod io;
mod l2;
mod noise;
mod target;

pub use io::{write_dataset, write_dataset_csv, DatasetMeta};
pub use l2::{l2_error, L2Estimate};
pub use noise::{NoiseKind, NoiseModel};
pub use target::{make_target, HolderCheck, TargetFunction, TargetKind, TargetParams, TargetSpec};

use crate::error::Result;
use crate::optim::Dataset;
use crate::rng::{derive_seed, CounterRng};

/// `n` i.i.d. pairs with `X` uniform on `[0,1)^d` and `Y = m(X) + noise`.
pub fn sample_dataset(m: &TargetFunction, noise: &NoiseModel, n: usize, seed: u64) -> Result<Dataset> {
    let d = m.d();
    let mut rng = CounterRng::new(derive_seed(seed, &[0x5a3b]));
    let mut xs = Vec::with_capacity(n * d);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let start = xs.len();
        xs.extend((0..d).map(|_| rng.unit()));
        let y = m.eval(&xs[start..]) + noise.draw(&mut rng);
        ys.push(y);
    }
    Dataset::new(d, xs, ys)
}
