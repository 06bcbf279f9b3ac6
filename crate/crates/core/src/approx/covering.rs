use serde::{Deserialize, Serialize};

use super::AxisBox;
use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// One level of a multiscale covering: a grid of half-open cubes of side
/// `2^-k`, shifted independently per coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringLevel {
    pub k: usize,
    pub side: f64,
    /// Left end of the first cell per coordinate.
    pub origins: Vec<f64>,
    /// Selected shift per coordinate, a multiple of `2 delta`.
    pub shifts: Vec<f64>,
    /// Cells per coordinate: 1 at level 0, `2^k + 1` above.
    pub cells_per_axis: usize,
    /// Empirical mass within `delta` of a grid line, per coordinate.
    pub border_mass: Vec<f64>,
    /// Empirical mass of the union of all cube borders.
    pub union_border_mass: f64,
}

impl CoveringLevel {
    pub fn cube_count(&self) -> usize {
        self.cells_per_axis.pow(self.origins.len() as u32)
    }

    /// Cell index of `x` along coordinate `j`; points at the far edge of the
    /// last cell belong to it.
    pub fn cell_along(&self, j: usize, x: f64) -> usize {
        let t = ((x - self.origins[j]) / self.side).floor();
        if t <= 0.0 {
            0
        } else {
            (t as usize).min(self.cells_per_axis - 1)
        }
    }

    /// Row-major linear index of the cube containing `x`.
    pub fn cell_of(&self, x: &[f64]) -> usize {
        x.iter().enumerate().fold(0, |acc, (j, &xj)| acc * self.cells_per_axis + self.cell_along(j, xj))
    }

    /// Per-coordinate indices of a linear cell index.
    pub fn unravel(&self, mut index: usize) -> Vec<usize> {
        let d = self.origins.len();
        let mut idx = vec![0; d];
        for j in (0..d).rev() {
            idx[j] = index % self.cells_per_axis;
            index /= self.cells_per_axis;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.cells_per_axis + i)
    }

    /// Interval `[lo, hi)` of cell `i` along coordinate `j`.
    pub fn interval(&self, j: usize, i: usize) -> (f64, f64) {
        let lo = self.origins[j] + i as f64 * self.side;
        (lo, lo + self.side)
    }

    pub fn cell_box(&self, idx: &[usize]) -> AxisBox {
        let (u, v) = idx.iter().enumerate().map(|(j, &i)| self.interval(j, i)).unzip();
        AxisBox::new(u, v).expect("cells have positive side")
    }

    pub fn center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(j, &i)| self.origins[j] + (i as f64 + 0.5) * self.side).collect()
    }
}

/// Coverings `P^(0) = {[0,1]^d}, P^(1), ..., P^(l)` with shifts chosen to
/// keep little sample mass near cube borders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiscaleCovering {
    pub d: usize,
    pub l: usize,
    pub delta: f64,
    pub levels: Vec<CoveringLevel>,
}

impl MultiscaleCovering {
    pub fn level(&self, k: usize) -> &CoveringLevel {
        &self.levels[k]
    }

    /// Center of the level-`k` cube containing `x`.
    pub fn z(&self, k: usize, x: &[f64]) -> Vec<f64> {
        let level = &self.levels[k];
        level.center(&level.unravel(level.cell_of(x)))
    }
}

/// Uniform points on `[0,1)^d`, stored row-major.
pub fn uniform_sample(d: usize, count: usize, seed: u64) -> Vec<f64> {
    let mut rng = CounterRng::new(seed);
    (0..count * d).map(|_| rng.unit()).collect()
}

/// Builds levels `0..=l`. At level `k >= 1` each coordinate's grid is the
/// partition of `[-2^-k, 1]` into `2^k + 1` cells shifted right by `2 delta m`,
/// `m = 0, ..., floor(2^-k / (2 delta)) - 1`; the `m` whose border strips
/// `[g - delta, g + delta)` around the grid lines `g` hold the least sample
/// mass wins (smallest `m` on ties). The strips for different `m` are
/// disjoint, so the winner carries at most `1 / M` of the mass.
///
/// `sample` holds points of `[0,1]^d` row-major.
pub fn build_covering(l: usize, delta: f64, d: usize, sample: &[f64]) -> Result<MultiscaleCovering> {
    if d == 0 || sample.is_empty() || !sample.len().is_multiple_of(d) {
        return Err(Error::InvalidArgument("covering needs a nonempty sample of dimension d".into()));
    }
    if !(delta > 0.0) || 2.0 * delta * (1u64 << l) as f64 > 0.5 {
        return Err(Error::InvalidArgument(format!(
            "covering needs 0 < 2 delta 2^l <= 1/2, got delta = {delta}, l = {l}"
        )));
    }
    let count = sample.len() / d;
    let mut levels = Vec::with_capacity(l + 1);
    levels.push(CoveringLevel {
        k: 0,
        side: 1.0,
        origins: vec![0.0; d],
        shifts: vec![0.0; d],
        cells_per_axis: 1,
        border_mass: vec![0.0; d],
        union_border_mass: 0.0,
    });
    for k in 1..=l {
        let side = 1.0 / (1u64 << k) as f64;
        let cells = (1usize << k) + 1;
        // the small slack keeps exact ratios such as 4.0 from rounding down
        let candidates = ((side / (2.0 * delta)) * (1.0 + 1e-12)).floor().max(1.0) as usize;
        let mut origins = Vec::with_capacity(d);
        let mut shifts = Vec::with_capacity(d);
        let mut masses = Vec::with_capacity(d);
        for j in 0..d {
            let mut best = (usize::MAX, 0.0);
            for m in 0..candidates {
                let shift = 2.0 * delta * m as f64;
                let origin = -side + shift;
                let hits = (0..count).filter(|&i| near_grid(sample[i * d + j], origin, side, cells, delta)).count();
                if hits < best.0 {
                    best = (hits, shift);
                }
            }
            origins.push(-side + best.1);
            shifts.push(best.1);
            masses.push(best.0 as f64 / count as f64);
        }
        let union = (0..count)
            .filter(|&i| (0..d).any(|j| near_grid(sample[i * d + j], origins[j], side, cells, delta)))
            .count() as f64
            / count as f64;
        levels.push(CoveringLevel {
            k,
            side,
            origins,
            shifts,
            cells_per_axis: cells,
            border_mass: masses,
            union_border_mass: union,
        });
    }
    Ok(MultiscaleCovering { d, l, delta, levels })
}

/// Whether `x` lies in `[g - delta, g + delta)` for a grid line
/// `g = origin + i side`, `i = 0..=cells`.
fn near_grid(x: f64, origin: f64, side: f64, cells: usize, delta: f64) -> bool {
    let t = (x - origin) / side;
    let nearest = t.round().clamp(0.0, cells as f64);
    let candidates = [nearest - 1.0, nearest, nearest + 1.0];
    candidates.iter().filter(|&&i| i >= 0.0 && i <= cells as f64).any(|&i| {
        let g = origin + i * side;
        x >= g - delta && x < g + delta
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_zero_is_unit_cube() {
        let sample = uniform_sample(2, 100, 1);
        let cov = build_covering(0, 0.1, 2, &sample).unwrap();
        assert_eq!(cov.levels.len(), 1);
        assert_eq!(cov.level(0).cube_count(), 1);
        assert_eq!(cov.level(0).cell_box(&[0, 0]), AxisBox::cube(2, 0.0, 1.0).unwrap());
    }

    #[test]
    fn precondition_enforced() {
        let sample = uniform_sample(1, 10, 1);
        assert!(build_covering(2, 0.1, 1, &sample).is_err());
        assert!(build_covering(2, 0.0625, 1, &sample).is_ok());
        assert!(build_covering(1, 0.1, 1, &[]).is_err());
    }

    #[test]
    fn uniform_border_mass_bound() {
        let sample = uniform_sample(1, 20_000, 3);
        let cov = build_covering(1, 0.05, 1, &sample).unwrap();
        assert!(cov.level(1).border_mass[0] <= 4.0 * 0.05 * 2.0);
    }

    #[test]
    fn shift_moves_off_an_atom() {
        // all mass on a grid line of the unshifted level-1 grid
        let sample = vec![0.5; 50];
        let cov = build_covering(1, 0.05, 1, &sample).unwrap();
        let level = cov.level(1);
        assert_eq!(level.border_mass[0], 0.0);
        assert!(level.shifts[0] > 0.0);
    }

    #[test]
    fn cells_partition_points() {
        let sample = uniform_sample(2, 2_000, 5);
        let cov = build_covering(3, 0.02, 2, &sample).unwrap();
        for level in &cov.levels {
            for x in sample.chunks(2) {
                let containing = (0..level.cube_count())
                    .filter(|&c| {
                        let idx = level.unravel(c);
                        (0..2).all(|j| {
                            let (lo, hi) = level.interval(j, idx[j]);
                            lo <= x[j] && x[j] < hi
                        })
                    })
                    .count();
                assert_eq!(containing, 1);
                assert_eq!(level.ravel(&level.unravel(level.cell_of(x))), level.cell_of(x));
            }
        }
    }
}
