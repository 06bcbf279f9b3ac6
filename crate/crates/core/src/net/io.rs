//! Weight file format.
//!
//! All fields little-endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 8     | magic `b"OPNETWV1"` read as a `u64`       |
//! | 8     | `d`                                       |
//! | 8     | depth `L`                                 |
//! | 8     | width `r`                                 |
//! | 8     | subnetworks `K`                           |
//! | 8 * N | `f64` weights in flat order, N = count    |
//!
//! A JSON sidecar carries the topology and weight count for tooling.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::topology::Topology;
use super::weights::WeightVector;

pub const MAGIC: u64 = u64::from_le_bytes(*b"OPNETWV1");

pub fn write_weights<W: Write>(w: &WeightVector, mut out: W) -> Result<()> {
    let t = w.topology();
    for v in [MAGIC, t.d as u64, t.depth as u64, t.width as u64, t.subnets as u64] {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in w.as_slice() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_weights<R: Read>(mut input: R) -> Result<WeightVector> {
    let mut word = [0u8; 8];
    let mut header = [0u64; 5];
    for h in header.iter_mut() {
        input.read_exact(&mut word).map_err(|e| Error::Format(format!("truncated header: {e}")))?;
        *h = u64::from_le_bytes(word);
    }
    if header[0] != MAGIC {
        return Err(Error::Format(format!("bad magic {:#018x}", header[0])));
    }
    let dims: Vec<usize> = header[1..]
        .iter()
        .map(|&v| usize::try_from(v).map_err(|_| Error::Format(format!("dimension {v} too large"))))
        .collect::<Result<_>>()?;
    let topo = Topology::new(dims[0], dims[1], dims[2], dims[3])?;
    let mut storage = Vec::with_capacity(topo.weight_count());
    for _ in 0..topo.weight_count() {
        input.read_exact(&mut word).map_err(|e| Error::Format(format!("truncated weights: {e}")))?;
        storage.push(f64::from_le_bytes(word));
    }
    if input.read(&mut word)? != 0 {
        return Err(Error::Format("trailing bytes after weights".into()));
    }
    WeightVector::from_vec(topo, storage)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopologySidecar {
    pub format: String,
    pub topology: Topology,
    pub weight_count: usize,
    pub block_len: usize,
    pub outer_offset: usize,
}

impl TopologySidecar {
    pub fn new(topo: &Topology) -> Self {
        Self {
            format: "opnet-weights-v1".into(),
            topology: *topo,
            weight_count: topo.weight_count(),
            block_len: topo.block_len(),
            outer_offset: topo.outer_offset(),
        }
    }
}

/// Writes `path` and `path` with extension `.json`.
pub fn save(w: &WeightVector, path: &Path) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_weights(w, file)?;
    let sidecar = serde_json::to_string_pretty(&TopologySidecar::new(w.topology()))?;
    std::fs::write(path.with_extension("json"), sidecar)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<WeightVector> {
    read_weights(std::io::BufReader::new(std::fs::File::open(path)?))
}
