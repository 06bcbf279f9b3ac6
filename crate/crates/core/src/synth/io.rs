use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NoiseModel, TargetSpec};
use crate::error::Result;
use crate::optim::Dataset;

/// JSON sidecar describing how a dataset file was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub target: TargetSpec,
    pub noise: NoiseModel,
    pub d: usize,
    pub n: usize,
    pub seed: u64,
}

/// CSV with header `x1,...,xd,y`.
pub fn write_dataset_csv<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=data.d()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for (x, y) in data.iter() {
        let mut row: Vec<String> = x.iter().map(|v| format!("{v:e}")).collect();
        row.push(format!("{y:e}"));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `path` as CSV and `path` with a `.json` extension as the sidecar.
pub fn write_dataset(data: &Dataset, meta: &DatasetMeta, path: &Path) -> Result<()> {
    write_dataset_csv(data, BufWriter::new(File::create(path)?))?;
    let mut side = BufWriter::new(File::create(path.with_extension("json"))?);
    serde_json::to_writer_pretty(&mut side, meta)?;
    side.flush()?;
    Ok(())
}
