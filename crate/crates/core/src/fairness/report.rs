use std::path::Path;

use super::{GroupSensitivity, LipschitzEstimate, PairDistance};
use crate::error::{Error, Result};

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))
}

fn write_pairs(path: &Path, pairs: &[PairDistance]) -> Result<()> {
    let wrap = |e: csv::Error| Error::io(path, e.into());
    let mut w = writer(path)?;
    w.write_record(["i", "j", "input_distance", "output_distance", "ratio"]).map_err(wrap)?;
    for p in pairs {
        w.write_record([
            p.i.to_string(),
            p.j.to_string(),
            format!("{:.9}", p.input_distance),
            format!("{:.9}", p.output_distance),
            p.ratio().map(|r| format!("{r:.9}")).unwrap_or_default(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_bias_pairs_csv(path: impl AsRef<Path>, pairs: &[PairDistance]) -> Result<()> {
    write_pairs(path.as_ref(), pairs)
}

/// All examined pairs; the row of the maximizing pair is the estimate.
pub fn write_lipschitz_csv(path: impl AsRef<Path>, est: &LipschitzEstimate) -> Result<()> {
    write_pairs(path.as_ref(), &est.pairs)
}

pub fn write_group_csv(path: impl AsRef<Path>, rows: &[GroupSensitivity]) -> Result<()> {
    let path = path.as_ref();
    let wrap = |e: csv::Error| Error::io(path, e.into());
    let mut w = writer(path)?;
    w.write_record(["group", "mean_output_distance", "relative"]).map_err(wrap)?;
    for g in rows {
        w.write_record([
            g.group.clone(),
            format!("{:.9}", g.mean_output_distance),
            format!("{:.9}", g.relative),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
