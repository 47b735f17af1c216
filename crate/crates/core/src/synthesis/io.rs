//! Candidate lists on disk: one circuit file per candidate plus `index.csv`
//! with columns `partition,ordinal,distance,cnots,depth`.

use std::fs;
use std::path::Path;

use super::{Candidate, CandidateList};
use crate::circuit::{read_circuit, write_circuit};
use crate::error::{Error, Result};

fn circuit_file(partition: usize, ordinal: usize) -> String {
    format!("p{partition:03}_c{ordinal:03}.txt")
}

/// Write `lists` into `dir`, replacing it atomically.
pub fn write_candidate_lists(dir: &Path, lists: &[CandidateList]) -> Result<()> {
    let parent = dir.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let name = dir.file_name().and_then(|n| n.to_str()).unwrap_or("candidates");
    let tmp = parent.join(format!(".{name}.tmp-{}", std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
    }
    fs::create_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;

    let mut index = csv::Writer::from_path(tmp.join("index.csv")).map_err(|e| Error::io(&tmp, e.into()))?;
    index
        .write_record(["partition", "ordinal", "distance", "cnots", "depth"])
        .map_err(|e| Error::io(&tmp, e.into()))?;
    for list in lists {
        for (ordinal, c) in list.candidates.iter().enumerate() {
            let path = tmp.join(circuit_file(list.partition_index, ordinal));
            fs::write(&path, write_circuit(&c.circuit)).map_err(|e| Error::io(&path, e))?;
            index
                .write_record([
                    list.partition_index.to_string(),
                    ordinal.to_string(),
                    format!("{:.16e}", c.distance),
                    c.cnots.to_string(),
                    c.depth.to_string(),
                ])
                .map_err(|e| Error::io(&tmp, e.into()))?;
        }
    }
    index.flush().map_err(|e| Error::io(&tmp, e))?;
    drop(index);

    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::rename(&tmp, dir).map_err(|e| Error::io(dir, e))
}

pub fn read_candidate_lists(dir: &Path) -> Result<Vec<CandidateList>> {
    let index_path = dir.join("index.csv");
    let mut reader = csv::Reader::from_path(&index_path).map_err(|e| Error::io(&index_path, e.into()))?;
    let mut lists: Vec<Vec<Candidate>> = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: row + 2,
            msg: e.to_string(),
        })?;
        let field = |i: usize| -> Result<&str> {
            rec.get(i).ok_or(Error::Parse {
                line: row + 2,
                msg: format!("missing column {i}"),
            })
        };
        let bad = |what: &str| Error::Parse {
            line: row + 2,
            msg: format!("bad {what}"),
        };
        let partition: usize = field(0)?.parse().map_err(|_| bad("partition"))?;
        let ordinal: usize = field(1)?.parse().map_err(|_| bad("ordinal"))?;
        let distance: f64 = field(2)?.parse().map_err(|_| bad("distance"))?;
        let cnots: usize = field(3)?.parse().map_err(|_| bad("cnots"))?;
        let depth: usize = field(4)?.parse().map_err(|_| bad("depth"))?;
        if partition > lists.len() || (partition == lists.len()) != (ordinal == 0) {
            return Err(bad("row order"));
        }
        if partition == lists.len() {
            lists.push(Vec::new());
        }
        if lists[partition].len() != ordinal {
            return Err(bad("ordinal sequence"));
        }
        let circuit = read_circuit(dir.join(circuit_file(partition, ordinal)))?;
        lists[partition].push(Candidate {
            circuit,
            distance,
            cnots,
            depth,
        });
    }
    Ok(lists
        .into_iter()
        .enumerate()
        .map(|(partition_index, candidates)| CandidateList {
            partition_index,
            candidates,
        })
        .collect())
}
