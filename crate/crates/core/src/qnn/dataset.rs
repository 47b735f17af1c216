use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
    All,
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "all" => Ok(Split::All),
            _ => Err(Error::Config(format!("unknown split {s}"))),
        }
    }
}

/// Tabular binary-classification data with features in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    /// Named feature groups partitioning the feature indices.
    pub groups: Vec<(String, Vec<usize>)>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Dataset {
    /// Validating constructor; `groups = None` gives one group per feature.
    pub fn new(
        feature_names: Vec<String>,
        features: Vec<Vec<f64>>,
        labels: Vec<u8>,
        groups: Option<Vec<(String, Vec<usize>)>>,
        train: Vec<usize>,
        test: Vec<usize>,
    ) -> Result<Self> {
        let d = feature_names.len();
        if d == 0 {
            return Err(Error::Dataset("no features".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::Dataset(format!("{} rows but {} labels", features.len(), labels.len())));
        }
        for (r, row) in features.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Dataset(format!("row {r} has {} features, expected {d}", row.len())));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Dataset(format!("row {r} has feature {v} outside [0, 1]")));
            }
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Dataset(format!("label {l} is not binary")));
        }
        let groups = groups
            .unwrap_or_else(|| feature_names.iter().enumerate().map(|(i, n)| (n.clone(), vec![i])).collect());
        let mut seen = vec![false; d];
        for (name, idx) in &groups {
            for &i in idx {
                if i >= d || std::mem::replace(&mut seen[i], true) {
                    return Err(Error::Dataset(format!("group {name} breaks the feature partition at {i}")));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Dataset("groups do not cover every feature".into()));
        }
        if let Some(r) = train.iter().chain(&test).find(|&&r| r >= features.len()) {
            return Err(Error::Dataset(format!("split row {r} out of range")));
        }
        Ok(Self {
            feature_names,
            features,
            labels,
            groups,
            train,
            test,
        })
    }

    pub fn num_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn rows(&self, split: Split) -> Vec<usize> {
        match split {
            Split::Train => self.train.clone(),
            Split::Test => self.test.clone(),
            Split::All => (0..self.len()).collect(),
        }
    }

    /// Rows of `split` as a standalone dataset whose train and test sets are
    /// both all its rows.
    pub fn subset(&self, split: Split) -> Self {
        let rows = self.rows(split);
        let all: Vec<usize> = (0..rows.len()).collect();
        Self {
            feature_names: self.feature_names.clone(),
            features: rows.iter().map(|&r| self.features[r].clone()).collect(),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            groups: self.groups.clone(),
            train: all.clone(),
            test: all,
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let wrap = |e: csv::Error| Error::io(path, e.into());
        let mut w = csv::Writer::from_path(path).map_err(wrap)?;
        let mut header = self.feature_names.clone();
        header.push("label".into());
        w.write_record(&header).map_err(wrap)?;
        for (row, label) in self.features.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| crate::circuit::fmt_f64(*v)).collect();
            rec.push(label.to_string());
            w.write_record(&rec).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Which CSV columns to use and how to binarize the label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSchema {
    /// CSV file, relative to the schema file when read from disk.
    #[serde(default)]
    pub csv: Option<PathBuf>,
    pub features: Vec<String>,
    pub label_column: String,
    /// Label values mapped to 1. Empty means the column already holds 0/1.
    #[serde(default)]
    pub positive_labels: Vec<String>,
    /// Label values mapped to 0. Empty means everything not positive.
    #[serde(default)]
    pub negative_labels: Vec<String>,
    pub train_size: usize,
    pub test_size: usize,
    /// Group name to feature names; default is one group per feature.
    #[serde(default)]
    pub groups: BTreeMap<String, Vec<String>>,
}

pub fn read_dataset_schema(path: impl AsRef<Path>) -> Result<DatasetSchema> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut schema: DatasetSchema = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    if let (Some(csv), Some(dir)) = (&schema.csv, path.parent()) {
        if csv.is_relative() {
            schema.csv = Some(dir.join(csv));
        }
    }
    Ok(schema)
}

fn binarize(value: &str, schema: &DatasetSchema, line: usize) -> Result<u8> {
    let v = value.trim();
    if schema.positive_labels.is_empty() {
        return match v {
            "0" => Ok(0),
            "1" => Ok(1),
            _ => Err(Error::Dataset(format!("line {line}: label {v:?} is not 0/1"))),
        };
    }
    if schema.positive_labels.iter().any(|p| p == v) {
        Ok(1)
    } else if schema.negative_labels.is_empty() || schema.negative_labels.iter().any(|n| n == v) {
        Ok(0)
    } else {
        Err(Error::Dataset(format!("line {line}: label {v:?} maps to neither class")))
    }
}

/// Read `path`, min-max normalize the selected features over the whole file
/// (constant columns become 0), binarize labels and draw a seeded
/// train/test sample.
pub fn load_dataset(path: impl AsRef<Path>, schema: &DatasetSchema, seed: u64) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::io(path, e.into()))?;
    let header: HashMap<String, usize> = reader
        .headers()
        .map_err(|e| Error::Dataset(e.to_string()))?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_string(), i))
        .collect();
    let column = |name: &str| {
        header
            .get(name)
            .copied()
            .ok_or_else(|| Error::Dataset(format!("missing column {name}")))
    };
    let cols: Vec<usize> = schema.features.iter().map(|f| column(f)).collect::<Result<_>>()?;
    let label_col = column(&schema.label_column)?;

    let mut raw = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Dataset(format!("line {line}: {e}")))?;
        let mut row = Vec::with_capacity(cols.len());
        for (&c, name) in cols.iter().zip(&schema.features) {
            let cell = rec.get(c).unwrap_or("");
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Dataset(format!("line {line}: column {name} value {cell:?} is not numeric")))?;
            if !v.is_finite() {
                return Err(Error::Dataset(format!("line {line}: column {name} is not finite")));
            }
            row.push(v);
        }
        labels.push(binarize(rec.get(label_col).unwrap_or(""), schema, line)?);
        raw.push(row);
    }

    let d = cols.len();
    for k in 0..d {
        let lo = raw.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min);
        let hi = raw.iter().map(|r| r[k]).fold(f64::NEG_INFINITY, f64::max);
        for r in raw.iter_mut() {
            r[k] = if hi > lo { ((r[k] - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
        }
    }

    let need = schema.train_size + schema.test_size;
    if need > raw.len() {
        return Err(Error::Dataset(format!(
            "{} rows requested for train and test but file has {}",
            need,
            raw.len()
        )));
    }
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.shuffle(&mut seed::rng(seed));
    order.truncate(need);

    let groups = if schema.groups.is_empty() {
        None
    } else {
        let index: HashMap<&str, usize> = schema.features.iter().enumerate().map(|(i, f)| (f.as_str(), i)).collect();
        let mut out = Vec::new();
        for (g, members) in &schema.groups {
            let idx = members
                .iter()
                .map(|m| {
                    index
                        .get(m.as_str())
                        .copied()
                        .ok_or_else(|| Error::Dataset(format!("group {g} names unknown feature {m}")))
                })
                .collect::<Result<_>>()?;
            out.push((g.clone(), idx));
        }
        Some(out)
    };
    Dataset::new(
        schema.features.clone(),
        order.iter().map(|&r| raw[r].clone()).collect(),
        order.iter().map(|&r| labels[r]).collect(),
        groups,
        (0..schema.train_size).collect(),
        (schema.train_size..need).collect(),
    )
}

/// Seeded linearly separable data: `label = [w·(x − ½) > 0]` for a random
/// weight vector, each label flipped with probability `noise`.
pub fn synthetic_dataset(d: usize, train: usize, test: usize, noise: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::invalid(format!("label noise {noise} outside [0, 1]")));
    }
    let mut rng = seed::rng(seed);
    let w: Vec<f64> = (0..d)
        .map(|_| {
            let m: f64 = rng.gen_range(0.3..1.0);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    let n = train + test;
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * (xi - 0.5)).sum();
        let mut label = u8::from(s > 0.0);
        if rng.gen_bool(noise) {
            label ^= 1;
        }
        features.push(x);
        labels.push(label);
    }
    Dataset::new(
        (0..d).map(|k| format!("f{k}")).collect(),
        features,
        labels,
        None,
        (0..train).collect(),
        (train..n).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn schema(features: &[&str]) -> DatasetSchema {
        DatasetSchema {
            csv: None,
            features: features.iter().map(|s| s.to_string()).collect(),
            label_column: "income".into(),
            positive_labels: vec![">50K".into()],
            negative_labels: vec!["<=50K".into()],
            train_size: 3,
            test_size: 1,
            groups: BTreeMap::new(),
        }
    }

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn normalization_and_labels() {
        let f = write("age,hours,flat,income\n20,10,5,<=50K\n40,30,5,>50K\n60,50,5,>50K\n30,20,5,<=50K\n");
        let d = load_dataset(f.path(), &schema(&["age", "hours", "flat"]), 1).unwrap();
        assert_eq!(d.num_features(), 3);
        assert_eq!((d.train.len(), d.test.len()), (3, 1));
        assert!(d.features.iter().all(|r| r[2] == 0.0));
        let mut ages: Vec<f64> = d.features.iter().map(|r| r[0]).collect();
        ages.sort_by(f64::total_cmp);
        assert_eq!(ages, vec![0.0, 0.25, 0.5, 1.0]);
        for (r, l) in d.features.iter().zip(&d.labels) {
            assert_eq!(*l, u8::from(r[0] >= 0.5));
        }
        assert_eq!(d.groups.len(), 3);
    }

    #[test]
    fn load_errors() {
        let f = write("age,income\n20,<=50K\nabc,>50K\n");
        let err = load_dataset(f.path(), &DatasetSchema { train_size: 1, ..schema(&["age"]) }, 0).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(load_dataset(f.path(), &schema(&["missing"]), 0).is_err());
        let g = write("age,income\n20,maybe\n");
        assert!(load_dataset(g.path(), &DatasetSchema { train_size: 1, test_size: 0, ..schema(&["age"]) }, 0).is_err());
        let h = write("age,income\n20,<=50K\n");
        assert!(load_dataset(h.path(), &schema(&["age"]), 0).is_err());
    }

    #[test]
    fn groups_must_partition() {
        let names = vec!["a".to_string(), "b".to_string()];
        let rows = vec![vec![0.0, 1.0]];
        assert!(Dataset::new(names.clone(), rows.clone(), vec![0], Some(vec![("g".into(), vec![0])]), vec![0], vec![]).is_err());
        assert!(Dataset::new(names.clone(), rows.clone(), vec![0], Some(vec![("g".into(), vec![0, 1])]), vec![0], vec![]).is_ok());
        assert!(Dataset::new(names, vec![vec![0.0, 1.5]], vec![0], None, vec![], vec![]).is_err());
    }

    #[test]
    fn synthetic_is_seeded_and_balanced_enough() {
        let a = synthetic_dataset(4, 200, 100, 0.0, 3).unwrap();
        assert_eq!(a, synthetic_dataset(4, 200, 100, 0.0, 3).unwrap());
        let ones = a.labels.iter().filter(|&&l| l == 1).count();
        assert!((90..210).contains(&ones));
    }

    #[test]
    fn csv_round_trip() {
        let a = synthetic_dataset(3, 5, 2, 0.1, 8).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        a.write_csv(&p).unwrap();
        let s = DatasetSchema {
            csv: None,
            features: a.feature_names.clone(),
            label_column: "label".into(),
            positive_labels: vec![],
            negative_labels: vec![],
            train_size: 5,
            test_size: 2,
            groups: BTreeMap::new(),
        };
        let b = load_dataset(&p, &s, 0).unwrap();
        assert_eq!(b.len(), 7);
        assert_eq!(b.labels.iter().map(|&l| l as usize).sum::<usize>(), a.labels.iter().map(|&l| l as usize).sum::<usize>());
    }
}
