use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_TOL: f64 = 1e-9;

/// Extra rate added when two-qubit gates run concurrently on both edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crosstalk {
    pub edges: [[usize; 2]; 2],
    pub gamma: f64,
}

/// On-disk layout; keys match the device accessors one to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceFile {
    name: String,
    num_qubits: usize,
    coupling_edges: Vec<[usize; 2]>,
    cnot_error: Vec<f64>,
    #[serde(default)]
    crosstalk_gamma: Vec<Crosstalk>,
    #[serde(default)]
    readout_confusion: Vec<[[f64; 2]; 2]>,
    #[serde(default = "default_shots")]
    shots_default: usize,
}

fn default_shots() -> usize {
    8192
}

fn canonical(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Simulated device: coupling map, two-qubit error rates, crosstalk and
/// readout confusion. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DeviceFile", into = "DeviceFile")]
pub struct DeviceModel {
    file: DeviceFile,
    edge_index: HashMap<(usize, usize), usize>,
    crosstalk: HashMap<(usize, usize), f64>,
}

impl TryFrom<DeviceFile> for DeviceModel {
    type Error = Error;

    fn try_from(mut file: DeviceFile) -> Result<Self> {
        let bad = |msg: String| Error::Config(format!("device {}: {msg}", file.name));
        if file.num_qubits == 0 {
            return Err(bad("num_qubits must be positive".into()));
        }
        if file.cnot_error.len() != file.coupling_edges.len() {
            return Err(bad(format!(
                "{} cnot_error entries for {} coupling edges",
                file.cnot_error.len(),
                file.coupling_edges.len()
            )));
        }
        let mut edge_index = HashMap::new();
        for (i, &[a, b]) in file.coupling_edges.iter().enumerate() {
            if a == b || a >= file.num_qubits || b >= file.num_qubits {
                return Err(bad(format!("invalid coupling edge ({a}, {b})")));
            }
            if edge_index.insert(canonical(a, b), i).is_some() {
                return Err(bad(format!("duplicate coupling edge ({a}, {b})")));
            }
        }
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if let Some(r) = file.cnot_error.iter().find(|r| !rate_ok(**r)) {
            return Err(bad(format!("cnot_error {r} outside [0, 1]")));
        }
        let mut crosstalk = HashMap::new();
        for x in &file.crosstalk_gamma {
            if !rate_ok(x.gamma) {
                return Err(bad(format!("crosstalk gamma {} outside [0, 1]", x.gamma)));
            }
            let mut ids = [0usize; 2];
            for (slot, &[a, b]) in ids.iter_mut().zip(&x.edges) {
                *slot = *edge_index
                    .get(&canonical(a, b))
                    .ok_or_else(|| bad(format!("crosstalk on ({a}, {b}) which is not a coupling edge")))?;
            }
            if ids[0] == ids[1] {
                return Err(bad("crosstalk pair repeats one edge".into()));
            }
            if crosstalk.insert(canonical(ids[0], ids[1]), x.gamma).is_some() {
                return Err(bad("crosstalk pair listed twice".into()));
            }
        }
        if file.readout_confusion.is_empty() {
            file.readout_confusion = vec![[[1.0, 0.0], [0.0, 1.0]]; file.num_qubits];
        }
        if file.readout_confusion.len() != file.num_qubits {
            return Err(bad(format!(
                "{} readout matrices for {} qubits",
                file.readout_confusion.len(),
                file.num_qubits
            )));
        }
        for (q, m) in file.readout_confusion.iter().enumerate() {
            for row in m {
                if !row.iter().all(|&v| rate_ok(v)) || (row[0] + row[1] - 1.0).abs() > ROW_TOL {
                    return Err(bad(format!("readout row {row:?} of qubit {q} is not stochastic")));
                }
            }
        }
        if file.shots_default == 0 {
            return Err(bad("shots_default must be positive".into()));
        }
        Ok(Self {
            file,
            edge_index,
            crosstalk,
        })
    }
}

impl From<DeviceModel> for DeviceFile {
    fn from(d: DeviceModel) -> Self {
        d.file
    }
}

const CATALOG: [(&str, &str); 7] = [
    ("toy4", include_str!("../../devices/toy4.toml")),
    ("ring14", include_str!("../../devices/ring14.toml")),
    ("ring16", include_str!("../../devices/ring16.toml")),
    ("hex20a", include_str!("../../devices/hex20a.toml")),
    ("hex20b", include_str!("../../devices/hex20b.toml")),
    ("hex27a", include_str!("../../devices/hex27a.toml")),
    ("hex27b", include_str!("../../devices/hex27b.toml")),
];

impl DeviceModel {
    /// Device with the given edges and per-edge two-qubit error rates,
    /// perfect readout and no crosstalk.
    pub fn new(name: impl Into<String>, num_qubits: usize, edges: &[((usize, usize), f64)]) -> Result<Self> {
        DeviceFile {
            name: name.into(),
            num_qubits,
            coupling_edges: edges.iter().map(|&((a, b), _)| [a, b]).collect(),
            cnot_error: edges.iter().map(|&(_, e)| e).collect(),
            crosstalk_gamma: Vec::new(),
            readout_confusion: Vec::new(),
            shots_default: default_shots(),
        }
        .try_into()
    }

    /// All-to-all coupling with one shared two-qubit error rate.
    pub fn fully_connected(name: impl Into<String>, num_qubits: usize, cnot_error: f64) -> Result<Self> {
        let mut edges = Vec::new();
        for a in 0..num_qubits {
            for b in (a + 1)..num_qubits {
                edges.push(((a, b), cnot_error));
            }
        }
        Self::new(name, num_qubits, &edges)
    }

    /// Noise-free, all-to-all device.
    pub fn ideal(num_qubits: usize) -> Self {
        Self::fully_connected("ideal", num_qubits, 0.0).expect("valid ideal device")
    }

    pub fn with_crosstalk(self, e1: (usize, usize), e2: (usize, usize), gamma: f64) -> Result<Self> {
        let mut file = self.file;
        file.crosstalk_gamma.push(Crosstalk {
            edges: [[e1.0, e1.1], [e2.0, e2.1]],
            gamma,
        });
        file.try_into()
    }

    pub fn with_readout(self, qubit: usize, confusion: [[f64; 2]; 2]) -> Result<Self> {
        let mut file = self.file;
        let slot = file
            .readout_confusion
            .get_mut(qubit)
            .ok_or(Error::QubitOutOfRange {
                qubit,
                num_qubits: file.num_qubits,
            })?;
        *slot = confusion;
        file.try_into()
    }

    pub fn with_shots(self, shots: usize) -> Result<Self> {
        let mut file = self.file;
        file.shots_default = shots;
        file.try_into()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("device serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// A bundled device by name, see [`DeviceModel::catalog`].
    pub fn builtin(name: &str) -> Result<Self> {
        CATALOG
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| Self::from_toml_str(text))
            .unwrap_or_else(|| Err(Error::Config(format!("unknown device {name}"))))
    }

    pub fn catalog() -> Vec<&'static str> {
        CATALOG.iter().map(|(n, _)| *n).collect()
    }

    /// Either a bundled name or a path to a device file.
    pub fn resolve(spec: &str) -> Result<Self> {
        if Self::catalog().contains(&spec) {
            Self::builtin(spec)
        } else {
            Self::load(spec)
        }
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn num_qubits(&self) -> usize {
        self.file.num_qubits
    }

    pub fn shots_default(&self) -> usize {
        self.file.shots_default
    }

    pub fn coupling_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.file.coupling_edges.iter().map(|&[a, b]| (a, b))
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.edge_index.contains_key(&canonical(a, b))
    }

    pub(crate) fn edge_id(&self, a: usize, b: usize) -> Result<usize> {
        self.edge_index.get(&canonical(a, b)).copied().ok_or(Error::NotAnEdge(a, b))
    }

    pub fn cnot_error(&self, a: usize, b: usize) -> Result<f64> {
        Ok(self.file.cnot_error[self.edge_id(a, b)?])
    }

    pub(crate) fn crosstalk_between(&self, e1: usize, e2: usize) -> f64 {
        self.crosstalk.get(&canonical(e1, e2)).copied().unwrap_or(0.0)
    }

    /// Crosstalk coefficient for two edges, 0 when none is declared.
    pub fn crosstalk_gamma(&self, e1: (usize, usize), e2: (usize, usize)) -> Result<f64> {
        Ok(self.crosstalk_between(self.edge_id(e1.0, e1.1)?, self.edge_id(e2.0, e2.1)?))
    }

    pub fn crosstalk_pairs(&self) -> &[Crosstalk] {
        &self.file.crosstalk_gamma
    }

    /// `P[read r | true t]` at `[t][r]`.
    pub fn readout(&self, qubit: usize) -> Result<[[f64; 2]; 2]> {
        self.file
            .readout_confusion
            .get(qubit)
            .copied()
            .ok_or(Error::QubitOutOfRange {
                qubit,
                num_qubits: self.file.num_qubits,
            })
    }

    /// Same device with every rate equal to zero and perfect readout.
    pub fn noiseless(&self) -> Self {
        let mut file = self.file.clone();
        file.cnot_error.iter_mut().for_each(|e| *e = 0.0);
        file.crosstalk_gamma.iter_mut().for_each(|x| x.gamma = 0.0);
        file.readout_confusion = Vec::new();
        file.try_into().expect("zeroed device stays valid")
    }

    /// Mean two-qubit error rate over edges, for summaries.
    pub fn mean_cnot_error(&self) -> f64 {
        let e = &self.file.cnot_error;
        if e.is_empty() {
            0.0
        } else {
            e.iter().sum::<f64>() / e.len() as f64
        }
    }
}
