//! Flat `key = value` experiment files.
//!
//! `#` starts a comment; blank lines are ignored; keys may appear once.
//! Relative paths resolve against the file's directory.
//!
//! | key | default |
//! |---|---|
//! | `arch` | `dac22` |
//! | `qubits` | `4` |
//! | `layers` | `1` |
//! | `params` | none: fit on the training split |
//! | `measure_qubit` | `0` |
//! | `device` | `toy4` (catalog name or TOML path) |
//! | `dataset` | none: path to a dataset schema |
//! | `synthetic` | `16,16,0.05` (train, test, label noise), used without `dataset` |
//! | `s_blk` | `2` |
//! | `eps_syn` | `1e-2` |
//! | `k_max` | per block width |
//! | `max_candidates` | `9` |
//! | `max_patterns` | `20` |
//! | `synth_starts` | `8` |
//! | `schemes` | `quest,random,rl3` |
//! | `weights.<scheme>` | `alpha,beta`; built-in for `rl1`..`rl5`, `0.5,0.5` otherwise |
//! | `iterations` | `1000` |
//! | `learning_rate` | `1e-3` |
//! | `gamma` | `0.99` |
//! | `epsilon_start`, `epsilon_final` | `0.05`, `0.01` |
//! | `target_sync_period` | `10` |
//! | `replay_capacity`, `batch_size` | `1000`, `32` |
//! | `warmup_episodes` | a tenth of `iterations` |
//! | `hidden` | `256,128` |
//! | `optimizer` | `adam` or `sgd` |
//! | `fairness` | `estimated` or `accumulated` |
//! | `twirls`, `twirl_shots` | `16`, `8192` |
//! | `shots` | `exact` or a count |
//! | `backend` | `density` or `mixture` |
//! | `fill` | `original` or `identity` |
//! | `scan_eps`, `scan_delta` | `0.1`, `0.1` |
//! | `output` | `out` |
//! | `seed` | `0` |

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::noise::{Backend, DeviceModel};
use crate::qnn::{Arch, EvalMode};
use crate::quantum::Shots;
use crate::rl::{FairnessSource, Fill, OptimizerKind, RewardWeights, TrainConfig};
use crate::synthesis::{OptimizerConfig, SynthesisConfig};

pub const OUTPUT_ENV: &str = "QNN_DEPLOY_OUT";

const KEYS: &[&str] = &[
    "arch",
    "qubits",
    "layers",
    "params",
    "measure_qubit",
    "device",
    "dataset",
    "synthetic",
    "s_blk",
    "eps_syn",
    "k_max",
    "max_candidates",
    "max_patterns",
    "synth_starts",
    "schemes",
    "iterations",
    "learning_rate",
    "gamma",
    "epsilon_start",
    "epsilon_final",
    "target_sync_period",
    "replay_capacity",
    "batch_size",
    "warmup_episodes",
    "hidden",
    "optimizer",
    "fairness",
    "twirls",
    "twirl_shots",
    "shots",
    "backend",
    "fill",
    "scan_eps",
    "scan_delta",
    "output",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    /// Fewest CNOTs per partition.
    Quest,
    Random,
    /// Deep-Q search; `Rl(k)` for `k` in 1..=5.
    Rl(u8),
}

impl Scheme {
    pub fn default_weights(self) -> RewardWeights {
        let (a, b) = match self {
            Scheme::Rl(1) => (0.1, 0.9),
            Scheme::Rl(2) => (0.4, 0.5),
            Scheme::Rl(4) => (0.6, 0.4),
            Scheme::Rl(5) => (0.9, 0.1),
            _ => (0.5, 0.5),
        };
        RewardWeights::new(a, b).expect("valid built-in weights")
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Quest => f.write_str("quest"),
            Scheme::Random => f.write_str("random"),
            Scheme::Rl(k) => write!(f, "rl{k}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "quest" | "min-cnot" => Ok(Scheme::Quest),
            "random" => Ok(Scheme::Random),
            other => other
                .strip_prefix("rl")
                .and_then(|k| k.parse::<u8>().ok())
                .filter(|k| (1..=5).contains(k))
                .map(Scheme::Rl)
                .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Schema(PathBuf),
    Synthetic { train: usize, test: usize, noise: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub arch: Arch,
    pub qubits: usize,
    pub layers: usize,
    pub params: Option<PathBuf>,
    pub measure_qubit: usize,
    pub device: String,
    pub data: DataSource,
    pub s_blk: usize,
    pub synthesis: SynthesisConfig,
    pub schemes: Vec<Scheme>,
    pub weights: BTreeMap<Scheme, RewardWeights>,
    pub train: TrainConfig,
    pub fairness: FairnessSource,
    pub eval: EvalMode,
    pub fill: Fill,
    pub scan_eps: f64,
    pub scan_delta: f64,
    pub output: PathBuf,
    pub seed: u64,
    base_dir: PathBuf,
    hash: String,
}

fn parse_lines(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: i + 1,
            msg: "expected `key = value`".into(),
        })?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if map.insert(k.clone(), v).is_some() {
            return Err(Error::Parse {
                line: i + 1,
                msg: format!("duplicate key `{k}`"),
            });
        }
    }
    Ok(map)
}

fn value<T: FromStr>(map: &BTreeMap<String, String>, key: &str, default: T) -> Result<T> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse {v:?}"))),
    }
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse {s:?}"))))
        .collect()
}

fn pair(key: &str, v: &str) -> Result<(f64, f64)> {
    match list::<f64>(key, v)?[..] {
        [a, b] => Ok((a, b)),
        _ => Err(Error::Config(format!("`{key}` needs two comma-separated numbers"))),
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::load_with(path, &[])
    }

    /// Load and apply `key=value` overrides on top of the file.
    pub fn load_with(path: impl AsRef<Path>, overrides: &[(String, String)]) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse_with(&text, &base, overrides)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        Self::parse_with(text, base_dir, &[])
    }

    pub fn parse_with(text: &str, base_dir: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let mut map = parse_lines(text)?;
        for (k, v) in overrides {
            map.insert(k.clone(), v.clone());
        }
        Self::from_map(map, base_dir)
    }

    fn from_map(map: BTreeMap<String, String>, base_dir: &Path) -> Result<Self> {
        for k in map.keys() {
            if !KEYS.contains(&k.as_str()) && !k.starts_with("weights.") {
                return Err(Error::Config(format!("unknown key `{k}`")));
            }
        }
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_relative() {
                base_dir.join(p)
            } else {
                p
            }
        };

        let arch: Arch = value(&map, "arch", Arch::Dac22)?;
        let qubits = value(&map, "qubits", 4usize)?;
        let layers = value(&map, "layers", 1usize)?;
        let params = map.get("params").map(|p| resolve(p));
        if let Some(p) = &params {
            if !p.is_file() {
                return Err(Error::Config(format!("params file {} does not exist", p.display())));
            }
        }
        let measure_qubit = value(&map, "measure_qubit", 0usize)?;
        if measure_qubit >= qubits {
            return Err(Error::Config(format!("measure_qubit {measure_qubit} outside {qubits} qubits")));
        }

        let device = map.get("device").cloned().unwrap_or_else(|| "toy4".into());
        let device = if DeviceModel::catalog().contains(&device.as_str()) {
            device
        } else {
            let p = resolve(&device);
            if !p.is_file() {
                return Err(Error::Config(format!("device {device:?} is neither a catalog name nor a file")));
            }
            p.to_string_lossy().into_owned()
        };

        let data = match (map.get("dataset"), map.get("synthetic")) {
            (Some(_), Some(_)) => return Err(Error::Config("set only one of `dataset` and `synthetic`".into())),
            (Some(p), None) => {
                let p = resolve(p);
                if !p.is_file() {
                    return Err(Error::Config(format!("dataset schema {} does not exist", p.display())));
                }
                DataSource::Schema(p)
            }
            (None, s) => {
                let parts: Vec<f64> = list("synthetic", s.map(String::as_str).unwrap_or("16,16,0.05"))?;
                let [train, test, noise] = parts[..] else {
                    return Err(Error::Config("`synthetic` needs train,test,noise".into()));
                };
                if train < 1.0 || test < 0.0 || train.fract() != 0.0 || test.fract() != 0.0 {
                    return Err(Error::Config("`synthetic` sizes must be whole, train ≥ 1".into()));
                }
                DataSource::Synthetic {
                    train: train as usize,
                    test: test as usize,
                    noise,
                }
            }
        };

        let s_blk = value(&map, "s_blk", 2usize)?;
        if !(2..=3).contains(&s_blk) {
            return Err(Error::Config(format!("s_blk must be 2 or 3, got {s_blk}")));
        }
        let eps_syn = value(&map, "eps_syn", 1e-2)?;
        if !(eps_syn > 0.0 && eps_syn < 1.0) {
            return Err(Error::Config(format!("eps_syn {eps_syn} outside (0, 1)")));
        }
        let synthesis = SynthesisConfig {
            eps_syn,
            k_max: map.get("k_max").map(|_| value(&map, "k_max", 0usize)).transpose()?,
            optimizer: OptimizerConfig {
                starts: value(&map, "synth_starts", 8usize)?,
                ..OptimizerConfig::default()
            },
            max_candidates: value(&map, "max_candidates", 9usize)?,
            max_patterns: value(&map, "max_patterns", 20usize)?,
        };
        if synthesis.max_candidates == 0 || synthesis.optimizer.starts == 0 {
            return Err(Error::Config("max_candidates and synth_starts must be positive".into()));
        }

        let schemes: Vec<Scheme> = list("schemes", map.get("schemes").map(String::as_str).unwrap_or("quest,random,rl3"))?;
        if schemes.is_empty() {
            return Err(Error::Config("no schemes configured".into()));
        }
        let mut weights = BTreeMap::new();
        for &s in &schemes {
            let w = match map.get(&format!("weights.{s}")) {
                Some(v) => {
                    let (a, b) = pair(&format!("weights.{s}"), v)?;
                    RewardWeights::new(a, b).map_err(|e| Error::Config(format!("weights.{s}: {e}")))?
                }
                None => s.default_weights(),
            };
            weights.insert(s, w);
        }
        for k in map.keys().filter_map(|k| k.strip_prefix("weights.")) {
            k.parse::<Scheme>()?;
        }

        let d = TrainConfig::default();
        let optimizer = match map.get("optimizer").map(|s| s.to_ascii_lowercase()).as_deref() {
            None | Some("adam") => OptimizerKind::adam(),
            Some("sgd") => OptimizerKind::Sgd,
            Some(o) => return Err(Error::Config(format!("unknown optimizer {o:?}"))),
        };
        let train = TrainConfig {
            iterations: value(&map, "iterations", d.iterations)?,
            learning_rate: value(&map, "learning_rate", d.learning_rate)?,
            gamma: value(&map, "gamma", d.gamma)?,
            epsilon_start: value(&map, "epsilon_start", d.epsilon_start)?,
            epsilon_final: value(&map, "epsilon_final", d.epsilon_final)?,
            target_sync_period: value(&map, "target_sync_period", d.target_sync_period)?,
            replay_capacity: value(&map, "replay_capacity", d.replay_capacity)?,
            batch_size: value(&map, "batch_size", d.batch_size)?,
            warmup_episodes: map.get("warmup_episodes").map(|_| value(&map, "warmup_episodes", 0usize)).transpose()?,
            hidden: match map.get("hidden") {
                Some(v) => list("hidden", v)?,
                None => d.hidden,
            },
            optimizer,
            seed: 0,
        };
        train.validate()?;

        let fairness = match map.get("fairness").map(String::as_str).unwrap_or("estimated") {
            "estimated" => FairnessSource::Estimated {
                twirls: value(&map, "twirls", 16usize)?,
                shots: value(&map, "twirl_shots", 8192usize)?,
            },
            "accumulated" => FairnessSource::Accumulated,
            f => return Err(Error::Config(format!("unknown fairness source {f:?}"))),
        };
        let shots = match map.get("shots").map(String::as_str).unwrap_or("exact") {
            "exact" => Shots::Exact,
            n => Shots::Sampled {
                shots: n.parse().map_err(|_| Error::Config(format!("`shots`: cannot parse {n:?}")))?,
                seed: 0,
            },
        };
        let backend = match map.get("backend").map(String::as_str).unwrap_or("density") {
            "density" => Backend::Density,
            "mixture" => Backend::Mixture,
            b => return Err(Error::Config(format!("unknown backend {b:?}"))),
        };
        let fill = match map.get("fill").map(String::as_str).unwrap_or("original") {
            "original" => Fill::Original,
            "identity" => Fill::Identity,
            f => return Err(Error::Config(format!("unknown fill {f:?}"))),
        };

        let output = match std::env::var_os(OUTPUT_ENV) {
            Some(o) => PathBuf::from(o),
            None => resolve(map.get("output").map(String::as_str).unwrap_or("out")),
        };

        let canonical: String = map
            .iter()
            .filter(|(k, _)| k.as_str() != "output")
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        let hash = super::hex(&Sha256::digest(canonical.as_bytes()));

        Ok(Self {
            arch,
            qubits,
            layers,
            params,
            measure_qubit,
            device,
            data,
            s_blk,
            synthesis,
            schemes,
            weights,
            train,
            fairness,
            eval: EvalMode { backend, shots },
            fill,
            scan_eps: value(&map, "scan_eps", 0.1)?,
            scan_delta: value(&map, "scan_delta", 0.1)?,
            output,
            seed: value(&map, "seed", 0u64)?,
            base_dir: base_dir.to_path_buf(),
            hash,
        })
    }

    /// SHA-256 of the effective key/value set minus `output`, hex encoded.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn short_hash(&self) -> &str {
        &self.hash[..12]
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn weights_for(&self, s: Scheme) -> RewardWeights {
        self.weights.get(&s).copied().unwrap_or_else(|| s.default_weights())
    }
}
